// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion.
// The exit status reflects criteria 1-11; criterion 12 needs survey microdata
// that is not distributed with the project and is always reported as FAIL.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <thread>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "revpref/afriat.hpp"
#include "revpref/counterfactual.hpp"
#include "revpref/relations.hpp"
#include "revpref/simulate.hpp"
#include "revpref/stochastic_test.hpp"

using namespace revpref;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Verdict {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

const std::filesystem::path kData = REVPREF_DATA_DIR;

// Two crossing budgets in the reference coordinates: rows (t seg 1, t seg 2, t' seg 1,
// t' seg 2), mapped onto the computed layout.
struct TwoBudgetDesign {
  PatchLayout layout;
  TypeMatrix types;
  fixtures::Alignment align;
  Vec rho;

  TwoBudgetDesign() {
    const auto prices = load_prices(kData / "two_budgets_prices.csv");
    layout = enumerate_patches(prices.prices);
    types = enumerate_types(layout);
    const auto a = fixtures::align(Mat(types.matrix), fixtures::reference_types(), {0, 0, 1, 1});
    if (a) align = *a;
    rho = type_indicator(types, layout, 0, 1);
  }
  bool aligned() const { return !align.row.empty(); }
  Vec pi(const Vec& reference) const { return fixtures::to_computed(reference, align.row); }
  Vec nu(const Vec& reference) const { return fixtures::to_computed(reference, align.col); }
};

Verdict criterion1() {
  const auto d = load_deterministic(kData / "crossing_budgets.csv");
  const auto start = Clock::now();
  const bool garp = check_garp(d).passes;
  const bool gapp = check_gapp(d).passes;
  const bool norm = check_garp(normalize_expenditure(d)).passes;
  const double ms = 1e3 * seconds_since(start);
  return {garp && !gapp && !norm && ms < 1.0,
          fmt("garp=%g gapp=%g normalized_garp=%g in %.3f ms", garp, gapp, norm, ms)};
}

Verdict criterion2() {
  const auto d = load_deterministic(kData / "cheaper_elsewhere.csv");
  const bool garp = check_garp(d).passes;
  const bool gapp = check_gapp(d).passes;
  const bool norm = check_garp(normalize_expenditure(d)).passes;
  const auto forward = price_preference_query(d, 0, 1);
  const auto backward = price_preference_query(d, 1, 0);
  const bool ok = !garp && gapp && norm && forward == PriceRanking::StrictlyPreferred &&
                  backward == PriceRanking::Unranked;
  return {ok, fmt("garp=%g gapp=%g normalized_garp=%g", garp, gapp, norm) + " query(t,t')=" + to_string(forward) +
                  " query(t',t)=" + to_string(backward)};
}

Verdict criterion3() {
  const auto start = Clock::now();
  const TwoBudgetDesign ex;
  if (!ex.aligned()) return {false, "type matrix does not match the reference up to permutation"};
  const bool counts = ex.layout.count(0) == 2 && ex.layout.count(1) == 2 && ex.types.columns() == 3;
  const auto pi = probabilities_from_vector(ex.layout, ex.pi(fixtures::reference_pi()), {10, 10});
  const auto r = compute_jn(pi, ex.types, Omega::identity(4));
  const auto b = welfare_bounds(pi.stacked, ex.types, ex.layout, 0, 1);
  const double ms = 1e3 * seconds_since(start);
  const double nu_err = (r.nu_hat - ex.nu(fixtures::reference_nu())).cwiseAbs().maxCoeff();
  const bool ok = counts && r.jn == 0.0 && nu_err <= 1e-8 && std::abs(b.lower - 0.5) <= 1e-8 &&
                  std::abs(b.upper - 0.5) <= 1e-8 && std::abs(b.any_rationalization_upper - 0.6) <= 1e-8 &&
                  ms < 100.0;
  return {ok, fmt("jN=%g |nu-nu*|=%.2e bounds=[%.10g, %.10g]", r.jn, nu_err, b.lower, b.upper) +
                  fmt(" anyRationalizationUpper=%.10g in %.2f ms", b.any_rationalization_upper, ms)};
}

Verdict criterion4() {
  const TwoBudgetDesign ex;
  if (!ex.aligned()) return {false, "no alignment"};
  const Vec target = ex.pi((Vec(4) << 0.4, 0.6, 0.5, 0.5).finished());
  const auto pi = probabilities_from_vector(ex.layout, target, {10, 10});
  const auto r = compute_jn(pi, ex.types, Omega::identity(4));
  const double objective = r.jn / pi.total_n;
  const double grid = oracle::cls_grid_minimum(Mat(ex.types.matrix), target, Vec::Ones(4), 1.0, 0.001);
  return {r.jn > 0.0 && std::abs(objective - grid) <= 1e-5,
          fmt("jN=%.6g objective=%.8g grid oracle=%.8g", r.jn, objective, grid)};
}

std::set<std::vector<int>> columns_of(const TypeMatrix& tm) {
  std::set<std::vector<int>> out;
  for (int h = 0; h < tm.columns(); ++h) {
    std::vector<int> a(tm.budgets);
    for (int t = 0; t < tm.budgets; ++t) a[t] = tm.patch(h, t);
    out.insert(a);
  }
  return out;
}

Verdict criterion5() {
  int mismatches = 0, total_types = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    CounterRng rng(seed, 500);
    const auto layout = enumerate_patches(oracle::random_matrix(rng, 3, 2, 0.5, 2.0));
    const auto tm = enumerate_types(layout);
    const auto cols = columns_of(tm);
    if (cols != oracle::rational_assignments(layout) || static_cast<int>(cols.size()) != tm.columns()) ++mismatches;
    total_types += tm.columns();
  }
  return {mismatches == 0, fmt("%g of 50 instances differ (%g types in total)", mismatches, total_types)};
}

// The literal check uses 10^4 lattice points per budget. Thin patches can fall
// between lattice points, so each mismatch is also checked against a much
// denser lattice to tell oracle misses from enumeration errors.
Verdict criterion6() {
  int mismatches = 0, patches = 0, dense_mismatches = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    CounterRng rng(seed, 600);
    const int t = 2 + static_cast<int>(uniform_index(rng, 3));
    const int l = 2 + static_cast<int>(uniform_index(rng, 2));
    const Mat prices = oracle::random_matrix(rng, t, l, 0.5, 2.0);
    const auto layout = enumerate_patches(prices);
    for (int b = 0; b < t; ++b) {
      oracle::SignSet got;
      for (const auto& p : layout.per_budget[b]) got.insert(oracle::to_ints(p.signs));
      if (got != oracle::sampled_sign_vectors(prices, b, 10000)) {
        ++mismatches;
        if (got != oracle::sampled_sign_vectors(prices, b, 2000000)) ++dense_mismatches;
      }
      patches += layout.count(b);
    }
  }
  return {mismatches == 0, fmt("%g budgets differ from the 10^4-point lattice, %g from a 2*10^6-point lattice "
                               "(%g patches in total)",
                               mismatches, dense_mismatches, patches)};
}

Verdict criterion7() {
  int discrepancies = 0, gapp_pass = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    CounterRng rng(seed, 700);
    const int t = 2 + static_cast<int>(uniform_index(rng, 7));
    const int l = 1 + static_cast<int>(uniform_index(rng, 5));
    const DeterministicDataset d(oracle::random_matrix(rng, t, l, 0.5, 2.0), oracle::random_matrix(rng, t, l, 0.0, 3.0));
    const bool gapp = check_gapp(d).passes;
    if (gapp != check_garp(normalize_expenditure(d)).passes) ++discrepancies;
    gapp_pass += gapp;
  }
  return {discrepancies == 0, fmt("%g discrepancies (%g of 1000 pass GAPP)", discrepancies, gapp_pass)};
}

Verdict criterion8() {
  int failures = 0, tried = 0;
  std::uint64_t seed = 0;
  for (int found = 0; found < 100; ++seed) {
    CounterRng rng(seed, 800);
    const int t = 2 + static_cast<int>(uniform_index(rng, 5));
    const int l = 2 + static_cast<int>(uniform_index(rng, 3));
    const DeterministicDataset d(oracle::random_matrix(rng, t, l, 0.5, 2.0), oracle::random_matrix(rng, t, l, 0.0, 3.0));
    ++tried;
    if (!check_gapp(d).passes) continue;
    ++found;
    double radius = 0.0;
    for (int k = 0; k < t; ++k) radius = std::max(radius, d.bundle(k).norm());
    const auto u = build_augmented_utility(d);
    const auto audit = verify_rationalization(u, d, 2.0 * radius, 15);
    if (!audit.at_observed_bundles || !audit.on_grid) ++failures;
  }
  return {failures == 0, fmt("%g of 100 audits failed (%g datasets drawn)", failures, tried)};
}

struct MonteCarlo {
  TwoBudgetDesign ex;
  Vec nu_star;

  MonteCarlo() { nu_star = ex.nu(fixtures::reference_nu()); }

  StochasticDataset draw(std::uint64_t seed) const {
    MixtureSpec spec;
    spec.layout = &ex.layout;
    spec.types = &ex.types;
    spec.nu_star = nu_star;
    spec.sample_sizes = {500, 500};
    spec.seed = seed;
    return gen_mixture(spec);
  }
};

Verdict criterion9() {
  const MonteCarlo mc;
  if (!mc.ex.aligned()) return {false, "no alignment"};
  const auto start = Clock::now();
  int rejections = 0, positive = 0;
  for (int run = 0; run < 200; ++run) {
    const auto pi = estimate_pi(mc.draw(9000 + run), mc.ex.layout);
    BootstrapConfig cfg;
    cfg.replications = 200;
    cfg.seed = 19000 + run;
    const auto r = bootstrap_pvalue(pi, mc.ex.types, Omega::identity(4), cfg);
    rejections += *r.p_value <= 0.05;
    positive += r.jn > 0.0;
  }
  const double rate = rejections / 200.0;
  return {rate <= 0.08, fmt("rejection rate %.3f (%g runs with jN > 0) in %.1f s", rate, positive,
                            seconds_since(start))};
}

Verdict criterion10() {
  const MonteCarlo mc;
  if (!mc.ex.aligned()) return {false, "no alignment"};
  const auto start = Clock::now();
  int covered = 0, hull_ok = 0;
  for (int run = 0; run < 100; ++run) {
    const auto pi = estimate_pi(mc.draw(5000 + run), mc.ex.layout);
    const auto omega = Omega::identity(4);
    const double jn = compute_jn(pi, mc.ex.types, omega).jn;
    const auto bounds = welfare_range(welfare_target(pi, mc.ex.types, omega, jn), mc.ex.types, mc.ex.rho);
    IntervalConfig cfg;
    cfg.alpha = 0.05;
    cfg.grid_step = 0.01;
    cfg.replications = 200;
    cfg.seed = 15000 + run;
    cfg.extra_points = {bounds.lower, bounds.upper};
    const auto ci = confidence_interval(pi, mc.ex.types, mc.ex.rho, omega, cfg);
    if (!ci.hull) continue;
    const auto acc = ci.accepted();
    covered += std::any_of(acc.begin(), acc.end(), [](double th) { return std::abs(th - 0.5) <= 1e-12; });
    hull_ok += ci.hull->first <= bounds.lower + 1e-12 && ci.hull->second >= bounds.upper - 1e-12;
  }
  const double coverage = covered / 100.0;
  return {coverage >= 0.90 && hull_ok == 100,
          fmt("coverage %.2f, %g of 100 hulls contain the bounds, in %.1f s", coverage, hull_ok,
              seconds_since(start))};
}

// Six random budgets in five goods; households mix uniformly over types, and in
// periods 1 and 2 half of them instead pick a patch below the other period's
// budget, which no mixture of rational types reproduces.
ChoiceProbabilities scale_instance(const PatchLayout& layout, const TypeMatrix& types) {
  MixtureSpec spec;
  spec.layout = &layout;
  spec.types = &types;
  spec.nu_star = Vec::Constant(types.columns(), 1.0 / types.columns());
  spec.sample_sizes.assign(6, 2000);
  spec.seed = 11;
  auto data = gen_mixture(spec);
  std::vector<Period> periods = data.periods();
  CounterRng rng(12, 1100);
  for (auto [t, s] : {std::pair{1, 2}, std::pair{2, 1}}) {
    std::vector<int> below;
    for (int k = 0; k < layout.count(t); ++k)
      if (layout.side(t, k, s) == Side::Below) below.push_back(k);
    for (int h = 0; h < 1000 && !below.empty(); ++h) {
      const int k = below[uniform_index(rng, below.size())];
      periods[t].choices.row(h) = layout.per_budget[t][k].witness.transpose() * (0.5 + uniform01(rng));
    }
  }
  return estimate_pi(StochasticDataset(periods), layout);
}

Verdict criterion11() {
  CounterRng rng(7, 1100);
  const auto start = Clock::now();
  const auto layout = enumerate_patches(oracle::random_matrix(rng, 6, 5, 0.5, 2.0));
  const auto types = enumerate_types(layout);
  const auto pi = scale_instance(layout, types);
  const double setup = seconds_since(start);

  auto timed = [&](int threads, double& secs) {
    set_worker_threads(threads);
    BootstrapConfig cfg;
    cfg.replications = 1000;
    cfg.seed = 2024;
    const auto t0 = Clock::now();
    auto r = bootstrap_pvalue(pi, types, Omega::identity(types.rows), cfg);
    secs = seconds_since(t0);
    return r;
  };
  double one = 0.0, eight = 0.0;
  const auto a = timed(1, one);
  const auto b = timed(8, eight);
  const bool identical = a.jn == b.jn && a.p_value == b.p_value && a.bootstrap == b.bootstrap && a.nu_hat == b.nu_hat;
  const bool ok = identical && setup + one < 600.0 && setup + eight < 180.0;
  return {ok, fmt("H=%g I=%g jN=%.4g p=%.3f", types.columns(), types.rows, a.jn, a.p_value.value_or(-1)) +
                  fmt("; setup %.1f s, 1 thread %.1f s, 8 threads %.1f s", setup, one, eight) +
                  (identical ? ", bit-identical" : ", results differ") +
                  fmt(" (%g hardware threads)", std::thread::hardware_concurrency())};
}

}  // namespace

int main() {
  const std::vector<std::function<Verdict()>> criteria{criterion1, criterion2, criterion3, criterion4,
                                                       criterion5, criterion6, criterion7, criterion8,
                                                       criterion9, criterion10, criterion11};
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Verdict v{false, ""};
    try {
      v = criteria[k]();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += !v.pass;
    std::printf("%s criterion %zu: %s\n", v.pass ? "PASS" : "FAIL", k + 1, v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("FAIL criterion 12: survey microdata results are not reproducible here (data not distributed)\n");
  return failed == 0 ? 0 : 1;
}
