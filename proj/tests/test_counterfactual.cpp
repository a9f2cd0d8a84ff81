#include <doctest.h>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "revpref/counterfactual.hpp"
#include "revpref/simulate.hpp"

using namespace revpref;

namespace {

struct TwoBudgets {
  PatchLayout layout = enumerate_patches(fixtures::two_budgets());
  TypeMatrix types = enumerate_types(layout);
  fixtures::Alignment align = *fixtures::align(Mat(types.matrix), fixtures::reference_types(), {0, 0, 1, 1});
  Vec pi = fixtures::to_computed(fixtures::reference_pi(), align.row);
  Vec rho = type_indicator(types, layout, 0, 1);

  ChoiceProbabilities probabilities(int n = 10) const { return probabilities_from_vector(layout, pi, {n, n}); }
};

}  // namespace

TEST_SUITE("counterfactual") {
  TEST_CASE("point-identified bounds") {
    const TwoBudgets f;
    const auto b = welfare_bounds(f.pi, f.types, f.layout, 0, 1);
    CHECK(b.lower == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(b.upper == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(b.any_rationalization_upper == doctest::Approx(0.6).epsilon(1e-10));
    const auto all = welfare_range(f.pi, f.types, Vec::Ones(3));
    CHECK(all.lower == doctest::Approx(1.0));
    CHECK(all.upper == doctest::Approx(1.0));
    const Vec outside = fixtures::to_computed((Vec(4) << 0.4, 0.6, 0.5, 0.5).finished(), f.align.row);
    CHECK_THROWS_AS(welfare_range(outside, f.types, f.rho), InfeasibleConstraints);
  }

  TEST_CASE("bounds equal vertex enumeration") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      CounterRng rng(seed, 60);
      const auto layout = enumerate_patches(oracle::random_matrix(rng, 3, 2, 0.5, 2.0));
      const auto types = enumerate_types(layout);
      if (types.columns() > 6 || types.columns() < 2) continue;
      Vec nu = oracle::random_matrix(rng, types.columns(), 1, 0.0, 1.0);
      nu /= nu.sum();
      const Vec pi = Mat(types.matrix) * nu;
      const Vec rho = type_indicator(types, layout, 0, 2);
      const auto r = welfare_range(pi, types, rho);
      for (auto sense : {ObjectiveSense::Minimize, ObjectiveSense::Maximize}) {
        auto lp = LinearProgram::with_variables(types.columns(), sense);
        lp.objective = rho;
        for (int i = 0; i < types.rows; ++i) lp.add_row(Mat(types.matrix).row(i).transpose(), RowSense::Equal, pi(i));
        const auto v = oracle::lp_vertex_optimum(lp);
        REQUIRE(v);
        CHECK((sense == ObjectiveSense::Minimize ? r.lower : r.upper) == doctest::Approx(*v).epsilon(1e-7));
      }
      CHECK(r.lower <= rho.dot(nu) + 1e-9);
      CHECK(r.upper >= rho.dot(nu) - 1e-9);
      const auto back = welfare_range(pi, types, type_indicator(types, layout, 2, 0));
      CHECK(r.upper <= 1.0 - back.lower + 1e-9);
    }
  }

  TEST_CASE("partitions") {
    const TwoBudgets f;
    const auto p = theta_partition(f.rho);
    CHECK(p.upper == std::vector<int>{f.align.col[1]});
    CHECK(p.lower.size() == 2);
    CHECK(p.middle.empty());
    CHECK_FALSE(p.normalized);
    const auto q = theta_partition((Vec(2) << 0, 1).finished());
    CHECK(q.theta_min == 0.0);
    CHECK(q.theta_max == 1.0);
    const auto m = theta_partition((Vec(3) << 0, 0.5, 1).finished());
    CHECK(m.middle == std::vector<int>{1});
    CHECK_THROWS_AS(theta_partition(Vec::Ones(3)), InputError);
  }

  TEST_CASE("floors") {
    const auto p = theta_partition((Vec(4) << 0, 0, 1, 1).finished());
    const auto half = tightened_lower_bounds(p, 0.5, 0.1);
    for (int j = 0; j < 4; ++j) CHECK(half.values(j) == doctest::Approx(0.025));
    const auto top = tightened_lower_bounds(p, 1.0, 0.1);
    CHECK(top.values(0) == 0.0);
    CHECK(top.values(2) == doctest::Approx(0.05));
    CHECK_THROWS_AS(tightened_lower_bounds(p, 1.5, 0.1), InputError);
    CHECK_THROWS_AS(tightened_lower_bounds(p, 0.5, 1.0), InputError);

    const auto mixed = theta_partition((Vec(5) << 0, 0.2, 0.7, 1, 1).finished());
    for (double theta = 0.0; theta <= 1.0; theta += 0.05) {
      const auto a = tightened_lower_bounds(mixed, theta, 0.2);
      const auto b = tightened_lower_bounds(mixed, theta, 0.1);
      CHECK(a.values.sum() <= 0.2 + 1e-12);
      CHECK((b.values.array() <= a.values.array() + 1e-15).all());
      CHECK((a.values.array() >= 0.0).all());
    }
  }

  TEST_CASE("restricted statistic") {
    const TwoBudgets f;
    const auto pi = f.probabilities();
    CHECK(jn_theta(pi, f.types, f.rho, 0.5, Omega::identity(4)) == 0.0);
    const double at_zero = jn_theta(pi, f.types, f.rho, 0.0, Omega::identity(4));
    CHECK(at_zero > 0.0);
    // Grid search on the simplex slice rho'nu = 0.
    const int up = f.align.col[1];
    const double grid = oracle::cls_grid_minimum(Mat(f.types.matrix), pi.stacked, Vec::Ones(4), 1.0, 0.001,
                                                 [&](const Vec& nu) {
                                                   return nu(up) == 0.0 && std::abs(nu.sum() - 1.0) < 5e-4;
                                                 });
    CHECK(std::abs(at_zero / pi.total_n - grid) <= 1e-5);

    const auto part = theta_partition(f.rho);
    const auto floors = tightened_lower_bounds(part, 0.0, 0.1);
    const double tightened = jn_theta(pi, f.types, f.rho, 0.0, Omega::identity(4), &floors.values);
    CHECK(tightened >= at_zero - 1e-12);
    Vec impossible = Vec::Constant(3, 0.5);
    CHECK_THROWS_AS(jn_theta(pi, f.types, f.rho, 0.0, Omega::identity(4), &impossible), InfeasibleConstraints);
  }

  TEST_CASE("identified interval has zero statistic inside") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      CounterRng rng(seed, 61);
      const auto layout = enumerate_patches(oracle::random_matrix(rng, 3, 3, 0.5, 2.0));
      const auto types = enumerate_types(layout);
      const Vec nu = Vec::Constant(types.columns(), 1.0 / types.columns());
      const Vec pi = Mat(types.matrix) * nu;
      const auto p = probabilities_from_vector(layout, pi, std::vector<int>(3, 50));
      const Vec rho = type_indicator(types, layout, 0, 1);
      if (rho.maxCoeff() == rho.minCoeff()) continue;
      const auto r = welfare_range(pi, types, rho);
      if (r.upper <= r.lower + 1e-6) continue;
      for (int k = 1; k < 10; ++k) {
        const double theta = r.lower + (r.upper - r.lower) * k / 10.0;
        CHECK(jn_theta(p, types, rho, theta, Omega::identity(pi.size())) == 0.0);
      }
      return;
    }
    FAIL("no partially identified instance found");
  }

  TEST_CASE("grid") {
    const auto p = theta_partition((Vec(2) << 0, 1).finished());
    const auto g = theta_grid(p, 0.2, {0.45, 2.0});
    const std::vector<double> want{0.0, 0.2, 0.4, 0.45, 0.6, 0.8, 1.0};
    REQUIRE(g.size() == want.size());
    for (std::size_t k = 0; k < g.size(); ++k) CHECK(g[k] == doctest::Approx(want[k]));
    CHECK(g.back() == 1.0);
    CHECK_THROWS_AS(theta_grid(p, 0.3, {}), InputError);
  }

  TEST_CASE("confidence interval") {
    const TwoBudgets f;
    MixtureSpec spec;
    spec.layout = &f.layout;
    spec.types = &f.types;
    spec.nu_star = fixtures::to_computed(fixtures::reference_nu(), f.align.col);
    spec.sample_sizes = {300, 300};
    spec.seed = 12;
    const auto data = gen_mixture(spec);
    const auto pi = estimate_pi(data, f.layout);
    IntervalConfig cfg;
    cfg.replications = 100;
    cfg.grid_step = 0.05;
    cfg.seed = 3;
    const auto ci = confidence_interval(pi, f.types, f.rho, Omega::identity(4), cfg);
    REQUIRE(ci.hull);
    CHECK(ci.hull->first <= 0.5);
    CHECK(ci.hull->second >= 0.5);
    CHECK(ci.hull->second - ci.hull->first < 0.5);
    for (const auto& g : ci.grid) CHECK((g.accepted == (g.jn <= g.critical_value)));

    cfg.execution = Execution::Serial;
    const auto serial = confidence_interval(pi, f.types, f.rho, Omega::identity(4), cfg);
    CHECK(serial.accepted() == ci.accepted());

    cfg.execution = Execution::Parallel;
    cfg.alpha = 0.01;
    const auto wider = confidence_interval(pi, f.types, f.rho, Omega::identity(4), cfg);
    const auto wide = wider.accepted();
    for (double th : ci.accepted()) CHECK(std::find(wide.begin(), wide.end(), th) != wide.end());
  }
}
