#include "revpref/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "revpref/rng.hpp"

namespace revpref {

namespace {

constexpr std::uint64_t kMixtureTag = 0x6d69780000000000ULL;
constexpr std::uint64_t kPriceTag = 0x7072696365000000ULL;
constexpr std::uint64_t kHouseholdTag = 0x686f757365000000ULL;
constexpr int kJitterPoints = 3;
constexpr int kJitterTries = 64;

// Uniform point on the budget simplex {x >= 0 : p.x = 1}.
Vec budget_point(CounterRng& rng, const Vec& prices) {
  Vec y(prices.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = -std::log(uniform_open01(rng));
  y /= y.sum();
  return y.cwiseQuotient(prices);
}

bool inside(const PatchLayout& layout, int t, int patch, const Vec& x) {
  const auto& signs = layout.per_budget[t][patch].signs;
  for (int s = 0; s < layout.budgets(); ++s) {
    if (signs[s] == Side::None) continue;
    const double v = layout.prices.row(s).dot(x) - 1.0;
    if (std::abs(v) <= 10 * kBoundaryTol) return false;
    if ((v < 0.0) != (signs[s] == Side::Below)) return false;
  }
  return (x.array() > 0.0).all();
}

Vec jittered_point(CounterRng& rng, const PatchLayout& layout, int t, int patch) {
  const Vec prices = layout.prices.row(t).transpose();
  std::vector<Vec> points{layout.per_budget[t][patch].witness};
  for (int tries = 0; tries < kJitterTries && static_cast<int>(points.size()) <= kJitterPoints; ++tries) {
    Vec x = budget_point(rng, prices);
    if (inside(layout, t, patch, x)) points.push_back(std::move(x));
  }
  Vec w(points.size());
  for (Eigen::Index k = 0; k < w.size(); ++k) w(k) = -std::log(uniform_open01(rng));
  w /= w.sum();
  Vec x = Vec::Zero(prices.size());
  for (std::size_t k = 0; k < points.size(); ++k) x += w(static_cast<Eigen::Index>(k)) * points[k];
  return inside(layout, t, patch, x) ? x : points.front();
}

}  // namespace

StochasticDataset gen_mixture(const MixtureSpec& spec) {
  if (!spec.layout || !spec.types) throw InputError("mixture needs a layout and a type matrix");
  const auto& layout = *spec.layout;
  const auto& types = *spec.types;
  const int n = layout.budgets();
  const int h = types.columns();
  if (spec.nu_star.size() != h) throw InputError("nu* has the wrong length");
  if (spec.nu_star.minCoeff() < 0.0 || std::abs(spec.nu_star.sum() - 1.0) > 1e-9)
    throw InputError("nu* must lie on the simplex");
  if (static_cast<int>(spec.sample_sizes.size()) != n) throw InputError("need one sample size per period");
  if (!(spec.log_sd >= 0.0)) throw InputError("expenditure spread must be nonnegative");

  Vec cdf(h);
  double acc = 0.0;
  for (int j = 0; j < h; ++j) cdf(j) = acc += spec.nu_star(j);

  std::vector<Period> periods(n);
  for (int t = 0; t < n; ++t) {
    const int size = spec.sample_sizes[t];
    if (size < 1) throw InputError("sample sizes must be positive");
    auto& period = periods[t];
    period.id = std::to_string(t + 1);
    period.prices = layout.prices.row(t).transpose();
    period.choices.resize(size, layout.prices.cols());
    period.households.resize(size);
    parallel_for(spec.execution, size, [&](long long k) {
      CounterRng rng(spec.seed, stream_id({kMixtureTag, static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(k)}));
      const double u = uniform01(rng) * acc;
      int j = static_cast<int>(std::upper_bound(cdf.data(), cdf.data() + h, u) - cdf.data());
      j = std::min(j, h - 1);
      while (spec.nu_star(j) == 0.0 && j > 0) --j;
      const Vec x = jittered_point(rng, layout, t, types.patch(j, t));
      const double e = std::exp(spec.log_mean + spec.log_sd * standard_normal(rng));
      period.choices.row(k) = (e * x).transpose();
      period.households[k] = "h" + std::to_string(k + 1);
    });
  }
  return StochasticDataset(std::move(periods));
}

Vec quasilinear_demand(const Vec& weights, const Vec& prices) { return weights.cwiseQuotient(prices); }

QuasilinearSample gen_quasilinear(const QuasilinearSpec& spec) {
  const int l = spec.goods, n = spec.periods, m = spec.households;
  if (l < 1 || n < 1 || m < 1) throw InputError("goods, periods and households must be positive");
  if (!(spec.price_low > 0.0 && spec.price_high >= spec.price_low)) throw InputError("invalid price range");
  const Vec alpha = spec.dirichlet.size() ? spec.dirichlet : Vec::Ones(l);
  if (alpha.size() != l || !(alpha.minCoeff() > 0.0)) throw InputError("Dirichlet parameters must be positive");

  Mat prices(n, l);
  for (int t = 0; t < n; ++t) {
    CounterRng rng(spec.seed, stream_id({kPriceTag, static_cast<std::uint64_t>(t)}));
    for (int i = 0; i < l; ++i)
      prices(t, i) = std::exp(std::log(spec.price_low) + uniform01(rng) * std::log(spec.price_high / spec.price_low));
  }

  QuasilinearSample out;
  out.panels.resize(m);
  std::vector<Period> periods(n);
  for (int t = 0; t < n; ++t) {
    periods[t].id = std::to_string(t + 1);
    periods[t].prices = prices.row(t).transpose();
    periods[t].choices.resize(m, l);
    periods[t].households.resize(m);
  }
  parallel_for(spec.execution, m, [&](long long k) {
    CounterRng rng(spec.seed, stream_id({kHouseholdTag, static_cast<std::uint64_t>(k)}));
    Vec a(l);
    for (int i = 0; i < l; ++i) a(i) = gamma_variate(rng, alpha(i));
    a /= a.sum();
    a *= std::exp(spec.scale_log_sd * standard_normal(rng));
    Mat bundles(n, l);
    for (int t = 0; t < n; ++t) {
      bundles.row(t) = quasilinear_demand(a, prices.row(t).transpose()).transpose();
      periods[t].choices.row(k) = bundles.row(t);
      periods[t].households[k] = "h" + std::to_string(k + 1);
    }
    out.panels[k] = DeterministicDataset(prices, std::move(bundles));
  });
  out.data = StochasticDataset(std::move(periods));
  return out;
}

}  // namespace revpref
