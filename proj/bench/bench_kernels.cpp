// Serial reference against OpenMP kernels on random five-good instances.

#include <benchmark/benchmark.h>

#include <map>
#include <utility>
#include <vector>

#include "revpref/patches.hpp"
#include "revpref/rng.hpp"
#include "revpref/simulate.hpp"
#include "revpref/stochastic_test.hpp"
#include "revpref/types.hpp"

namespace {

using namespace revpref;

struct Instance {
  PatchLayout layout;
  TypeMatrix types;
  ChoiceProbabilities pi;
};

Mat random_prices(int periods, int goods, std::uint64_t seed) {
  CounterRng rng(seed, 0);
  Mat p(periods, goods);
  for (int t = 0; t < periods; ++t)
    for (int i = 0; i < goods; ++i) p(t, i) = 0.5 + 1.5 * uniform01(rng);
  return p;
}

const Instance& instance(int periods) {
  static std::map<int, Instance> cache;
  auto it = cache.find(periods);
  if (it != cache.end()) return it->second;
  Instance in;
  in.layout = enumerate_patches(random_prices(periods, 5, 11));
  in.types = enumerate_types(in.layout);
  MixtureSpec spec;
  spec.layout = &in.layout;
  spec.types = &in.types;
  spec.nu_star = Vec::Constant(in.types.columns(), 1.0 / in.types.columns());
  spec.sample_sizes.assign(periods, 2000);
  spec.seed = 3;
  // Half of period 1 moves below budget 0 and half of period 0 below budget 1,
  // so the statistic is positive and the bootstrap resamples.
  std::vector<Period> draws = gen_mixture(spec).periods();
  CounterRng rng(4, 0);
  for (auto [t, s] : {std::pair{0, 1}, std::pair{1, 0}}) {
    std::vector<int> below;
    for (int k = 0; k < in.layout.count(t); ++k)
      if (in.layout.side(t, k, s) == Side::Below) below.push_back(k);
    for (int h = 0; h < 1000 && !below.empty(); ++h)
      draws[t].choices.row(h) = in.layout.per_budget[t][below[uniform_index(rng, below.size())]].witness.transpose();
  }
  in.pi = estimate_pi(StochasticDataset(std::move(draws)), in.layout);
  return cache.emplace(periods, std::move(in)).first->second;
}

void BM_Patches(benchmark::State& state) {
  const Mat prices = random_prices(static_cast<int>(state.range(0)), 5, 11);
  const auto ex = state.range(1) ? Execution::Parallel : Execution::Serial;
  for (auto _ : state) benchmark::DoNotOptimize(enumerate_patches(prices, ex));
}

void BM_Types(benchmark::State& state) {
  const auto& in = instance(static_cast<int>(state.range(0)));
  const auto ex = state.range(1) ? Execution::Parallel : Execution::Serial;
  for (auto _ : state) benchmark::DoNotOptimize(enumerate_types(in.layout, {10'000'000, ex}));
}

void BM_Bootstrap(benchmark::State& state) {
  const auto& in = instance(4);
  const auto omega = Omega::identity(in.types.rows);
  BootstrapConfig cfg;
  cfg.replications = 50;
  cfg.execution = state.range(0) ? Execution::Parallel : Execution::Serial;
  for (auto _ : state) benchmark::DoNotOptimize(bootstrap_pvalue(in.pi, in.types, omega, cfg));
  state.counters["jN"] = compute_jn(in.pi, in.types, omega).jn;
}

}  // namespace

BENCHMARK(BM_Patches)->ArgsProduct({{4, 6}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Types)->ArgsProduct({{4, 5}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Bootstrap)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
