#include <benchmark/benchmark.h>

#include <vector>

#include "gai/baselines.hpp"
#include "gai/core.hpp"
#include "gai/power.hpp"
#include "gai/random.hpp"
#include "gai/rules.hpp"
#include "gai/simlab.hpp"

namespace {

using namespace gai;

std::vector<double> stream_pvalues(std::size_t n, std::uint64_t seed) {
  StreamConfig cfg;
  cfg.n = n;
  cfg.pi1 = 0.1;
  cfg.effect = EffectModel::exponential(3.0);
  return generate_stream(cfg, seed).pvalues;
}

// Cost per step of a full replay, by rule.
void BM_RuleStep(benchmark::State& state, const char* id) {
  RuleSpec spec;
  spec.id = id;
  if (spec.id == "fdx_lord") spec.params = FdxLord::default_params(0.05, 0.15);
  const auto factory = rule_factory(spec);
  const auto p = stream_pvalues(10000, 3);
  for (auto _ : state) benchmark::DoNotOptimize(replay_decisions(factory, p));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(p.size()));
}
BENCHMARK_CAPTURE(BM_RuleStep, lord, "lord");
BENCHMARK_CAPTURE(BM_RuleStep, ai, "ai");
BENCHMARK_CAPTURE(BM_RuleStep, ero_ai, "ero_ai");
BENCHMARK_CAPTURE(BM_RuleStep, asr, "asr");
BENCHMARK_CAPTURE(BM_RuleStep, bonferroni, "bonferroni");
BENCHMARK_CAPTURE(BM_RuleStep, dep_lord, "dep_lord");
BENCHMARK_CAPTURE(BM_RuleStep, fdx_lord, "fdx_lord");

void BM_Bh(benchmark::State& state) {
  const auto p = stream_pvalues(static_cast<std::size_t>(state.range(0)), 4);
  for (auto _ : state) benchmark::DoNotOptimize(bh(p, 0.05));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Bh)->RangeMultiplier(10)->Range(1000, 1000000)->Complexity(benchmark::oNLogN);

void BM_OptimalGamma(benchmark::State& state) {
  const MixtureMarginal G(0.2, AlternativeModel::gaussian(3.0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(optimal_gamma(G, 0.045, static_cast<std::size_t>(state.range(0))));
  }
}
BENCHMARK(BM_OptimalGamma)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_GenerateStream(benchmark::State& state) {
  StreamConfig cfg;
  cfg.n = static_cast<std::size_t>(state.range(0));
  cfg.pi1 = 0.1;
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(generate_stream(cfg, ++seed));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GenerateStream)->Arg(3000)->Arg(20000);

}  // namespace

BENCHMARK_MAIN();
