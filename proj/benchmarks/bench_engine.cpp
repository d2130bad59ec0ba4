#include <benchmark/benchmark.h>

#include "hcmon/dsl.hpp"
#include "hcmon/engine.hpp"
#include "hcmon/rulepack.hpp"
#include "hcmon/scenario.hpp"

using namespace hcmon;

namespace {

void BM_BatchSimulationPack(benchmark::State& state) {
  const Scenario sc = generate(preset("safe"));
  const dsl::Plan plan = dsl::compile_text(rulepack::simulation_pack());
  EvalConfig cfg;
  cfg.map = &sc.map;
  cfg.profile = default_profiles().get("nominal");
  for (auto _ : state) benchmark::DoNotOptimize(evaluate(plan, sc.trace, cfg));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(sc.trace.steps.size()));
}
BENCHMARK(BM_BatchSimulationPack);

void BM_StreamRuntimePack(benchmark::State& state) {
  const Scenario sc = generate(preset("occlusion_abort"));
  const dsl::Plan plan = dsl::compile_text(rulepack::runtime_pack());
  EvalConfig cfg;
  cfg.map = &sc.map;
  cfg.profile = default_profiles().get("nominal");
  cfg.speed_policy = SpeedPolicy::worst_case;
  for (auto _ : state) {
    StreamingEngine eng(plan, cfg);
    std::size_t n = 0;
    for (const auto& s : sc.trace.steps) n += eng.push(s).size();
    n += eng.finish().size();
    benchmark::DoNotOptimize(n);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(sc.trace.steps.size()));
}
BENCHMARK(BM_StreamRuntimePack);

void BM_CompileSimulationPack(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(dsl::compile_text(rulepack::simulation_pack()));
}
BENCHMARK(BM_CompileSimulationPack);

}  // namespace

BENCHMARK_MAIN();
