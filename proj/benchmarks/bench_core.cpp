#include <benchmark/benchmark.h>

#include "rms/agent.hpp"
#include "rms/backends.hpp"
#include "rms/synth.hpp"
#include "rms/verifier.hpp"
#include "rms/world.hpp"

namespace {

using namespace rms;

const World& bench_world() {
  static const World w = [] {
    WorldSpec spec;
    spec.seed = 7;
    return generate_world(spec);
  }();
  return w;
}

void BM_GenerateWorld(benchmark::State& state) {
  WorldSpec spec;
  spec.n_apps = static_cast<int>(state.range(0));
  for (auto _ : state) {
    ++spec.seed;
    benchmark::DoNotOptimize(generate_world(spec));
  }
  state.SetItemsProcessed(state.iterations() * spec.n_apps * spec.n_tasks_per_app);
}
BENCHMARK(BM_GenerateWorld)->Arg(5)->Arg(20);

void BM_Verify(benchmark::State& state) {
  const World& w = bench_world();
  const ScriptedAgent agent({0.1, 0.3, 0.1, 0.1, 0.1}, 1);
  const bool eok = state.range(0) != 0;
  std::vector<std::tuple<StepContext, const StepGroundTruth*, Action, const EokGraph*>> cases;
  for (std::size_t k = 0; k < w.trajectories.size(); ++k) {
    const auto& t = w.trajectories[k];
    for (std::size_t i = 0; i < t.size(); ++i) {
      auto ctx = gt_context(t, i);
      auto a = agent.propose(ctx, t.steps[i].ground_truth);
      cases.emplace_back(std::move(ctx), &t.steps[i].ground_truth, std::move(a), eok ? &w.eok[k] : nullptr);
    }
  }
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& [ctx, gt, a, g] = cases[i++ % cases.size()];
    benchmark::DoNotOptimize(verify(ctx, *gt, a, g));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Verify)->Arg(0)->Arg(1);

void BM_OracleDs(benchmark::State& state) {
  const World& w = bench_world();
  const OracleDsBackend ds(w);
  const auto& t = w.trajectories[3];
  const DsInput in{gt_context(t, 1), Action::click(0.01, 0.99)};
  for (auto _ : state) benchmark::DoNotOptimize(ds.ds_evaluate(in));
}
BENCHMARK(BM_OracleDs);

void BM_SynthesizeDataset(benchmark::State& state) {
  const World& w = bench_world();
  const auto catalog = InstructionCatalog::from_world(w);
  SynthConfig cfg;
  cfg.total_samples = static_cast<std::size_t>(state.range(0));
  cfg.workers = 1;
  for (auto _ : state) {
    ++cfg.seed;
    benchmark::DoNotOptimize(synthesize_dataset(w, catalog, cfg));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SynthesizeDataset)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
