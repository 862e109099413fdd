#include "impulse/forex.hpp"
#include "impulse/labor.hpp"
#include "impulse/rng.hpp"
#include "impulse/simulator.hpp"

#include <benchmark/benchmark.h>

using namespace impulse;

namespace {

void BM_PhiloxNormalPair(benchmark::State& state) {
    const Philox4x32 rng(20240611);
    std::uint64_t step = 0;
    for (auto _ : state) benchmark::DoNotOptimize(normal_pair(rng, step++, 7, 0));
    state.SetItemsProcessed(2 * state.iterations());
}
BENCHMARK(BM_PhiloxNormalPair);

// Paths per second of the threshold policy at the optimum; range(0) is the worker count.
void BM_SimulateThreshold(benchmark::State& state) {
    ForexParams p;
    const auto fx = build_forex(p);
    const ThresholdProblem problem(fx.model, fx.cost);
    SimConfig cfg;
    cfg.n_paths = 2000;
    cfg.dt = 0.01;
    cfg.horizon = 60.0;
    cfg.threads = static_cast<unsigned>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(simulate_threshold(problem, {5.066, 12.1756}, 0.0, cfg));
    state.SetItemsProcessed(static_cast<std::int64_t>(cfg.n_paths) * state.iterations());
}
BENCHMARK(BM_SimulateThreshold)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_SimulateBand(benchmark::State& state) {
    LaborParams p;
    const auto lm = build_labor(p);
    const BandProblem problem(lm.model, lm.cost);
    SimConfig cfg;
    cfg.n_paths = 500;
    cfg.dt = 0.05;
    cfg.horizon = 300.0;
    cfg.threads = static_cast<unsigned>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(simulate_band(problem, {1.0655, 2.1172, 7.1082, 36.6399}, 10.0, cfg));
    state.SetItemsProcessed(static_cast<std::int64_t>(cfg.n_paths) * state.iterations());
}
BENCHMARK(BM_SimulateBand)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_DelayedCostOracle(benchmark::State& state) {
    ForexParams p;
    const auto fx = build_forex(p);
    const ThresholdProblem problem(fx.model, fx.cost);
    SimConfig cfg;
    cfg.n_paths = 100000;
    cfg.threads = 1;
    for (auto _ : state) benchmark::DoNotOptimize(mc_delayed_cost(problem, 12.0, 5.0, cfg));
    state.SetItemsProcessed(static_cast<std::int64_t>(cfg.n_paths) * state.iterations());
}
BENCHMARK(BM_DelayedCostOracle)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
