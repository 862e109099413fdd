#include "impulse/forex.hpp"
#include "impulse/labor.hpp"

#include <benchmark/benchmark.h>

using namespace impulse;

namespace {

ThresholdProblem forex_problem(double delay) {
    ForexParams p;
    p.delay = delay;
    const auto fx = build_forex(p);
    return ThresholdProblem(fx.model, fx.cost);
}

BandProblem labor_problem(double delay) {
    LaborParams p;
    p.delay = delay;
    const auto lm = build_labor(p);
    return BandProblem(lm.model, lm.cost);
}

void BM_ForexSolveBGivenA(benchmark::State& state) {
    const auto problem = forex_problem(1.0);
    for (auto _ : state) benchmark::DoNotOptimize(problem.solve_b_given_a(5.066));
}
BENCHMARK(BM_ForexSolveBGivenA);

void BM_ForexOptimize(benchmark::State& state) {
    const auto problem = forex_problem(static_cast<double>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(optimize_threshold(problem));
}
BENCHMARK(BM_ForexOptimize)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_ForexGammaOracle(benchmark::State& state) {
    const auto problem = forex_problem(1.0);
    for (auto _ : state) benchmark::DoNotOptimize(problem.gamma_fixed_point_oracle(5.066));
}
BENCHMARK(BM_ForexGammaOracle)->Unit(benchmark::kMillisecond);

void BM_LaborSolvePd(benchmark::State& state) {
    const auto problem = labor_problem(0.5);
    for (auto _ : state) benchmark::DoNotOptimize(problem.solve_pd_given_qc(2.1, 7.12));
}
BENCHMARK(BM_LaborSolvePd)->Unit(benchmark::kMicrosecond);

void BM_LaborSolvePdWarm(benchmark::State& state) {
    const auto problem = labor_problem(0.5);
    const auto cold = problem.solve_pd_given_qc(2.1, 7.12);
    for (auto _ : state) benchmark::DoNotOptimize(problem.solve_pd_given_qc(2.1, 7.13, std::pair{cold.p, cold.d}));
}
BENCHMARK(BM_LaborSolvePdWarm)->Unit(benchmark::kMicrosecond);

void BM_LaborOptimize(benchmark::State& state) {
    const auto problem = labor_problem(0.5);
    for (auto _ : state) benchmark::DoNotOptimize(optimize_band(problem));
}
BENCHMARK(BM_LaborOptimize)->Unit(benchmark::kMillisecond)->Iterations(3);

}  // namespace

BENCHMARK_MAIN();
