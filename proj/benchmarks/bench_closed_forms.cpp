#include "impulse/forex.hpp"
#include "impulse/labor.hpp"
#include "impulse/normal.hpp"
#include "impulse/rng.hpp"

#include <benchmark/benchmark.h>

using namespace impulse;

namespace {

void BM_NormalCdf(benchmark::State& state) {
    double x = -8.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(normal_cdf(x));
        x = x > 8.0 ? -8.0 : x + 1e-3;
    }
}
BENCHMARK(BM_NormalCdf);

void BM_NormalQuantile(benchmark::State& state) {
    double u = 1e-6;
    for (auto _ : state) {
        benchmark::DoNotOptimize(normal_quantile(u));
        u = u > 0.999 ? 1e-6 : u + 1e-4;
    }
}
BENCHMARK(BM_NormalQuantile);

void BM_ForexRExact(benchmark::State& state) {
    const ForexParams p;
    double x = -5.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(forex_r_exact(p, x, 5.066));
        x = x > 20.0 ? -5.0 : x + 1e-3;
    }
}
BENCHMARK(BM_ForexRExact);

void BM_LaborR(benchmark::State& state) {
    const LaborParams p;
    double xi = 0.5;
    for (auto _ : state) {
        benchmark::DoNotOptimize(labor_r(p, xi, 7.12));
        xi = xi > 50.0 ? 0.5 : xi * 1.001;
    }
}
BENCHMARK(BM_LaborR);

}  // namespace

BENCHMARK_MAIN();
