#include <benchmark/benchmark.h>

#include "parametrix/diagnostics.hpp"
#include "parametrix/local_time_family.hpp"
#include "parametrix/parametrix_engine.hpp"
#include "parametrix/running_max_family.hpp"

using namespace parametrix;

namespace {

EngineOptions serial() {
    EngineOptions o;
    o.threads = 1;
    return o;
}

}  // namespace

// One pointwise first-order term; no tables are involved at this order.
static void BM_FirstOrderTermLocalTime(benchmark::State& state) {
    Expansion<LocalTimeFamily> ex(LocalTimeFamily(build_field(sin_spec(0.25))), {1.0, 0.0}, 0.25, serial());
    for (auto _ : state) benchmark::DoNotOptimize(ex.term(1, 0.25, {-0.5, 0.3}).value);
}
BENCHMARK(BM_FirstOrderTermLocalTime)->Unit(benchmark::kMillisecond);

static void BM_FirstOrderTermMax(benchmark::State& state) {
    Expansion<RunningMaxFamily> ex(RunningMaxFamily(build_field(sin_spec(0.25))), {0.0, 0.0}, 0.25, serial());
    for (auto _ : state) benchmark::DoNotOptimize(ex.term(1, 0.25, {0.2, 0.5}).value);
}
BENCHMARK(BM_FirstOrderTermMax)->Unit(benchmark::kMillisecond);

static void BM_SmoothingIntegral(benchmark::State& state) {
    Expansion<LocalTimeFamily> ex(LocalTimeFamily(build_field(sin_spec(0.25))), {0.5, 0.0}, 1.0, serial());
    for (auto _ : state) benchmark::DoNotOptimize(ex.smoothing_integral(0.05, {0.5, 0.0}));
}
BENCHMARK(BM_SmoothingIntegral)->Unit(benchmark::kMillisecond);

static void BM_PassageConvolution(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(passage_convolution(1.0, 0.3, 0.5));
}
BENCHMARK(BM_PassageConvolution);

static void BM_BetaIntegral(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(check_beta_integral(n, 0.5, -0.3, 1.0).numeric);
}
BENCHMARK(BM_BetaIntegral)->DenseRange(1, 3)->Unit(benchmark::kMillisecond);
