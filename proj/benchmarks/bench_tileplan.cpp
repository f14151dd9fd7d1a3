#include <benchmark/benchmark.h>

#include "vlcurate/tileplan.hpp"

namespace {

void BM_SnapDims(benchmark::State& state) {
    const vlcurate::ResolutionConfig cfg;
    int w = 1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(vlcurate::snap_dims(w, 2000 - (w % 1999), cfg));
        w = w % 1999 + 1;
    }
}
BENCHMARK(BM_SnapDims);

void BM_PlanTiles(benchmark::State& state) {
    const vlcurate::ResolutionConfig cfg;
    const int w = static_cast<int>(state.range(0));
    const int h = static_cast<int>(state.range(1));
    for (auto _ : state) {
        benchmark::DoNotOptimize(vlcurate::plan_tiles(w, h, cfg));
    }
}
BENCHMARK(BM_PlanTiles)->Args({940, 479})->Args({384, 384})->Args({1920, 1080})->Args({4000, 3000});

void BM_CompareSchemes(benchmark::State& state) {
    const vlcurate::ResolutionConfig cfg;
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            vlcurate::compare_schemes(940, 479, cfg, vlcurate::Scheme::fixed_multiple_grid));
    }
}
BENCHMARK(BM_CompareSchemes);

}  // namespace
