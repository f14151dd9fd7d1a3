#include <benchmark/benchmark.h>

#include <random>
#include <string>

#include "vlcurate/curriculum.hpp"
#include "vlcurate/scoring.hpp"
#include "vlcurate/textstats.hpp"

namespace {

vlcurate::DatasetManifest text_corpus(int samples) {
    vlcurate::DatasetManifest m;
    m.name = "bench";
    std::mt19937 rng(13);
    std::uniform_int_distribution<int> vocab(0, 999);
    std::uniform_int_distribution<int> len(4, 60);
    for (int i = 0; i < samples; ++i) {
        vlcurate::Sample s;
        s.id = "s" + std::to_string(i);
        s.prompt = "question " + std::to_string(i);
        const int n = len(rng);
        for (int w = 0; w < n; ++w) s.response += "word" + std::to_string(vocab(rng)) + " ";
        s.annotations.perplexity = 1.0 + (i % 17);
        m.samples.push_back(std::move(s));
    }
    return m;
}

void BM_AvgTtr(benchmark::State& state) {
    const auto m = text_corpus(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(vlcurate::avg_ttr(m));
    }
}
BENCHMARK(BM_AvgTtr)->Arg(100)->Arg(1000);

void BM_CalibrateWeights(benchmark::State& state) {
    vlcurate::RankedSubsets ranked;
    for (int i = 0; i < 5; ++i) ranked.entries.push_back({"d" + std::to_string(i), i + 1});
    std::vector<vlcurate::AxisScores> scores;
    std::mt19937 rng(29);
    std::uniform_real_distribution<double> score(0.0, 1.0);
    for (int i = 0; i < 5; ++i) scores.push_back({score(rng), score(rng), score(rng)});
    const double step = 1.0 / static_cast<double>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(vlcurate::calibrate_weights(ranked, scores, step));
    }
}
BENCHMARK(BM_CalibrateWeights)->Arg(20)->Arg(100);

void BM_PackBatches(benchmark::State& state) {
    std::vector<vlcurate::PackItem> items;
    std::mt19937 rng(31);
    std::uniform_int_distribution<int> tokens(16, 4000);
    for (int i = 0; i < state.range(0); ++i) {
        items.push_back({"s" + std::to_string(i), tokens(rng), {}});
    }
    const vlcurate::PackLimits limits;
    for (auto _ : state) {
        benchmark::DoNotOptimize(vlcurate::pack_batches(items, limits));
    }
}
BENCHMARK(BM_PackBatches)->Arg(1000)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
