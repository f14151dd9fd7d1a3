#include <benchmark/benchmark.h>

#include <random>
#include <string>

#include "vlcurate/filterbank.hpp"

namespace {

vlcurate::Sample synthetic_sample(std::size_t response_chars, bool repetitive) {
    vlcurate::Sample s;
    s.id = "bench";
    s.prompt = "Describe the image in detail.";
    std::mt19937 rng(7);
    std::uniform_int_distribution<int> word_len(2, 9);
    std::uniform_int_distribution<int> letter('a', 'z');
    if (repetitive) {
        const std::string unit = "the background is mostly gray with a lot of text ";
        while (s.response.size() < response_chars) s.response += unit;
    } else {
        while (s.response.size() < response_chars) {
            const int n = word_len(rng);
            for (int i = 0; i < n; ++i) s.response.push_back(static_cast<char>(letter(rng)));
            s.response.push_back(' ');
        }
    }
    return s;
}

void BM_RepeatedSegmentClean(benchmark::State& state) {
    const auto sample = synthetic_sample(static_cast<std::size_t>(state.range(0)), false);
    const vlcurate::FilterConfig cfg;
    for (auto _ : state) {
        benchmark::DoNotOptimize(vlcurate::repeated_segment_filter(sample, cfg));
    }
    state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(sample.response.size()));
}
BENCHMARK(BM_RepeatedSegmentClean)->Arg(1 << 10)->Arg(1 << 14)->Arg(1 << 17);

void BM_RepeatedSegmentRepetitive(benchmark::State& state) {
    const auto sample = synthetic_sample(static_cast<std::size_t>(state.range(0)), true);
    const vlcurate::FilterConfig cfg;
    for (auto _ : state) {
        benchmark::DoNotOptimize(vlcurate::repeated_segment_filter(sample, cfg));
    }
}
BENCHMARK(BM_RepeatedSegmentRepetitive)->Arg(1 << 10)->Arg(1 << 14);

void BM_FrequentPhrase(benchmark::State& state) {
    const auto sample = synthetic_sample(static_cast<std::size_t>(state.range(0)), false);
    const vlcurate::FilterConfig cfg;
    for (auto _ : state) {
        benchmark::DoNotOptimize(vlcurate::frequent_phrase_filter(sample, cfg));
    }
}
BENCHMARK(BM_FrequentPhrase)->Arg(1 << 10)->Arg(1 << 14);

void BM_AbnormalChars(benchmark::State& state) {
    const auto sample = synthetic_sample(static_cast<std::size_t>(state.range(0)), false);
    const vlcurate::FilterConfig cfg;
    for (auto _ : state) {
        benchmark::DoNotOptimize(vlcurate::abnormal_char_filter(sample, cfg));
    }
}
BENCHMARK(BM_AbnormalChars)->Arg(1 << 14);

}  // namespace
