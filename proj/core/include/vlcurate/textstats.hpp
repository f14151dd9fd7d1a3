#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "vlcurate/manifest.hpp"
#include "vlcurate/oracles.hpp"

namespace vlcurate {

/// Splits text on word boundaries: runs of letters/digits/underscore form
/// tokens, CJK ideographs and kana are one token per codepoint, everything
/// else (whitespace, punctuation, symbols) separates. Case-sensitive and
/// deterministic; empty text gives an empty list.
std::vector<std::string> tokenize(const std::string& text);

/// tokenize with byte ranges: token i spans [begin, end) of the input.
struct TokenSpan {
    std::string text;
    std::size_t begin = 0;
    std::size_t end = 0;
};
std::vector<TokenSpan> tokenize_spans(const std::string& text);

/// The three textual complexity metrics of one dataset.
struct TextMetrics {
    double avg_token_length = 0.0;  ///< mean response token count
    double avg_ttr = 0.0;           ///< mean type-token ratio of prompt+response
    double avg_perplexity = 1.0;    ///< mean PPL(response | prompt)
    std::size_t n = 0;
};

/// Mean token count of the responses. Empty responses count as 0 tokens.
double avg_token_length(const DatasetManifest& dataset);

struct TtrResult {
    double value = 0.0;
    std::size_t used = 0;                   ///< samples entering the average
    std::vector<std::string> skipped_ids;   ///< samples whose prompt+response tokenized empty
};

/// Mean type-token ratio over tokenize(prompt + " " + response) per sample.
/// Samples with no tokens are skipped and reported; throws if every sample
/// is skipped (the metric would be undefined).
TtrResult avg_ttr(const DatasetManifest& dataset);

/// Mean PPL(response | prompt). Annotation wins over the oracle; a sample
/// with neither throws, naming the sample.
double avg_perplexity(const DatasetManifest& dataset, const PerplexityOracle* lm = nullptr);

/// Arithmetic mean of the three normalized text metrics; inputs must be in [0,1].
double text_score(double norm_token_length, double norm_ttr, double norm_perplexity);

/// All three raw text metrics of one dataset, invariants checked.
TextMetrics text_metrics(const DatasetManifest& dataset, const PerplexityOracle* lm = nullptr);

}  // namespace vlcurate
