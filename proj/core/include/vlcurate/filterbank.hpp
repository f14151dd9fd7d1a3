#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "vlcurate/manifest.hpp"

namespace vlcurate {

/// Thresholds for the filtering pipeline. All values are toolkit defaults,
/// exposed in config because no canonical numbers exist for them.
struct FilterConfig {
    double max_abnormal_char_ratio = 0.1;
    std::vector<std::string> keyword_blocklist;
    int min_repeat_segment_chars = 20;
    int min_segment_occurrences = 3;
    std::pair<int, int> phrase_ngram_range{1, 4};
    double max_phrase_token_share = 0.3;
    bool judge_required = false;
};

void validate_filter_config(const FilterConfig& cfg);
FilterConfig filter_config_from_json(const std::string& json_text);
std::string filter_config_to_json(const FilterConfig& cfg);
FilterConfig load_filter_config(const std::string& path);

/// Plain-text blocklist, one keyword per line; blank lines skipped.
std::vector<std::string> load_blocklist(const std::string& path);

struct FilterReason {
    std::string rule;
    std::string evidence;  ///< substring of the sample's text
    double value = 0;      ///< the measured quantity that tripped the rule
};

struct FilterVerdict {
    std::string id;
    bool keep = true;
    std::vector<FilterReason> reasons;  ///< rejection reasons, or notes on keeps
};

/// Rejects on too many control/format/private-use characters in
/// prompt+response, or on any blocklisted keyword (case-insensitive).
FilterVerdict abnormal_char_filter(const Sample& sample, const FilterConfig& cfg);

/// Rejects when some substring of length >= min_repeat_segment_chars occurs
/// at least min_segment_occurrences times in the response, counting
/// non-overlapping occurrences. Rolling-hash candidates, exact confirmation.
FilterVerdict repeated_segment_filter(const Sample& sample, const FilterConfig& cfg);

/// Rejects when a single word n-gram (n in phrase_ngram_range) that occurs
/// at least twice accounts for more than max_phrase_token_share of the
/// response's n-grams.
FilterVerdict frequent_phrase_filter(const Sample& sample, const FilterConfig& cfg);

/// Rejects on judge verdicts flagging incoherence or hallucination. Missing
/// verdicts throw when judge_required, otherwise keep with a note.
FilterVerdict judge_filter(const Sample& sample, const FilterConfig& cfg);

struct FilterReport {
    std::string dataset;
    std::size_t total = 0;
    std::size_t kept = 0;
    std::map<std::string, std::size_t> rule_counts;
    std::vector<FilterVerdict> rejections;
    std::vector<FilterVerdict> noted_keeps;  ///< keeps carrying informational notes
};

struct FilterOutcome {
    DatasetManifest kept;
    FilterReport report;
};

/// Applies the filters in order (heuristic, repetition, phrase, judge),
/// short-circuiting per sample on the first rejection. The kept manifest
/// preserves input order; kept and rejected ids partition the input.
FilterOutcome run_pipeline(const DatasetManifest& manifest, const FilterConfig& cfg);

std::string filter_report_to_json(const FilterReport& report, const FilterConfig& cfg);

}  // namespace vlcurate
