#include "vlcurate/filterbank.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "ioutil.hpp"
#include "unicode.hpp"
#include "vlcurate/textstats.hpp"

namespace vlcurate {

using nlohmann::json;

namespace {

constexpr const char* kRuleAbnormalChars = "abnormal_chars";
constexpr const char* kRuleKeyword = "keyword";
constexpr const char* kRuleRepeatedSegment = "repeated_segment";
constexpr const char* kRuleFrequentPhrase = "frequent_phrase";
constexpr const char* kRuleJudgeIncoherent = "judge_incoherent";
constexpr const char* kRuleJudgeHallucination = "judge_hallucination";
constexpr const char* kRuleJudgeSkipped = "judge_skipped";

// Prefix of `text` of at most `max_bytes`, cut at a codepoint boundary.
std::string snippet(const std::string& text, std::size_t max_bytes = 48) {
    if (text.size() <= max_bytes) return text;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t next = pos;
        unicode::decode_next(text, next);
        if (next > max_bytes) break;
        pos = next;
    }
    return text.substr(0, pos);
}

}  // namespace

void validate_filter_config(const FilterConfig& cfg) {
    if (!(cfg.max_abnormal_char_ratio >= 0.0 && cfg.max_abnormal_char_ratio <= 1.0)) {
        throw std::runtime_error("filter config: max_abnormal_char_ratio must be in [0,1]");
    }
    if (cfg.min_repeat_segment_chars < 2) {
        throw std::runtime_error("filter config: min_repeat_segment_chars must be >= 2");
    }
    if (cfg.min_segment_occurrences < 2) {
        throw std::runtime_error("filter config: min_segment_occurrences must be >= 2");
    }
    if (cfg.phrase_ngram_range.first < 1 || cfg.phrase_ngram_range.first > cfg.phrase_ngram_range.second) {
        throw std::runtime_error("filter config: invalid phrase_ngram_range");
    }
    if (!(cfg.max_phrase_token_share > 0.0 && cfg.max_phrase_token_share <= 1.0)) {
        throw std::runtime_error("filter config: max_phrase_token_share must be in (0,1]");
    }
}

FilterVerdict abnormal_char_filter(const Sample& sample, const FilterConfig& cfg) {
    FilterVerdict verdict;
    verdict.id = sample.id;

    std::size_t abnormal = 0, total = 0;
    std::size_t first_abnormal = std::string::npos;
    const std::string* first_field = nullptr;
    for (const std::string* field : {&sample.prompt, &sample.response}) {
        std::size_t pos = 0;
        while (pos < field->size()) {
            const std::size_t start = pos;
            const char32_t cp = unicode::decode_next(*field, pos);
            ++total;
            if (unicode::is_abnormal(cp)) {
                ++abnormal;
                if (!first_field) {
                    first_field = field;
                    first_abnormal = start;
                }
            }
        }
    }
    if (total > 0) {
        const double ratio = static_cast<double>(abnormal) / static_cast<double>(total);
        if (ratio > cfg.max_abnormal_char_ratio) {
            verdict.keep = false;
            verdict.reasons.push_back(
                {kRuleAbnormalChars, snippet(first_field->substr(first_abnormal)), ratio});
        }
    }

    for (const auto& keyword : cfg.keyword_blocklist) {
        if (keyword.empty()) continue;
        const std::string needle = unicode::ascii_lower(keyword);
        for (const std::string* field : {&sample.prompt, &sample.response}) {
            const std::string haystack = unicode::ascii_lower(*field);
            const auto at = haystack.find(needle);
            if (at != std::string::npos) {
                verdict.keep = false;
                verdict.reasons.push_back({kRuleKeyword, field->substr(at, needle.size()), 1.0});
                break;
            }
        }
        if (!verdict.keep && verdict.reasons.back().rule == kRuleKeyword) break;
    }
    return verdict;
}

FilterVerdict repeated_segment_filter(const Sample& sample, const FilterConfig& cfg) {
    FilterVerdict verdict;
    verdict.id = sample.id;
    const std::string& text = sample.response;
    const std::size_t m = static_cast<std::size_t>(cfg.min_repeat_segment_chars);
    if (text.size() < m * static_cast<std::size_t>(cfg.min_segment_occurrences)) return verdict;

    // Rolling polynomial hash over every length-m window. First pass counts
    // window hashes; only hashes seen often enough get their positions
    // collected, then exact comparison confirms before counting
    // non-overlapping occurrences greedily left to right.
    constexpr std::uint64_t kBase = 1000003ULL;
    std::uint64_t power = 1;
    for (std::size_t i = 0; i + 1 < m; ++i) power *= kBase;

    const auto each_window = [&](auto&& fn) {
        std::uint64_t hash = 0;
        for (std::size_t i = 0; i < text.size(); ++i) {
            hash = hash * kBase + static_cast<unsigned char>(text[i]);
            if (i + 1 >= m) {
                const std::size_t start = i + 1 - m;
                fn(hash, start);
                hash -= power * static_cast<unsigned char>(text[start]);
            }
        }
    };

    std::unordered_map<std::uint64_t, std::uint32_t> freq;
    freq.reserve(text.size());
    each_window([&](std::uint64_t hash, std::size_t) { ++freq[hash]; });

    std::unordered_map<std::uint64_t, std::vector<std::size_t>> buckets;
    each_window([&](std::uint64_t hash, std::size_t start) {
        if (freq[hash] >= static_cast<std::uint32_t>(cfg.min_segment_occurrences)) {
            buckets[hash].push_back(start);
        }
    });

    std::vector<const std::vector<std::size_t>*> candidates;
    for (const auto& [h, positions] : buckets) candidates.push_back(&positions);
    std::sort(candidates.begin(), candidates.end(),
              [](const auto* a, const auto* b) { return a->front() < b->front(); });

    for (const auto* positions : candidates) {
        // A bucket can mix distinct substrings on hash collision; group them.
        std::vector<std::size_t> remaining = *positions;
        while (remaining.size() >= static_cast<std::size_t>(cfg.min_segment_occurrences)) {
            const std::string_view segment(text.data() + remaining.front(), m);
            std::vector<std::size_t> matched, rest;
            for (const std::size_t p : remaining) {
                if (std::string_view(text.data() + p, m) == segment) matched.push_back(p);
                else rest.push_back(p);
            }
            std::size_t count = 0;
            std::size_t next_free = 0;
            for (const std::size_t p : matched) {
                if (p >= next_free) {
                    ++count;
                    next_free = p + m;
                }
            }
            if (count >= static_cast<std::size_t>(cfg.min_segment_occurrences)) {
                verdict.keep = false;
                verdict.reasons.push_back(
                    {kRuleRepeatedSegment, std::string(segment), static_cast<double>(count)});
                return verdict;
            }
            remaining = std::move(rest);
        }
    }
    return verdict;
}

FilterVerdict frequent_phrase_filter(const Sample& sample, const FilterConfig& cfg) {
    FilterVerdict verdict;
    verdict.id = sample.id;
    const auto tokens = tokenize_spans(sample.response);
    if (tokens.empty()) return verdict;

    for (int n = cfg.phrase_ngram_range.first; n <= cfg.phrase_ngram_range.second; ++n) {
        if (static_cast<std::size_t>(n) > tokens.size()) break;
        const std::size_t total = tokens.size() - static_cast<std::size_t>(n) + 1;

        std::unordered_map<std::string, std::pair<std::size_t, std::size_t>> grams;  // key -> (count, first pos)
        for (std::size_t i = 0; i < total; ++i) {
            std::string key;
            for (std::size_t k = 0; k < static_cast<std::size_t>(n); ++k) {
                if (k > 0) key.push_back('\x1F');
                key += tokens[i + k].text;
            }
            auto [it, inserted] = grams.emplace(key, std::make_pair(std::size_t{0}, i));
            ++it->second.first;
        }

        // A phrase is only "frequent" if it actually repeats; a one-off
        // n-gram in a short response is not repetition.
        std::size_t best_count = 0;
        std::size_t best_pos = 0;
        for (const auto& [key, info] : grams) {
            const auto [count, first_pos] = info;
            if (count < 2) continue;
            if (count > best_count || (count == best_count && first_pos < best_pos)) {
                best_count = count;
                best_pos = first_pos;
            }
        }
        if (best_count == 0) continue;
        const double share = static_cast<double>(best_count) / static_cast<double>(total);
        if (share > cfg.max_phrase_token_share) {
            const auto& first = tokens[best_pos];
            const auto& last = tokens[best_pos + static_cast<std::size_t>(n) - 1];
            verdict.keep = false;
            verdict.reasons.push_back(
                {kRuleFrequentPhrase, sample.response.substr(first.begin, last.end - first.begin), share});
            return verdict;
        }
    }
    return verdict;
}

FilterVerdict judge_filter(const Sample& sample, const FilterConfig& cfg) {
    FilterVerdict verdict;
    verdict.id = sample.id;
    const auto& judge = sample.annotations.judge_verdict;
    if (!judge) {
        if (cfg.judge_required) {
            throw std::runtime_error("sample '" + sample.id +
                                     "': judge verdict required but not annotated");
        }
        verdict.reasons.push_back({kRuleJudgeSkipped, "", 0.0});
        return verdict;
    }
    const std::string& source = sample.response.empty() ? sample.prompt : sample.response;
    if (!judge->coherent) {
        verdict.keep = false;
        verdict.reasons.push_back({kRuleJudgeIncoherent, snippet(source), 1.0});
    }
    if (judge->hallucination) {
        verdict.keep = false;
        verdict.reasons.push_back({kRuleJudgeHallucination, snippet(source), 1.0});
    }
    return verdict;
}

FilterOutcome run_pipeline(const DatasetManifest& manifest, const FilterConfig& cfg) {
    validate_filter_config(cfg);
    validate_manifest(manifest);

    FilterOutcome outcome;
    outcome.kept.name = manifest.name;
    outcome.kept.category = manifest.category;
    outcome.kept.source_note = manifest.source_note;
    outcome.report.dataset = manifest.name;
    outcome.report.total = manifest.samples.size();

    using Stage = FilterVerdict (*)(const Sample&, const FilterConfig&);
    constexpr Stage stages[] = {abnormal_char_filter, repeated_segment_filter,
                                frequent_phrase_filter, judge_filter};

    for (const auto& sample : manifest.samples) {
        FilterVerdict verdict;
        bool rejected = false;
        std::vector<FilterReason> notes;
        for (const Stage stage : stages) {
            verdict = stage(sample, cfg);
            if (!verdict.keep) {
                rejected = true;
                break;
            }
            for (auto& reason : verdict.reasons) notes.push_back(std::move(reason));
        }
        if (rejected) {
            for (const auto& reason : verdict.reasons) ++outcome.report.rule_counts[reason.rule];
            outcome.report.rejections.push_back(std::move(verdict));
        } else {
            outcome.kept.samples.push_back(sample);
            ++outcome.report.kept;
            if (!notes.empty()) {
                FilterVerdict kept_verdict;
                kept_verdict.id = sample.id;
                kept_verdict.reasons = std::move(notes);
                outcome.report.noted_keeps.push_back(std::move(kept_verdict));
            }
        }
    }
    return outcome;
}

FilterConfig filter_config_from_json(const std::string& json_text) {
    const json j = json::parse(json_text);
    FilterConfig cfg;
    cfg.max_abnormal_char_ratio = j.value("max_abnormal_char_ratio", cfg.max_abnormal_char_ratio);
    if (j.contains("keyword_blocklist")) {
        cfg.keyword_blocklist = j.at("keyword_blocklist").get<std::vector<std::string>>();
    }
    cfg.min_repeat_segment_chars = j.value("min_repeat_segment_chars", cfg.min_repeat_segment_chars);
    cfg.min_segment_occurrences = j.value("min_segment_occurrences", cfg.min_segment_occurrences);
    if (j.contains("phrase_ngram_range")) {
        const auto range = j.at("phrase_ngram_range").get<std::vector<int>>();
        if (range.size() != 2) throw std::runtime_error("filter config: phrase_ngram_range needs [lo, hi]");
        cfg.phrase_ngram_range = {range[0], range[1]};
    }
    cfg.max_phrase_token_share = j.value("max_phrase_token_share", cfg.max_phrase_token_share);
    cfg.judge_required = j.value("judge_required", cfg.judge_required);
    validate_filter_config(cfg);
    return cfg;
}

std::string filter_config_to_json(const FilterConfig& cfg) {
    json j;
    j["max_abnormal_char_ratio"] = cfg.max_abnormal_char_ratio;
    j["keyword_blocklist"] = cfg.keyword_blocklist;
    j["min_repeat_segment_chars"] = cfg.min_repeat_segment_chars;
    j["min_segment_occurrences"] = cfg.min_segment_occurrences;
    j["phrase_ngram_range"] = {cfg.phrase_ngram_range.first, cfg.phrase_ngram_range.second};
    j["max_phrase_token_share"] = cfg.max_phrase_token_share;
    j["judge_required"] = cfg.judge_required;
    return j.dump(2);
}

FilterConfig load_filter_config(const std::string& path) {
    return filter_config_from_json(io::read_file(path));
}

std::vector<std::string> load_blocklist(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open blocklist: " + path);
    std::vector<std::string> keywords;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) keywords.push_back(line);
    }
    return keywords;
}

namespace {

json verdict_to_json(const FilterVerdict& v) {
    json reasons = json::array();
    for (const auto& r : v.reasons) {
        reasons.push_back({{"rule", r.rule}, {"evidence", r.evidence}, {"value", r.value}});
    }
    return json{{"id", v.id}, {"decision", v.keep ? "keep" : "reject"}, {"reasons", reasons}};
}

}  // namespace

std::string filter_report_to_json(const FilterReport& report, const FilterConfig& cfg) {
    json j;
    j["dataset"] = report.dataset;
    j["total"] = report.total;
    j["kept"] = report.kept;
    j["rejected"] = report.total - report.kept;
    json counts = json::object();
    for (const auto& [rule, count] : report.rule_counts) counts[rule] = count;
    j["rule_counts"] = counts;
    json rejections = json::array();
    for (const auto& v : report.rejections) rejections.push_back(verdict_to_json(v));
    j["rejections"] = rejections;
    json notes = json::array();
    for (const auto& v : report.noted_keeps) notes.push_back(verdict_to_json(v));
    j["noted_keeps"] = notes;
    j["config"] = json::parse(filter_config_to_json(cfg));
    return j.dump(2);
}

}  // namespace vlcurate
