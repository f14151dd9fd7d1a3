#include "vlcurate/textstats.hpp"

#include <stdexcept>
#include <unordered_set>

#include "unicode.hpp"

namespace vlcurate {

std::vector<TokenSpan> tokenize_spans(const std::string& text) {
    std::vector<TokenSpan> tokens;
    std::size_t word_begin = std::string::npos;
    std::size_t pos = 0;
    const std::string_view view(text);
    const auto flush = [&](std::size_t end) {
        if (word_begin == std::string::npos) return;
        tokens.push_back({std::string(view.substr(word_begin, end - word_begin)), word_begin, end});
        word_begin = std::string::npos;
    };
    while (pos < view.size()) {
        const std::size_t start = pos;
        const char32_t cp = unicode::decode_next(view, pos);
        if (unicode::is_cjk(cp)) {
            flush(start);
            tokens.push_back({std::string(view.substr(start, pos - start)), start, pos});
        } else if (unicode::is_word(cp)) {
            if (word_begin == std::string::npos) word_begin = start;
        } else {
            flush(start);
        }
    }
    flush(view.size());
    return tokens;
}

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    for (auto& span : tokenize_spans(text)) tokens.push_back(std::move(span.text));
    return tokens;
}

double avg_token_length(const DatasetManifest& dataset) {
    if (dataset.samples.empty()) throw std::runtime_error("avg_token_length: empty dataset");
    double sum = 0.0;
    for (const auto& s : dataset.samples) {
        sum += static_cast<double>(tokenize(s.response).size());
    }
    return sum / static_cast<double>(dataset.samples.size());
}

TtrResult avg_ttr(const DatasetManifest& dataset) {
    if (dataset.samples.empty()) throw std::runtime_error("avg_ttr: empty dataset");
    TtrResult result;
    double sum = 0.0;
    for (const auto& s : dataset.samples) {
        const auto tokens = tokenize(s.prompt + " " + s.response);
        if (tokens.empty()) {
            result.skipped_ids.push_back(s.id);
            continue;
        }
        std::unordered_set<std::string_view> distinct(tokens.begin(), tokens.end());
        sum += static_cast<double>(distinct.size()) / static_cast<double>(tokens.size());
        ++result.used;
    }
    if (result.used == 0) {
        throw std::runtime_error("avg_ttr: every sample tokenized empty, metric undefined");
    }
    result.value = sum / static_cast<double>(result.used);
    return result;
}

double avg_perplexity(const DatasetManifest& dataset, const PerplexityOracle* lm) {
    if (dataset.samples.empty()) throw std::runtime_error("avg_perplexity: empty dataset");
    double sum = 0.0;
    for (const auto& s : dataset.samples) {
        std::optional<double> ppl = s.annotations.perplexity;
        if (!ppl && lm) ppl = lm->perplexity(s);
        if (!ppl) {
            throw std::runtime_error("sample '" + s.id + "': no perplexity annotation and no oracle");
        }
        sum += *ppl;
    }
    return sum / static_cast<double>(dataset.samples.size());
}

double text_score(double norm_token_length, double norm_ttr, double norm_perplexity) {
    for (const double v : {norm_token_length, norm_ttr, norm_perplexity}) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw std::runtime_error("text_score: normalized input outside [0,1]");
        }
    }
    return (norm_token_length + norm_ttr + norm_perplexity) / 3.0;
}

TextMetrics text_metrics(const DatasetManifest& dataset, const PerplexityOracle* lm) {
    TextMetrics metrics;
    metrics.avg_token_length = avg_token_length(dataset);
    metrics.avg_ttr = avg_ttr(dataset).value;
    metrics.avg_perplexity = avg_perplexity(dataset, lm);
    metrics.n = dataset.samples.size();
    if (!(metrics.avg_ttr > 0.0 && metrics.avg_ttr <= 1.0) || metrics.avg_perplexity < 1.0) {
        throw std::runtime_error("text metrics violate their bounds");
    }
    return metrics;
}

}  // namespace vlcurate
