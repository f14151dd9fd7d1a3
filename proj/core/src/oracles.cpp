#include "vlcurate/oracles.hpp"

#include <cmath>

#include "vlcurate/textstats.hpp"

namespace vlcurate {

UnigramPerplexityOracle::UnigramPerplexityOracle(const DatasetManifest& corpus) {
    for (const auto& s : corpus.samples) {
        for (const auto& token : tokenize(s.response)) {
            ++counts_[token];
            ++total_tokens_;
        }
    }
    vocab_size_ = static_cast<std::int64_t>(counts_.size());
}

std::optional<double> UnigramPerplexityOracle::perplexity(const Sample& sample) const {
    const auto tokens = tokenize(sample.response);
    if (tokens.empty()) return 1.0;

    // PPL = exp(-1/m sum log q(w)), q(w) = (c(w)+1) / (N+V).
    const double denom = static_cast<double>(total_tokens_ + vocab_size_);
    if (denom <= 0) return 1.0;
    double log_sum = 0.0;
    for (const auto& token : tokens) {
        const auto it = counts_.find(token);
        const double c = it == counts_.end() ? 0.0 : static_cast<double>(it->second);
        log_sum += std::log((c + 1.0) / denom);
    }
    return std::exp(-log_sum / static_cast<double>(tokens.size()));
}

std::optional<std::int64_t> AnnotationCountOracle::count(const Sample& sample) const {
    switch (kind_) {
        case CountKind::ocr_tokens: return sample.annotations.ocr_token_count;
        case CountKind::objects: return sample.annotations.object_count;
    }
    return std::nullopt;
}

}  // namespace vlcurate
