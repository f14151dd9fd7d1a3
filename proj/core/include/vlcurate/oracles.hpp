#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>

#include "vlcurate/manifest.hpp"

namespace vlcurate {

/// Pluggable provider of PPL(response | prompt) for samples that carry no
/// sidecar annotation. Implementations must be deterministic.
class PerplexityOracle {
public:
    virtual ~PerplexityOracle() = default;
    virtual std::optional<double> perplexity(const Sample& sample) const = 0;
};

/// Add-one-smoothed unigram model fit on a dataset's own responses.
/// Dependency-free stand-in for a neural language model; equal inputs give
/// bitwise-equal outputs.
class UnigramPerplexityOracle : public PerplexityOracle {
public:
    explicit UnigramPerplexityOracle(const DatasetManifest& corpus);

    std::optional<double> perplexity(const Sample& sample) const override;

private:
    std::unordered_map<std::string, std::int64_t> counts_;
    std::int64_t total_tokens_ = 0;
    std::int64_t vocab_size_ = 0;
};

enum class CountKind { ocr_tokens, objects };

/// Pluggable provider of per-image integer counts (OCR tokens or detected
/// objects). The external models that produce these counts live outside the
/// toolkit; their outputs arrive through sidecar annotations.
class CountOracle {
public:
    virtual ~CountOracle() = default;
    virtual std::optional<std::int64_t> count(const Sample& sample) const = 0;
};

/// Baseline count oracle: forwards the sidecar annotation, nothing else.
class AnnotationCountOracle : public CountOracle {
public:
    explicit AnnotationCountOracle(CountKind kind) : kind_(kind) {}

    std::optional<std::int64_t> count(const Sample& sample) const override;

private:
    CountKind kind_;
};

}  // namespace vlcurate
