#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vlcurate/manifest.hpp"
#include "vlcurate/oracles.hpp"
#include "vlcurate/taskgap.hpp"

namespace vlcurate {

/// Axis weights (lambda_text, lambda_image, lambda_task). Must be
/// non-negative and sum to 1 within 1e-9.
struct WeightVector {
    double lambda_text = 1.0 / 3.0;
    double lambda_image = 1.0 / 3.0;
    double lambda_task = 1.0 / 3.0;

    static WeightVector uniform() { return {}; }
};

void validate_weights(const WeightVector& w);

/// Per-category weight table with a uniform fallback.
struct WeightsTable {
    std::map<TaskCategory, WeightVector> by_category;
    WeightVector fallback = WeightVector::uniform();

    /// Category weights, or the fallback with a warning appended.
    WeightVector lookup(const std::optional<TaskCategory>& category,
                        std::vector<std::string>* warnings = nullptr) const;
};

enum class NormMode { minmax, fixed_cap };

const char* to_string(NormMode mode);
NormMode norm_mode_from_string(const std::string& label);

struct NormSpec {
    NormMode mode = NormMode::minmax;
    double cap = 1.0;  ///< used by fixed_cap only, > 0
};

/// Normalizes a batch of finite values into [0,1].
/// minmax: (v - min) / (max - min), every output 0.5 when max == min.
/// fixed_cap: min(v / cap, 1).
std::vector<double> normalize_batch(const std::vector<double>& values, const NormSpec& spec);

/// Per-metric caps for fixed_cap normalization. Toolkit defaults.
struct FixedCaps {
    double token_length = 1024.0;
    double ttr = 1.0;
    double perplexity = 100.0;
    double text_density = 0.01;
    double object_density = 0.001;
};

/// Everything that parameterizes one scoring run; snapshotted into reports.
struct ScoringConfig {
    NormMode norm = NormMode::minmax;
    FixedCaps caps;
    GapConfig gap;
    static constexpr double entropy_norm_bits = 8.0;  ///< fixed entropy normalizer
};

struct TextAxis {
    double token_length_raw = 0, ttr_raw = 0, perplexity_raw = 1;
    double token_length_norm = 0, ttr_norm = 0, perplexity_norm = 0;
    double score = 0;
};
struct ImageAxis {
    double entropy_raw = 0, text_density_raw = 0, object_density_raw = 0;
    double entropy_norm = 0, text_density_norm = 0, object_density_norm = 0;
    double score = 0;
};
struct TaskAxis {
    double c_small_mid = 0, c_mid_large = 0;
    double score = 0;
};

/// Raw + normalized metrics, axis scores and the composite for one dataset.
/// An absent axis was omitted (its weight was zero and its inputs missing).
struct ComplexityReport {
    std::string dataset;
    std::optional<TaskCategory> category;
    std::optional<TextAxis> text;
    std::optional<ImageAxis> image;
    std::optional<TaskAxis> task;
    WeightVector weights;
    double composite = 0;
    std::vector<std::string> omissions;  ///< axis names plus the reason
    ScoringConfig config;
    std::size_t sample_count = 0;
};

/// Weighted sum of the three axis scores; inputs in [0,1], weights valid.
double composite_score(double s_text, double s_image, double s_task, const WeightVector& w);

/// One dataset plus the oracles backing its model-derived metrics.
struct ScoreRequest {
    const DatasetManifest* manifest = nullptr;
    const PerplexityOracle* perplexity = nullptr;
    const CountOracle* ocr = nullptr;
    const CountOracle* detector = nullptr;
};

/// Scores every dataset in one normalization batch: raw metrics first, then
/// batch normalization (entropy always divides by the fixed 8-bit constant),
/// then axis scores and composites. A metric that cannot be computed is an
/// error unless its axis weight is zero, in which case the axis is omitted.
std::vector<ComplexityReport> score_batch(const std::vector<ScoreRequest>& requests,
                                          const WeightsTable& weights, const ScoringConfig& config,
                                          std::vector<std::string>* warnings = nullptr);

/// Single-dataset convenience wrapper (a batch of one).
ComplexityReport score_dataset(const ScoreRequest& request, const WeightVector& weights,
                               const ScoringConfig& config);

/// Five datasets of one category with expert difficulty ranks 1..5
/// (1 easiest). Ranks must be a permutation of 1..5.
struct RankedEntry {
    std::string name;
    int rank = 0;
};
struct RankedSubsets {
    std::optional<TaskCategory> category;
    std::vector<RankedEntry> entries;
};

void validate_ranked_subsets(const RankedSubsets& ranked);

struct AxisScores {
    double s_text = 0, s_image = 0, s_task = 0;
};

struct CalibrationResult {
    WeightVector weights;
    double min_margin = 0;    ///< smallest consecutive S gap over ranks 1..5
    bool feasible = false;    ///< some weights give strictly increasing S
    double kendall_tau = 0;   ///< alignment of S with the ranks
};

/// Grid search over the weight simplex at the given step (which must divide
/// 1 evenly). Among weights with strictly increasing S over ranks 1..5,
/// returns the one maximizing the minimum consecutive margin, ties broken by
/// larger lambda_task then larger lambda_image. If none is strictly
/// monotonic, feasible=false and the result maximizes Kendall's tau (same
/// margin and lambda tie-breaks).
CalibrationResult calibrate_weights(const RankedSubsets& ranked,
                                    const std::vector<AxisScores>& scores_by_entry,
                                    double grid_step = 0.05);

std::string report_to_json(const ComplexityReport& report);
ComplexityReport report_from_json(const std::string& json_text);

/// Weights config document: {"default": {...}?, "categories": {name: {...}}}
/// with optional calibration metadata per entry.
struct WeightsConfigEntry {
    WeightVector weights;
    std::optional<bool> feasible;
    std::optional<double> min_margin;
    std::optional<double> kendall_tau;
};
struct WeightsConfig {
    std::optional<WeightVector> fallback;
    std::map<TaskCategory, WeightsConfigEntry> categories;

    WeightsTable table() const;
};

WeightsConfig load_weights_config(const std::string& path);
void write_weights_config(const WeightsConfig& config, const std::string& path);

}  // namespace vlcurate
