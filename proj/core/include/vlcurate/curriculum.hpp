#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "vlcurate/manifest.hpp"
#include "vlcurate/scoring.hpp"

namespace vlcurate {

/// Trainable model components per stage.
enum class Component { visual_encoder, projector, llm };

const char* to_string(Component component);

enum class ComplexityTier { low, high };

const char* to_string(ComplexityTier tier);

/// Warmup as either an absolute step count or a ratio of total steps.
struct Warmup {
    enum class Kind { steps, ratio };
    Kind kind = Kind::steps;
    double value = 0;
};

struct StageSpec {
    int index = 0;  ///< 1..4
    std::string name;
    std::set<Component> trainable;
    ComplexityTier tier = ComplexityTier::low;
    std::set<TaskCategory> categories;  ///< empty set means all categories
    std::int64_t sample_budget = 0;
    double learning_rate = 0;
    Warmup warmup;
    std::int64_t train_steps = 0;
};

/// Limits shared by all stages.
struct SharedLimits {
    int max_pack_tokens = 16384;
    int max_pack_images = 48;
    int max_tiles = 24;
    std::string optimizer = "AdamW";
    std::string lr_schedule = "cosine decay";
};

struct SplitPolicy {
    enum class Kind { median, threshold };
    Kind kind = Kind::median;
    double threshold = 0.5;  ///< used by Kind::threshold
};

struct CurriculumPlan {
    std::array<StageSpec, 4> stages;
    SharedLimits shared;
    SplitPolicy policy;
    /// Complexity cut per category label ("*" when no categories present).
    std::map<std::string, double> thresholds;
    double scale_factor = 1.0;
    /// Manifest references assigned to each stage, in report order.
    std::array<std::vector<std::string>, 4> stage_datasets;
};

struct ComplexitySplit {
    std::vector<std::size_t> low;   ///< indices into the report list
    std::vector<std::size_t> high;
    std::map<std::string, double> thresholds;
};

/// Partitions scored datasets into low/high complexity. median: S <= the
/// (per-category) median is low; threshold(t): S <= t is low. The two sides
/// are disjoint and cover the input.
ComplexitySplit split_by_complexity(const std::vector<ComplexityReport>& reports,
                                    const SplitPolicy& policy);

/// Builds the four-stage plan from scored datasets. Stages 1-2 take
/// low/high-complexity caption data, stages 3-4 low/high-complexity data
/// across all categories. Budgets, learning rates, warmups and step counts
/// are the paradigm's constants; budgets and step counts scale with
/// scale_factor (ceiling, minimum 1).
CurriculumPlan build_plan(const std::vector<ComplexityReport>& reports, double scale_factor = 1.0,
                          const SplitPolicy& policy = {});

/// One packable sample: prompt+response token count plus the retained visual
/// tokens of each of its images.
struct PackItem {
    std::string id;
    std::int64_t text_tokens = 0;
    std::vector<std::int64_t> image_tokens;

    std::int64_t total_tokens() const;
};

struct PackLimits {
    std::int64_t max_tokens = 16384;
    int max_images = 48;
};

struct Pack {
    std::vector<std::string> sample_ids;
    std::int64_t total_tokens = 0;
    int total_images = 0;
};

/// First-fit-decreasing by total token cost under both caps. Deterministic;
/// a sample that cannot fit alone throws, naming it.
std::vector<Pack> pack_batches(const std::vector<PackItem>& items, const PackLimits& limits);

/// Serializes a plan as a versioned JSON document with a config hash;
/// byte-identical for equal plans. Optional metadata (a JSON object as
/// text) rides along under "metadata", covered by the hash but not part of
/// the plan itself.
std::string emit_config(const CurriculumPlan& plan, const std::string& metadata_json = "");

/// Inverse of emit_config; verifies the config hash.
CurriculumPlan load_training_config(const std::string& json_text);

}  // namespace vlcurate
