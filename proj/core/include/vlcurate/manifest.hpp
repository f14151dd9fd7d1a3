#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace vlcurate {

/// Task categories a dataset (or individual sample) can carry.
enum class TaskCategory {
    reasoning,
    gui,
    ocr,
    text_only,
    chart,
    caption,
    vqa,
    grounding,
};

const char* to_string(TaskCategory category);
std::optional<TaskCategory> task_category_from_string(const std::string& label);
/// Throws on an unknown label.
TaskCategory parse_task_category(const std::string& label);

/// Model size tiers for paired autoregressive losses.
enum class ModelTier { small, mid, large };

const char* to_string(ModelTier tier);

struct JudgeVerdict {
    bool coherent = true;
    bool hallucination = false;
};

/// Per-sample oracle annotations, usually merged in from a sidecar file.
/// Every field is optional at load time; metrics that need a missing value
/// fail when computed, not before.
struct AnnotationSet {
    std::optional<double> perplexity;             ///< PPL(response | prompt), >= 1
    std::optional<std::int64_t> ocr_token_count;  ///< text tokens found in the image
    std::optional<std::int64_t> object_count;     ///< objects detected in the image
    std::map<ModelTier, double> model_losses;     ///< autoregressive loss per tier
    std::optional<JudgeVerdict> judge_verdict;

    bool empty() const;
};

/// Image stored on disk as PNG or JPEG.
struct ImageFileRef {
    std::string path;
};

/// Grayscale pixel buffer with explicit dimensions: either backed by a raw
/// row-major byte file (pixels_path) or held in memory (pixels), the latter
/// mainly for synthetic test data.
struct InlineImage {
    int width = 0;
    int height = 0;
    std::string pixels_path;
    std::vector<std::uint8_t> pixels;
};

using ImageSource = std::variant<std::monostate, ImageFileRef, InlineImage>;

/// One image-prompt-response triple.
struct Sample {
    std::string id;
    ImageSource image;
    std::string prompt;
    std::string response;
    AnnotationSet annotations;

    bool has_image() const { return !std::holds_alternative<std::monostate>(image); }
};

/// A named, optionally task-categorized collection of samples.
/// Loaded manifests are immutable by convention: scoring modules only read.
struct DatasetManifest {
    std::string name;
    std::optional<TaskCategory> category;
    std::vector<Sample> samples;
    std::string source_note;

    const Sample* find(const std::string& id) const;
};

/// Checks id uniqueness and the per-sample invariants; throws on violation.
void validate_manifest(const DatasetManifest& manifest);

/// Loads a manifest from a JSONL file: one record per line with fields
/// {id, prompt, response, image_path | image:{width,height,pixels_path}}.
/// The manifest name is the file stem. Throws on I/O failure, malformed
/// records (message carries the line number), duplicate ids, or empty files.
DatasetManifest load_manifest(const std::string& path);

/// Inverse of load_manifest for file-backed manifests. In-memory pixel
/// buffers without a pixels_path cannot be serialized and throw.
void write_manifest(const DatasetManifest& manifest, const std::string& path);

struct AttachResult {
    DatasetManifest manifest;
    std::vector<std::string> warnings;  ///< sidecar ids with no matching sample
};

/// Merges sidecar annotation records (keyed by sample id) into a copy of the
/// manifest. Sidecar fields: {id, perplexity?, ocr_token_count?,
/// object_count?, loss_small?, loss_mid?, loss_large?, coherent?,
/// hallucination?, category?}. Applying the same sidecar twice is a no-op.
AttachResult attach_annotations(const DatasetManifest& manifest, const std::string& sidecar_path);

/// Reads the per-sample `category` fields of a sidecar file.
std::map<std::string, TaskCategory> load_per_sample_labels(const std::string& sidecar_path);

/// Splits a manifest into one homogeneous manifest per category present.
/// Category sources, in precedence order: the manifest's own category, a
/// name->category map, per-sample labels. Output manifests partition the
/// input samples exactly and appear in order of first occurrence.
std::vector<DatasetManifest> categorize(
    const DatasetManifest& manifest,
    const std::map<std::string, TaskCategory>* label_map = nullptr,
    const std::map<std::string, TaskCategory>* per_sample_labels = nullptr);

}  // namespace vlcurate
