#include "vlcurate/manifest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "ioutil.hpp"

namespace vlcurate {

using nlohmann::json;

namespace {

const std::pair<TaskCategory, const char*> kCategoryNames[] = {
    {TaskCategory::reasoning, "reasoning"}, {TaskCategory::gui, "gui"},
    {TaskCategory::ocr, "ocr"},             {TaskCategory::text_only, "text_only"},
    {TaskCategory::chart, "chart"},         {TaskCategory::caption, "caption"},
    {TaskCategory::vqa, "vqa"},             {TaskCategory::grounding, "grounding"},
};

[[noreturn]] void fail_line(const std::string& path, std::size_t line, const std::string& what) {
    std::ostringstream msg;
    msg << path << ":" << line << ": " << what;
    throw std::runtime_error(msg.str());
}

json parse_record(const std::string& path, std::size_t line_no, const std::string& line) {
    json rec = json::parse(line, nullptr, false);
    if (rec.is_discarded() || !rec.is_object()) fail_line(path, line_no, "malformed record");
    return rec;
}

std::string require_string(const json& rec, const char* key, const std::string& path,
                           std::size_t line_no) {
    const auto it = rec.find(key);
    if (it == rec.end()) return {};
    if (!it->is_string()) fail_line(path, line_no, std::string("field '") + key + "' must be a string");
    return it->get<std::string>();
}

}  // namespace

const char* to_string(TaskCategory category) {
    for (const auto& [cat, name] : kCategoryNames) {
        if (cat == category) return name;
    }
    return "unknown";
}

std::optional<TaskCategory> task_category_from_string(const std::string& label) {
    for (const auto& [cat, name] : kCategoryNames) {
        if (label == name) return cat;
    }
    return std::nullopt;
}

TaskCategory parse_task_category(const std::string& label) {
    if (auto cat = task_category_from_string(label)) return *cat;
    throw std::runtime_error("unknown task category: '" + label + "'");
}

const char* to_string(ModelTier tier) {
    switch (tier) {
        case ModelTier::small: return "small";
        case ModelTier::mid: return "mid";
        case ModelTier::large: return "large";
    }
    return "unknown";
}

bool AnnotationSet::empty() const {
    return !perplexity && !ocr_token_count && !object_count && model_losses.empty() &&
           !judge_verdict;
}

const Sample* DatasetManifest::find(const std::string& id) const {
    for (const auto& s : samples) {
        if (s.id == id) return &s;
    }
    return nullptr;
}

void validate_manifest(const DatasetManifest& manifest) {
    std::unordered_set<std::string> seen;
    for (const auto& s : manifest.samples) {
        if (s.id.empty()) throw std::runtime_error("manifest '" + manifest.name + "': empty sample id");
        if (!seen.insert(s.id).second) {
            throw std::runtime_error("manifest '" + manifest.name + "': duplicate id '" + s.id + "'");
        }
        if (s.prompt.empty() && s.response.empty()) {
            throw std::runtime_error("sample '" + s.id + "': prompt and response both empty");
        }
        if (const auto* ref = std::get_if<ImageFileRef>(&s.image); ref && ref->path.empty()) {
            throw std::runtime_error("sample '" + s.id + "': empty image path");
        }
    }
}

DatasetManifest load_manifest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open manifest: " + path);

    DatasetManifest manifest;
    manifest.name = io::file_stem(path);

    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const json rec = parse_record(path, line_no, line);

        Sample sample;
        sample.id = require_string(rec, "id", path, line_no);
        if (sample.id.empty()) fail_line(path, line_no, "missing or empty 'id'");
        if (!seen.insert(sample.id).second) {
            fail_line(path, line_no, "duplicate id '" + sample.id + "'");
        }
        sample.prompt = require_string(rec, "prompt", path, line_no);
        sample.response = require_string(rec, "response", path, line_no);

        const bool has_path = rec.contains("image_path");
        const bool has_inline = rec.contains("image");
        if (has_path && has_inline) fail_line(path, line_no, "both 'image_path' and 'image' present");
        if (has_path) {
            ImageFileRef ref;
            ref.path = require_string(rec, "image_path", path, line_no);
            if (ref.path.empty()) fail_line(path, line_no, "empty 'image_path'");
            sample.image = std::move(ref);
        } else if (has_inline) {
            const json& img = rec.at("image");
            if (!img.is_object() || !img.contains("width") || !img.contains("height") ||
                !img.contains("pixels_path")) {
                fail_line(path, line_no, "'image' needs width, height and pixels_path");
            }
            InlineImage inl;
            inl.width = img.at("width").get<int>();
            inl.height = img.at("height").get<int>();
            inl.pixels_path = img.at("pixels_path").get<std::string>();
            if (inl.width <= 0 || inl.height <= 0) fail_line(path, line_no, "non-positive image dimensions");
            sample.image = std::move(inl);
        }

        if (sample.prompt.empty() && sample.response.empty()) {
            fail_line(path, line_no, "prompt and response both empty");
        }
        manifest.samples.push_back(std::move(sample));
    }
    if (in.bad()) throw std::runtime_error("read failure: " + path);
    if (manifest.samples.empty()) {
        throw std::runtime_error("empty manifest: " + path);
    }
    return manifest;
}

void write_manifest(const DatasetManifest& manifest, const std::string& path) {
    std::ostringstream out;
    for (const auto& s : manifest.samples) {
        json rec;
        rec["id"] = s.id;
        rec["prompt"] = s.prompt;
        rec["response"] = s.response;
        if (const auto* ref = std::get_if<ImageFileRef>(&s.image)) {
            rec["image_path"] = ref->path;
        } else if (const auto* inl = std::get_if<InlineImage>(&s.image)) {
            if (inl->pixels_path.empty()) {
                throw std::runtime_error("sample '" + s.id +
                                         "': in-memory pixel buffer has no pixels_path, cannot serialize");
            }
            rec["image"] = {{"width", inl->width},
                            {"height", inl->height},
                            {"pixels_path", inl->pixels_path}};
        }
        out << rec.dump() << '\n';
    }
    io::write_file(path, out.str());
}

namespace {

struct SidecarRecord {
    std::string id;
    AnnotationSet annotations;
    std::optional<TaskCategory> category;
};

double require_nonneg(const json& rec, const char* key, const std::string& path, std::size_t line_no) {
    const json& v = rec.at(key);
    if (!v.is_number()) fail_line(path, line_no, std::string("field '") + key + "' must be numeric");
    const double d = v.get<double>();
    if (!(d >= 0) || !std::isfinite(d)) {
        fail_line(path, line_no, std::string("field '") + key + "' must be finite and >= 0");
    }
    return d;
}

SidecarRecord parse_sidecar_record(const std::string& path, std::size_t line_no,
                                   const std::string& line) {
    const json rec = parse_record(path, line_no, line);
    SidecarRecord out;
    out.id = require_string(rec, "id", path, line_no);
    if (out.id.empty()) fail_line(path, line_no, "missing or empty 'id'");

    AnnotationSet& a = out.annotations;
    if (rec.contains("perplexity")) {
        const double p = require_nonneg(rec, "perplexity", path, line_no);
        if (p < 1.0) fail_line(path, line_no, "perplexity must be >= 1");
        a.perplexity = p;
    }
    if (rec.contains("ocr_token_count")) {
        a.ocr_token_count = static_cast<std::int64_t>(require_nonneg(rec, "ocr_token_count", path, line_no));
    }
    if (rec.contains("object_count")) {
        a.object_count = static_cast<std::int64_t>(require_nonneg(rec, "object_count", path, line_no));
    }
    const std::pair<const char*, ModelTier> loss_keys[] = {
        {"loss_small", ModelTier::small}, {"loss_mid", ModelTier::mid}, {"loss_large", ModelTier::large}};
    for (const auto& [key, tier] : loss_keys) {
        if (rec.contains(key)) a.model_losses[tier] = require_nonneg(rec, key, path, line_no);
    }
    if (rec.contains("coherent") || rec.contains("hallucination")) {
        JudgeVerdict v;
        if (rec.contains("coherent")) {
            if (!rec.at("coherent").is_boolean()) fail_line(path, line_no, "'coherent' must be boolean");
            v.coherent = rec.at("coherent").get<bool>();
        }
        if (rec.contains("hallucination")) {
            if (!rec.at("hallucination").is_boolean()) fail_line(path, line_no, "'hallucination' must be boolean");
            v.hallucination = rec.at("hallucination").get<bool>();
        }
        a.judge_verdict = v;
    }
    if (rec.contains("category")) {
        const std::string label = require_string(rec, "category", path, line_no);
        const auto cat = task_category_from_string(label);
        if (!cat) fail_line(path, line_no, "unknown task category: '" + label + "'");
        out.category = cat;
    }
    return out;
}

void for_each_sidecar_record(const std::string& path,
                             const std::function<void(const SidecarRecord&)>& fn) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open sidecar: " + path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        fn(parse_sidecar_record(path, line_no, line));
    }
    if (in.bad()) throw std::runtime_error("read failure: " + path);
}

void merge_annotations(AnnotationSet& into, const AnnotationSet& from) {
    if (from.perplexity) into.perplexity = from.perplexity;
    if (from.ocr_token_count) into.ocr_token_count = from.ocr_token_count;
    if (from.object_count) into.object_count = from.object_count;
    for (const auto& [tier, loss] : from.model_losses) into.model_losses[tier] = loss;
    if (from.judge_verdict) into.judge_verdict = from.judge_verdict;
}

}  // namespace

AttachResult attach_annotations(const DatasetManifest& manifest, const std::string& sidecar_path) {
    AttachResult result;
    result.manifest = manifest;

    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < result.manifest.samples.size(); ++i) {
        index.emplace(result.manifest.samples[i].id, i);
    }
    for_each_sidecar_record(sidecar_path, [&](const SidecarRecord& rec) {
        const auto it = index.find(rec.id);
        if (it == index.end()) {
            result.warnings.push_back("sidecar id '" + rec.id + "' not present in manifest '" +
                                      manifest.name + "'");
            return;
        }
        merge_annotations(result.manifest.samples[it->second].annotations, rec.annotations);
    });
    return result;
}

std::map<std::string, TaskCategory> load_per_sample_labels(const std::string& sidecar_path) {
    std::map<std::string, TaskCategory> labels;
    for_each_sidecar_record(sidecar_path, [&](const SidecarRecord& rec) {
        if (rec.category) labels[rec.id] = *rec.category;
    });
    return labels;
}

std::vector<DatasetManifest> categorize(const DatasetManifest& manifest,
                                        const std::map<std::string, TaskCategory>* label_map,
                                        const std::map<std::string, TaskCategory>* per_sample_labels) {
    if (manifest.category) {
        return {manifest};
    }
    if (label_map) {
        const auto it = label_map->find(manifest.name);
        if (it != label_map->end()) {
            DatasetManifest out = manifest;
            out.category = it->second;
            return {out};
        }
    }
    if (!per_sample_labels) {
        throw std::runtime_error("manifest '" + manifest.name +
                                 "': no category source (manifest category, label map or per-sample labels)");
    }

    std::vector<DatasetManifest> parts;  // first-occurrence order
    for (const auto& s : manifest.samples) {
        const auto it = per_sample_labels->find(s.id);
        if (it == per_sample_labels->end()) {
            throw std::runtime_error("sample '" + s.id + "': no per-sample category label");
        }
        const TaskCategory cat = it->second;
        auto part = std::find_if(parts.begin(), parts.end(),
                                 [&](const DatasetManifest& m) { return m.category == cat; });
        if (part == parts.end()) {
            DatasetManifest m;
            m.name = manifest.name + "." + to_string(cat);
            m.category = cat;
            m.source_note = manifest.source_note;
            parts.push_back(std::move(m));
            part = std::prev(parts.end());
        }
        part->samples.push_back(s);
    }
    // A homogeneous manifest keeps its name; renaming marks real splits.
    if (parts.size() == 1) parts.front().name = manifest.name;
    return parts;
}

}  // namespace vlcurate
