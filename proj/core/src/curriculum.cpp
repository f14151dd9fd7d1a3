#include "vlcurate/curriculum.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace vlcurate {

using nlohmann::json;

const char* to_string(Component component) {
    switch (component) {
        case Component::visual_encoder: return "visual_encoder";
        case Component::projector: return "projector";
        case Component::llm: return "llm";
    }
    return "unknown";
}

const char* to_string(ComplexityTier tier) {
    return tier == ComplexityTier::low ? "low" : "high";
}

namespace {

Component parse_component(const std::string& label) {
    if (label == "visual_encoder") return Component::visual_encoder;
    if (label == "projector") return Component::projector;
    if (label == "llm") return Component::llm;
    throw std::runtime_error("unknown component: '" + label + "'");
}

ComplexityTier parse_tier(const std::string& label) {
    if (label == "low") return ComplexityTier::low;
    if (label == "high") return ComplexityTier::high;
    throw std::runtime_error("unknown complexity tier: '" + label + "'");
}

double median_of(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n % 2 == 1) return values[n / 2];
    return (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

}  // namespace

ComplexitySplit split_by_complexity(const std::vector<ComplexityReport>& reports,
                                    const SplitPolicy& policy) {
    if (reports.empty()) throw std::runtime_error("split_by_complexity: no reports");
    ComplexitySplit split;

    if (policy.kind == SplitPolicy::Kind::threshold) {
        split.thresholds["*"] = policy.threshold;
        for (std::size_t i = 0; i < reports.size(); ++i) {
            (reports[i].composite <= policy.threshold ? split.low : split.high).push_back(i);
        }
        return split;
    }

    // Median policy, per category when categories are present.
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const std::string key = reports[i].category ? to_string(*reports[i].category) : "*";
        groups[key].push_back(i);
    }
    for (const auto& [key, indices] : groups) {
        std::vector<double> scores;
        scores.reserve(indices.size());
        for (const std::size_t i : indices) scores.push_back(reports[i].composite);
        const double cut = median_of(std::move(scores));
        split.thresholds[key] = cut;
        for (const std::size_t i : indices) {
            (reports[i].composite <= cut ? split.low : split.high).push_back(i);
        }
    }
    std::sort(split.low.begin(), split.low.end());
    std::sort(split.high.begin(), split.high.end());
    return split;
}

CurriculumPlan build_plan(const std::vector<ComplexityReport>& reports, double scale_factor,
                          const SplitPolicy& policy) {
    if (!(scale_factor > 0.0 && scale_factor <= 1.0)) {
        throw std::runtime_error("build_plan: scale_factor must be in (0,1]");
    }
    if (reports.empty()) throw std::runtime_error("build_plan: no scored datasets");

    bool any_caption = false;
    for (const auto& r : reports) {
        if (r.category == TaskCategory::caption) any_caption = true;
    }
    if (!any_caption) {
        throw std::runtime_error("build_plan: no caption-category datasets for stages 1-2");
    }

    const ComplexitySplit split = split_by_complexity(reports, policy);

    struct StageConstants {
        const char* name;
        std::int64_t budget;
        double lr;
        Warmup warmup;
        std::int64_t steps;
        ComplexityTier tier;
        bool caption_only;
    };
    static const StageConstants kStages[4] = {
        {"projector_alignment", 10'000'000, 2e-4, {Warmup::Kind::steps, 100}, 65'000,
         ComplexityTier::low, true},
        {"encoder_enhancement", 23'000'000, 1e-5, {Warmup::Kind::steps, 100}, 90'000,
         ComplexityTier::high, true},
        {"general_instruction", 54'000'000, 4e-5, {Warmup::Kind::ratio, 0.03}, 140'000,
         ComplexityTier::low, false},
        {"advanced_instruction", 66'000'000, 4e-5, {Warmup::Kind::ratio, 0.03}, 250'000,
         ComplexityTier::high, false},
    };

    const auto scaled = [scale_factor](std::int64_t value) {
        // Ceiling of the exact product; products that land within rounding
        // dust of an integer (10M * 1e-5) must not tip to the next one.
        const double exact = static_cast<double>(value) * scale_factor;
        const double nearest = std::round(exact);
        const double up = std::abs(exact - nearest) <= 1e-9 * std::max(1.0, std::abs(nearest))
                              ? nearest
                              : std::ceil(exact);
        return std::max<std::int64_t>(1, static_cast<std::int64_t>(up));
    };

    CurriculumPlan plan;
    plan.policy = policy;
    plan.thresholds = split.thresholds;
    plan.scale_factor = scale_factor;
    for (int s = 0; s < 4; ++s) {
        const StageConstants& c = kStages[s];
        StageSpec& stage = plan.stages[static_cast<std::size_t>(s)];
        stage.index = s + 1;
        stage.name = c.name;
        switch (s) {
            case 0: stage.trainable = {Component::projector}; break;
            case 1: stage.trainable = {Component::visual_encoder, Component::projector}; break;
            default:
                stage.trainable = {Component::visual_encoder, Component::projector, Component::llm};
        }
        stage.tier = c.tier;
        if (c.caption_only) stage.categories = {TaskCategory::caption};
        stage.sample_budget = scaled(c.budget);
        stage.learning_rate = c.lr;
        stage.warmup = c.warmup;
        if (stage.warmup.kind == Warmup::Kind::steps) {
            stage.warmup.value = static_cast<double>(scaled(static_cast<std::int64_t>(c.warmup.value)));
        }
        stage.train_steps = scaled(c.steps);

        const auto& tier_indices = c.tier == ComplexityTier::low ? split.low : split.high;
        for (const std::size_t i : tier_indices) {
            if (c.caption_only && reports[i].category != TaskCategory::caption) continue;
            plan.stage_datasets[static_cast<std::size_t>(s)].push_back(reports[i].dataset);
        }
    }
    return plan;
}

std::int64_t PackItem::total_tokens() const {
    return std::accumulate(image_tokens.begin(), image_tokens.end(), text_tokens);
}

std::vector<Pack> pack_batches(const std::vector<PackItem>& items, const PackLimits& limits) {
    if (limits.max_tokens < 1 || limits.max_images < 0) {
        throw std::runtime_error("pack_batches: invalid limits");
    }
    for (const auto& item : items) {
        if (item.total_tokens() > limits.max_tokens) {
            throw std::runtime_error("sample '" + item.id + "': " + std::to_string(item.total_tokens()) +
                                     " tokens exceed the pack limit of " +
                                     std::to_string(limits.max_tokens));
        }
        if (static_cast<int>(item.image_tokens.size()) > limits.max_images) {
            throw std::runtime_error("sample '" + item.id + "': too many images for one pack");
        }
    }

    // First-fit-decreasing by total token cost; stable order keeps equal-cost
    // items in input order, so the output is deterministic.
    std::vector<std::size_t> order(items.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return items[a].total_tokens() > items[b].total_tokens();
    });

    std::vector<Pack> packs;
    for (const std::size_t idx : order) {
        const PackItem& item = items[idx];
        const std::int64_t cost = item.total_tokens();
        const int images = static_cast<int>(item.image_tokens.size());
        Pack* target = nullptr;
        for (auto& pack : packs) {
            if (pack.total_tokens + cost <= limits.max_tokens &&
                pack.total_images + images <= limits.max_images) {
                target = &pack;
                break;
            }
        }
        if (!target) {
            packs.emplace_back();
            target = &packs.back();
        }
        target->sample_ids.push_back(item.id);
        target->total_tokens += cost;
        target->total_images += images;
    }
    return packs;
}

namespace {

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t hash = 14695981039346656037ULL;
    for (const unsigned char c : bytes) {
        hash ^= c;
        hash *= 1099511628211ULL;
    }
    std::ostringstream out;
    out << std::hex;
    out.width(16);
    out.fill('0');
    out << hash;
    return out.str();
}

json plan_body_to_json(const CurriculumPlan& plan) {
    json j;
    j["version"] = 1;
    j["scale_factor"] = plan.scale_factor;
    j["policy"] = {{"kind", plan.policy.kind == SplitPolicy::Kind::median ? "median" : "threshold"},
                   {"threshold", plan.policy.threshold}};
    json thresholds = json::object();
    for (const auto& [key, value] : plan.thresholds) thresholds[key] = value;
    j["thresholds"] = thresholds;
    j["shared"] = {{"max_pack_tokens", plan.shared.max_pack_tokens},
                   {"max_pack_images", plan.shared.max_pack_images},
                   {"max_tiles", plan.shared.max_tiles},
                   {"optimizer", plan.shared.optimizer},
                   {"lr_schedule", plan.shared.lr_schedule}};
    json stages = json::array();
    for (std::size_t s = 0; s < plan.stages.size(); ++s) {
        const StageSpec& stage = plan.stages[s];
        json trainable = json::array();
        for (const Component c : stage.trainable) trainable.push_back(to_string(c));
        json categories = json::array();
        for (const TaskCategory c : stage.categories) categories.push_back(to_string(c));
        stages.push_back({{"index", stage.index},
                          {"name", stage.name},
                          {"trainable", trainable},
                          {"tier", to_string(stage.tier)},
                          {"categories", categories},
                          {"datasets", plan.stage_datasets[s]},
                          {"sample_budget", stage.sample_budget},
                          {"learning_rate", stage.learning_rate},
                          {"warmup",
                           {{"kind", stage.warmup.kind == Warmup::Kind::steps ? "steps" : "ratio"},
                            {"value", stage.warmup.value}}},
                          {"train_steps", stage.train_steps}});
    }
    j["stages"] = stages;
    return j;
}

}  // namespace

std::string emit_config(const CurriculumPlan& plan, const std::string& metadata_json) {
    json j = plan_body_to_json(plan);
    if (!metadata_json.empty()) j["metadata"] = json::parse(metadata_json);
    j["config_hash"] = fnv1a_hex(j.dump(2));
    return j.dump(2) + "\n";
}

CurriculumPlan load_training_config(const std::string& json_text) {
    json j = json::parse(json_text);
    if (j.value("version", 0) != 1) throw std::runtime_error("training config: unsupported version");
    const std::string stored_hash = j.at("config_hash").get<std::string>();
    j.erase("config_hash");
    if (fnv1a_hex(j.dump(2)) != stored_hash) {
        throw std::runtime_error("training config: config_hash mismatch");
    }

    CurriculumPlan plan;
    plan.scale_factor = j.at("scale_factor").get<double>();
    const auto& policy = j.at("policy");
    plan.policy.kind = policy.at("kind").get<std::string>() == "median" ? SplitPolicy::Kind::median
                                                                        : SplitPolicy::Kind::threshold;
    plan.policy.threshold = policy.at("threshold").get<double>();
    for (const auto& [key, value] : j.at("thresholds").items()) {
        plan.thresholds[key] = value.get<double>();
    }
    const auto& shared = j.at("shared");
    plan.shared.max_pack_tokens = shared.at("max_pack_tokens").get<int>();
    plan.shared.max_pack_images = shared.at("max_pack_images").get<int>();
    plan.shared.max_tiles = shared.at("max_tiles").get<int>();
    plan.shared.optimizer = shared.at("optimizer").get<std::string>();
    plan.shared.lr_schedule = shared.at("lr_schedule").get<std::string>();

    const auto& stages = j.at("stages");
    if (!stages.is_array() || stages.size() != 4) {
        throw std::runtime_error("training config: exactly 4 stages required");
    }
    for (std::size_t s = 0; s < 4; ++s) {
        const auto& in = stages[s];
        StageSpec& stage = plan.stages[s];
        stage.index = in.at("index").get<int>();
        if (stage.index != static_cast<int>(s) + 1) {
            throw std::runtime_error("training config: stages out of order");
        }
        stage.name = in.at("name").get<std::string>();
        for (const auto& label : in.at("trainable")) {
            stage.trainable.insert(parse_component(label.get<std::string>()));
        }
        stage.tier = parse_tier(in.at("tier").get<std::string>());
        for (const auto& label : in.at("categories")) {
            stage.categories.insert(parse_task_category(label.get<std::string>()));
        }
        plan.stage_datasets[s] = in.at("datasets").get<std::vector<std::string>>();
        stage.sample_budget = in.at("sample_budget").get<std::int64_t>();
        stage.learning_rate = in.at("learning_rate").get<double>();
        stage.warmup.kind = in.at("warmup").at("kind").get<std::string>() == "steps"
                                ? Warmup::Kind::steps
                                : Warmup::Kind::ratio;
        stage.warmup.value = in.at("warmup").at("value").get<double>();
        stage.train_steps = in.at("train_steps").get<std::int64_t>();
    }
    return plan;
}

}  // namespace vlcurate
