#include "vlcurate/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "ioutil.hpp"
#include "vlcurate/imagestats.hpp"
#include "vlcurate/textstats.hpp"

namespace vlcurate {

using nlohmann::json;

void validate_weights(const WeightVector& w) {
    for (const double v : {w.lambda_text, w.lambda_image, w.lambda_task}) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw std::runtime_error("weights: lambdas must be finite and >= 0");
        }
    }
    const double sum = w.lambda_text + w.lambda_image + w.lambda_task;
    if (std::abs(sum - 1.0) > 1e-9) {
        throw std::runtime_error("weights: lambdas must sum to 1");
    }
}

WeightVector WeightsTable::lookup(const std::optional<TaskCategory>& category,
                                  std::vector<std::string>* warnings) const {
    if (category) {
        const auto it = by_category.find(*category);
        if (it != by_category.end()) return it->second;
    }
    if (warnings) {
        const std::string label = category ? to_string(*category) : "(uncategorized)";
        warnings->push_back("no weights entry for category " + label + ", using fallback");
    }
    return fallback;
}

const char* to_string(NormMode mode) {
    return mode == NormMode::minmax ? "minmax" : "fixed";
}

NormMode norm_mode_from_string(const std::string& label) {
    if (label == "minmax") return NormMode::minmax;
    if (label == "fixed") return NormMode::fixed_cap;
    throw std::runtime_error("unknown normalization mode: '" + label + "'");
}

std::vector<double> normalize_batch(const std::vector<double>& values, const NormSpec& spec) {
    if (values.empty()) throw std::runtime_error("normalize_batch: empty value list");
    for (const double v : values) {
        if (!std::isfinite(v)) throw std::runtime_error("normalize_batch: non-finite value");
    }
    std::vector<double> out(values.size());
    if (spec.mode == NormMode::minmax) {
        const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
        const double lo = *lo_it, hi = *hi_it;
        if (lo == hi) {
            std::fill(out.begin(), out.end(), 0.5);  // degenerate range is neutral
        } else {
            for (std::size_t i = 0; i < values.size(); ++i) {
                out[i] = (values[i] - lo) / (hi - lo);
            }
        }
    } else {
        if (!(spec.cap > 0.0)) throw std::runtime_error("normalize_batch: cap must be > 0");
        for (std::size_t i = 0; i < values.size(); ++i) {
            out[i] = std::min(values[i] / spec.cap, 1.0);
        }
    }
    return out;
}

double composite_score(double s_text, double s_image, double s_task, const WeightVector& w) {
    validate_weights(w);
    for (const double v : {s_text, s_image, s_task}) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw std::runtime_error("composite_score: axis score outside [0,1]");
        }
    }
    return w.lambda_text * s_text + w.lambda_image * s_image + w.lambda_task * s_task;
}

namespace {

// Normalizes one metric series in place across the batch; `slots` points at
// the (raw, normalized) fields of the reports that computed the metric.
struct MetricSlot {
    double raw = 0;
    double* normalized = nullptr;
};

void normalize_metric(std::vector<MetricSlot>& slots, NormMode mode, double cap) {
    if (slots.empty()) return;
    std::vector<double> values;
    values.reserve(slots.size());
    for (const auto& slot : slots) values.push_back(slot.raw);
    NormSpec spec;
    spec.mode = mode;
    spec.cap = cap;
    const auto normalized = normalize_batch(values, spec);
    for (std::size_t i = 0; i < slots.size(); ++i) *slots[i].normalized = normalized[i];
}

}  // namespace

std::vector<ComplexityReport> score_batch(const std::vector<ScoreRequest>& requests,
                                          const WeightsTable& weights, const ScoringConfig& config,
                                          std::vector<std::string>* warnings) {
    validate_gap_config(config.gap);
    std::vector<ComplexityReport> reports(requests.size());

    // Pass 1: raw metrics. An axis whose inputs are missing is an error
    // unless its weight is zero, in which case it is omitted from the report.
    for (std::size_t i = 0; i < requests.size(); ++i) {
        const ScoreRequest& req = requests[i];
        if (!req.manifest) throw std::runtime_error("score_batch: null manifest");
        const DatasetManifest& m = *req.manifest;
        if (m.samples.empty()) throw std::runtime_error("manifest '" + m.name + "': no samples to score");
        validate_manifest(m);

        ComplexityReport& report = reports[i];
        report.dataset = m.name;
        report.category = m.category;
        report.sample_count = m.samples.size();
        report.weights = weights.lookup(m.category, warnings);
        validate_weights(report.weights);
        report.config = config;

        try {
            TextAxis axis;
            axis.token_length_raw = avg_token_length(m);
            const TtrResult ttr = avg_ttr(m);
            if (warnings) {
                for (const auto& id : ttr.skipped_ids) {
                    warnings->push_back("dataset '" + m.name + "': sample '" + id +
                                        "' skipped for TTR (no tokens)");
                }
            }
            axis.ttr_raw = ttr.value;
            axis.perplexity_raw = avg_perplexity(m, req.perplexity);
            report.text = axis;
        } catch (const std::exception& e) {
            if (report.weights.lambda_text != 0.0) {
                throw std::runtime_error("dataset '" + m.name + "', text axis: " + e.what());
            }
            report.omissions.push_back(std::string("text: ") + e.what());
        }

        try {
            ImageAxis axis;
            axis.entropy_raw = avg_entropy(m);
            axis.text_density_raw = text_density(m, req.ocr);
            axis.object_density_raw = object_density(m, req.detector);
            report.image = axis;
        } catch (const std::exception& e) {
            if (report.weights.lambda_image != 0.0) {
                throw std::runtime_error("dataset '" + m.name + "', image axis: " + e.what());
            }
            report.omissions.push_back(std::string("image: ") + e.what());
        }

        try {
            TaskAxis axis;
            axis.c_small_mid = pair_complexity(collect_loss_pairs(m, ModelTier::small, ModelTier::mid),
                                               config.gap);
            axis.c_mid_large = pair_complexity(collect_loss_pairs(m, ModelTier::mid, ModelTier::large),
                                               config.gap);
            axis.score = task_score(axis.c_small_mid, axis.c_mid_large);
            report.task = axis;
        } catch (const std::exception& e) {
            if (report.weights.lambda_task != 0.0) {
                throw std::runtime_error("dataset '" + m.name + "', task axis: " + e.what());
            }
            report.omissions.push_back(std::string("task: ") + e.what());
        }
    }

    // Pass 2: normalization across the batch, per metric, over the datasets
    // that computed it. Entropy always uses the fixed 8-bit constant.
    const bool fixed = config.norm == NormMode::fixed_cap;
    std::vector<MetricSlot> token_length, ttr, perplexity, text_dens, object_dens;
    for (auto& report : reports) {
        if (report.text) {
            token_length.push_back({report.text->token_length_raw, &report.text->token_length_norm});
            ttr.push_back({report.text->ttr_raw, &report.text->ttr_norm});
            perplexity.push_back({report.text->perplexity_raw, &report.text->perplexity_norm});
        }
        if (report.image) {
            report.image->entropy_norm =
                std::min(report.image->entropy_raw / ScoringConfig::entropy_norm_bits, 1.0);
            text_dens.push_back({report.image->text_density_raw, &report.image->text_density_norm});
            object_dens.push_back({report.image->object_density_raw, &report.image->object_density_norm});
        }
    }
    const NormMode mode = fixed ? NormMode::fixed_cap : NormMode::minmax;
    normalize_metric(token_length, mode, config.caps.token_length);
    normalize_metric(ttr, mode, config.caps.ttr);
    normalize_metric(perplexity, mode, config.caps.perplexity);
    normalize_metric(text_dens, mode, config.caps.text_density);
    normalize_metric(object_dens, mode, config.caps.object_density);

    // Pass 3: axis scores and composites.
    for (auto& report : reports) {
        if (report.text) {
            report.text->score = text_score(report.text->token_length_norm, report.text->ttr_norm,
                                            report.text->perplexity_norm);
        }
        if (report.image) {
            report.image->score = image_score(report.image->entropy_norm, report.image->text_density_norm,
                                              report.image->object_density_norm);
        }
        report.composite = composite_score(report.text ? report.text->score : 0.0,
                                           report.image ? report.image->score : 0.0,
                                           report.task ? report.task->score : 0.0, report.weights);
    }
    return reports;
}

ComplexityReport score_dataset(const ScoreRequest& request, const WeightVector& weights,
                               const ScoringConfig& config) {
    WeightsTable table;
    table.fallback = weights;
    auto reports = score_batch({request}, table, config, nullptr);
    return reports.front();
}

void validate_ranked_subsets(const RankedSubsets& ranked) {
    if (ranked.entries.size() != 5) {
        throw std::runtime_error("ranked subsets: exactly 5 entries required");
    }
    std::array<bool, 5> seen{};
    for (const auto& entry : ranked.entries) {
        if (entry.rank < 1 || entry.rank > 5 || seen[static_cast<std::size_t>(entry.rank - 1)]) {
            throw std::runtime_error("ranked subsets: ranks must be a permutation of 1..5");
        }
        seen[static_cast<std::size_t>(entry.rank - 1)] = true;
    }
}

namespace {

double kendall_tau_vs_ranks(const std::array<double, 5>& s) {
    int concordant = 0, discordant = 0;
    for (std::size_t i = 0; i < 5; ++i) {
        for (std::size_t j = i + 1; j < 5; ++j) {
            if (s[j] > s[i]) ++concordant;
            else if (s[j] < s[i]) ++discordant;
        }
    }
    return static_cast<double>(concordant - discordant) / 10.0;
}

}  // namespace

CalibrationResult calibrate_weights(const RankedSubsets& ranked,
                                    const std::vector<AxisScores>& scores_by_entry,
                                    double grid_step) {
    validate_ranked_subsets(ranked);
    if (scores_by_entry.size() != ranked.entries.size()) {
        throw std::runtime_error("calibrate_weights: one axis-score triple per entry required");
    }
    const int steps = static_cast<int>(std::lround(1.0 / grid_step));
    if (steps < 1 || std::abs(steps * grid_step - 1.0) > 1e-9) {
        throw std::runtime_error("calibrate_weights: grid step must divide 1 evenly");
    }
    for (const auto& s : scores_by_entry) {
        for (const double v : {s.s_text, s.s_image, s.s_task}) {
            if (!(v >= 0.0 && v <= 1.0)) {
                throw std::runtime_error("calibrate_weights: axis score outside [0,1]");
            }
        }
    }

    std::array<AxisScores, 5> by_rank{};
    for (std::size_t i = 0; i < ranked.entries.size(); ++i) {
        by_rank[static_cast<std::size_t>(ranked.entries[i].rank - 1)] = scores_by_entry[i];
    }

    constexpr double kTieEps = 1e-12;
    const auto lex_better = [](const std::array<double, 3>& a, const std::array<double, 3>& b) {
        for (std::size_t i = 0; i < 3; ++i) {
            if (a[i] > b[i] + kTieEps) return true;
            if (a[i] < b[i] - kTieEps) return false;
        }
        return false;
    };

    CalibrationResult best_feasible{};
    bool have_feasible = false;
    std::array<double, 3> best_feasible_key{};  // (min_margin, lambda_task, lambda_image)
    CalibrationResult best_fallback{};
    bool have_fallback = false;
    std::array<double, 4> best_fallback_key{};  // (tau, min_margin, lambda_task, lambda_image)

    for (int i = 0; i <= steps; ++i) {
        for (int j = 0; j <= steps - i; ++j) {
            const int k = steps - i - j;
            WeightVector w;
            w.lambda_text = static_cast<double>(i) / steps;
            w.lambda_image = static_cast<double>(j) / steps;
            w.lambda_task = static_cast<double>(k) / steps;

            std::array<double, 5> s{};
            for (std::size_t r = 0; r < 5; ++r) {
                s[r] = w.lambda_text * by_rank[r].s_text + w.lambda_image * by_rank[r].s_image +
                       w.lambda_task * by_rank[r].s_task;
            }
            double min_margin = s[1] - s[0];
            bool monotone = true;
            for (std::size_t r = 0; r + 1 < 5; ++r) {
                const double margin = s[r + 1] - s[r];
                min_margin = std::min(min_margin, margin);
                if (!(margin > 0.0)) monotone = false;
            }
            const double tau = kendall_tau_vs_ranks(s);

            if (monotone) {
                const std::array<double, 3> key{min_margin, w.lambda_task, w.lambda_image};
                if (!have_feasible || lex_better(key, best_feasible_key)) {
                    have_feasible = true;
                    best_feasible_key = key;
                    best_feasible = CalibrationResult{w, min_margin, true, tau};
                }
            }
            const std::array<double, 4> fkey{tau, min_margin, w.lambda_task, w.lambda_image};
            const auto lex_better4 = [&](const std::array<double, 4>& a, const std::array<double, 4>& b) {
                for (std::size_t x = 0; x < 4; ++x) {
                    if (a[x] > b[x] + kTieEps) return true;
                    if (a[x] < b[x] - kTieEps) return false;
                }
                return false;
            };
            if (!have_fallback || lex_better4(fkey, best_fallback_key)) {
                have_fallback = true;
                best_fallback_key = fkey;
                best_fallback = CalibrationResult{w, min_margin, false, tau};
            }
        }
    }
    return have_feasible ? best_feasible : best_fallback;
}

namespace {

json weights_to_json(const WeightVector& w) {
    return json{{"lambda_text", w.lambda_text},
                {"lambda_image", w.lambda_image},
                {"lambda_task", w.lambda_task}};
}

WeightVector weights_from_json(const json& j) {
    WeightVector w;
    w.lambda_text = j.at("lambda_text").get<double>();
    w.lambda_image = j.at("lambda_image").get<double>();
    w.lambda_task = j.at("lambda_task").get<double>();
    validate_weights(w);
    return w;
}

json config_to_json(const ScoringConfig& c) {
    return json{{"normalization", to_string(c.norm)},
                {"beta", c.gap.beta},
                {"delta", c.gap.delta},
                {"delta_on_raw_large_loss", c.gap.delta_on_raw_large_loss},
                {"entropy_norm_bits", ScoringConfig::entropy_norm_bits},
                {"caps",
                 {{"token_length", c.caps.token_length},
                  {"ttr", c.caps.ttr},
                  {"perplexity", c.caps.perplexity},
                  {"text_density", c.caps.text_density},
                  {"object_density", c.caps.object_density}}}};
}

ScoringConfig config_from_json(const json& j) {
    ScoringConfig c;
    c.norm = norm_mode_from_string(j.at("normalization").get<std::string>());
    c.gap.beta = j.at("beta").get<double>();
    c.gap.delta = j.at("delta").get<double>();
    c.gap.delta_on_raw_large_loss = j.value("delta_on_raw_large_loss", false);
    const auto& caps = j.at("caps");
    c.caps.token_length = caps.at("token_length").get<double>();
    c.caps.ttr = caps.at("ttr").get<double>();
    c.caps.perplexity = caps.at("perplexity").get<double>();
    c.caps.text_density = caps.at("text_density").get<double>();
    c.caps.object_density = caps.at("object_density").get<double>();
    return c;
}

}  // namespace

std::string report_to_json(const ComplexityReport& report) {
    json j;
    j["dataset"] = report.dataset;
    j["category"] = report.category ? json(to_string(*report.category)) : json(nullptr);
    j["sample_count"] = report.sample_count;
    j["weights"] = weights_to_json(report.weights);
    json axes;
    if (report.text) {
        axes["text"] = {{"raw",
                         {{"token_length", report.text->token_length_raw},
                          {"ttr", report.text->ttr_raw},
                          {"perplexity", report.text->perplexity_raw}}},
                        {"normalized",
                         {{"token_length", report.text->token_length_norm},
                          {"ttr", report.text->ttr_norm},
                          {"perplexity", report.text->perplexity_norm}}},
                        {"score", report.text->score}};
    } else {
        axes["text"] = nullptr;
    }
    if (report.image) {
        axes["image"] = {{"raw",
                          {{"entropy", report.image->entropy_raw},
                           {"text_density", report.image->text_density_raw},
                           {"object_density", report.image->object_density_raw}}},
                         {"normalized",
                          {{"entropy", report.image->entropy_norm},
                           {"text_density", report.image->text_density_norm},
                           {"object_density", report.image->object_density_norm}}},
                         {"score", report.image->score}};
    } else {
        axes["image"] = nullptr;
    }
    if (report.task) {
        axes["task"] = {{"c_small_mid", report.task->c_small_mid},
                        {"c_mid_large", report.task->c_mid_large},
                        {"score", report.task->score}};
    } else {
        axes["task"] = nullptr;
    }
    j["axes"] = axes;
    j["composite"] = report.composite;
    j["omissions"] = report.omissions;
    j["config"] = config_to_json(report.config);
    return j.dump(2);
}

ComplexityReport report_from_json(const std::string& json_text) {
    const json j = json::parse(json_text);
    ComplexityReport report;
    report.dataset = j.at("dataset").get<std::string>();
    if (!j.at("category").is_null()) {
        report.category = parse_task_category(j.at("category").get<std::string>());
    }
    report.sample_count = j.at("sample_count").get<std::size_t>();
    report.weights = weights_from_json(j.at("weights"));
    const json& axes = j.at("axes");
    if (!axes.at("text").is_null()) {
        const json& t = axes.at("text");
        TextAxis axis;
        axis.token_length_raw = t.at("raw").at("token_length").get<double>();
        axis.ttr_raw = t.at("raw").at("ttr").get<double>();
        axis.perplexity_raw = t.at("raw").at("perplexity").get<double>();
        axis.token_length_norm = t.at("normalized").at("token_length").get<double>();
        axis.ttr_norm = t.at("normalized").at("ttr").get<double>();
        axis.perplexity_norm = t.at("normalized").at("perplexity").get<double>();
        axis.score = t.at("score").get<double>();
        report.text = axis;
    }
    if (!axes.at("image").is_null()) {
        const json& m = axes.at("image");
        ImageAxis axis;
        axis.entropy_raw = m.at("raw").at("entropy").get<double>();
        axis.text_density_raw = m.at("raw").at("text_density").get<double>();
        axis.object_density_raw = m.at("raw").at("object_density").get<double>();
        axis.entropy_norm = m.at("normalized").at("entropy").get<double>();
        axis.text_density_norm = m.at("normalized").at("text_density").get<double>();
        axis.object_density_norm = m.at("normalized").at("object_density").get<double>();
        axis.score = m.at("score").get<double>();
        report.image = axis;
    }
    if (!axes.at("task").is_null()) {
        const json& t = axes.at("task");
        TaskAxis axis;
        axis.c_small_mid = t.at("c_small_mid").get<double>();
        axis.c_mid_large = t.at("c_mid_large").get<double>();
        axis.score = t.at("score").get<double>();
        report.task = axis;
    }
    report.composite = j.at("composite").get<double>();
    report.omissions = j.at("omissions").get<std::vector<std::string>>();
    report.config = config_from_json(j.at("config"));
    return report;
}

WeightsTable WeightsConfig::table() const {
    WeightsTable t;
    if (fallback) t.fallback = *fallback;
    for (const auto& [cat, entry] : categories) t.by_category[cat] = entry.weights;
    return t;
}

WeightsConfig load_weights_config(const std::string& path) {
    const json j = json::parse(io::read_file(path));
    WeightsConfig config;
    if (j.contains("default") && !j.at("default").is_null()) {
        config.fallback = weights_from_json(j.at("default"));
    }
    if (j.contains("categories")) {
        for (const auto& [label, value] : j.at("categories").items()) {
            WeightsConfigEntry entry;
            entry.weights = weights_from_json(value);
            if (value.contains("feasible")) entry.feasible = value.at("feasible").get<bool>();
            if (value.contains("min_margin")) entry.min_margin = value.at("min_margin").get<double>();
            if (value.contains("kendall_tau")) entry.kendall_tau = value.at("kendall_tau").get<double>();
            config.categories[parse_task_category(label)] = entry;
        }
    }
    return config;
}

void write_weights_config(const WeightsConfig& config, const std::string& path) {
    json j;
    if (config.fallback) j["default"] = weights_to_json(*config.fallback);
    json cats = json::object();
    for (const auto& [cat, entry] : config.categories) {
        json e = weights_to_json(entry.weights);
        if (entry.feasible) e["feasible"] = *entry.feasible;
        if (entry.min_margin) e["min_margin"] = *entry.min_margin;
        if (entry.kendall_tau) e["kendall_tau"] = *entry.kendall_tau;
        cats[to_string(cat)] = e;
    }
    j["categories"] = cats;
    io::write_file(path, j.dump(2) + "\n");
}

}  // namespace vlcurate
