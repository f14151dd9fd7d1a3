#include "vlcurate/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <memory>
#include <random>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "ioutil.hpp"
#include "vlcurate/imagestats.hpp"
#include "vlcurate/oracles.hpp"
#include "vlcurate/textstats.hpp"

namespace vlcurate {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json run_config_json(const RunConfig& run) {
    json schemes = json::array();
    for (const Scheme s : run.schemes) schemes.push_back(to_string(s));
    return json{
        {"manifests", run.manifests},
        {"sidecars", run.sidecars},
        {"filter_config", run.filter_config},
        {"weights_config", run.weights_config},
        {"beta", run.gap.beta},
        {"delta", run.gap.delta},
        {"delta_on_raw_large_loss", run.gap.delta_on_raw_large_loss},
        {"norm", to_string(run.norm)},
        {"resolution",
         {{"patch_size", run.resolution.patch_size},
          {"pixel_shuffle_ratio", run.resolution.pixel_shuffle_ratio},
          {"encoder_input", run.resolution.encoder_input},
          {"max_tiles", run.resolution.max_tiles},
          {"snap_mode", run.resolution.snap_mode == ResolutionConfig::SnapMode::nearest
                            ? "nearest"
                            : "pad_up_only"}}},
        {"split_policy",
         {{"kind", run.split.kind == SplitPolicy::Kind::median ? "median" : "threshold"},
          {"threshold", run.split.threshold}}},
        {"scale_factor", run.scale_factor},
        {"seed", run.seed},
        {"out", run.out_dir},
        {"schemes", schemes},
    };
}

// All command outputs are staged in memory and written together, so a
// failure part-way through a command leaves no partial output tree.
class OutputSet {
public:
    void add(const fs::path& path, std::string content) {
        entries_.emplace_back(path, std::move(content));
    }

    void commit() {
        std::vector<fs::path> written;
        try {
            for (const auto& [path, content] : entries_) {
                fs::create_directories(path.parent_path());
                io::write_file(path.string(), content);
                written.push_back(path);
            }
        } catch (...) {
            std::error_code ec;
            for (const auto& path : written) fs::remove(path, ec);
            throw;
        }
    }

private:
    std::vector<std::pair<fs::path, std::string>> entries_;
};

std::uint64_t mix_seed(std::uint64_t seed, int stage_index, const std::string& dataset) {
    std::uint64_t hash = 14695981039346656037ULL;
    const auto feed = [&hash](const void* data, std::size_t n) {
        const auto* bytes = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            hash ^= bytes[i];
            hash *= 1099511628211ULL;
        }
    };
    feed(&seed, sizeof(seed));
    feed(&stage_index, sizeof(stage_index));
    feed(dataset.data(), dataset.size());
    return hash;
}

FilterConfig load_run_filter_config(const RunConfig& run) {
    if (run.filter_config.empty()) return FilterConfig{};
    const json j = json::parse(io::read_file(run.filter_config));
    FilterConfig cfg = filter_config_from_json(j.dump());
    // The blocklist can live in a companion plain-text file, one keyword
    // per line, referenced from the config.
    if (j.contains("keyword_blocklist_path")) {
        const fs::path base = fs::path(run.filter_config).parent_path();
        const fs::path list = base / j.at("keyword_blocklist_path").get<std::string>();
        for (auto& keyword : load_blocklist(list.string())) {
            cfg.keyword_blocklist.push_back(std::move(keyword));
        }
    }
    return cfg;
}

const std::string* sidecar_for(const RunConfig& run, std::size_t manifest_index) {
    if (run.sidecars.empty()) return nullptr;
    if (run.sidecars.size() == 1) return &run.sidecars.front();
    if (run.sidecars.size() == run.manifests.size()) return &run.sidecars[manifest_index];
    throw std::runtime_error("expected one sidecar in total or one per manifest");
}

// Loads a manifest, merges its sidecar and splits it by per-sample category
// labels when the sidecar provides them.
std::vector<DatasetManifest> load_parts(const RunConfig& run, std::size_t manifest_index,
                                        std::ostream& diag) {
    DatasetManifest manifest = load_manifest(run.manifests[manifest_index]);
    const std::string* sidecar = sidecar_for(run, manifest_index);
    std::map<std::string, TaskCategory> labels;
    if (sidecar) {
        AttachResult attached = attach_annotations(manifest, *sidecar);
        for (const auto& warning : attached.warnings) diag << "warning: " << warning << "\n";
        manifest = std::move(attached.manifest);
        labels = load_per_sample_labels(*sidecar);
    }
    if (labels.empty()) return {std::move(manifest)};
    return categorize(manifest, nullptr, &labels);
}

struct ScoredBatch {
    std::vector<DatasetManifest> parts;
    std::vector<std::unique_ptr<UnigramPerplexityOracle>> ppl_oracles;
    AnnotationCountOracle ocr{CountKind::ocr_tokens};
    AnnotationCountOracle detector{CountKind::objects};
    std::vector<ComplexityReport> reports;
};

ScoredBatch score_all(const RunConfig& run, std::ostream& diag) {
    if (run.manifests.empty()) throw std::runtime_error("no input manifests");
    ScoredBatch batch;
    for (std::size_t i = 0; i < run.manifests.size(); ++i) {
        for (auto& part : load_parts(run, i, diag)) batch.parts.push_back(std::move(part));
    }
    std::vector<std::string> names;
    for (const auto& part : batch.parts) names.push_back(part.name);
    std::sort(names.begin(), names.end());
    if (std::adjacent_find(names.begin(), names.end()) != names.end()) {
        throw std::runtime_error("duplicate dataset name across inputs");
    }

    WeightsTable weights;
    if (!run.weights_config.empty()) weights = load_weights_config(run.weights_config).table();

    ScoringConfig config;
    config.norm = run.norm;
    config.gap = run.gap;

    std::vector<ScoreRequest> requests;
    for (const auto& part : batch.parts) {
        batch.ppl_oracles.push_back(std::make_unique<UnigramPerplexityOracle>(part));
        ScoreRequest req;
        req.manifest = &part;
        req.perplexity = batch.ppl_oracles.back().get();
        req.ocr = &batch.ocr;
        req.detector = &batch.detector;
        requests.push_back(req);
    }
    std::vector<std::string> warnings;
    batch.reports = score_batch(requests, weights, config, &warnings);
    for (const auto& warning : warnings) diag << "warning: " << warning << "\n";
    return batch;
}

json report_with_run_config(const std::string& report_json, const RunConfig& run) {
    json j = json::parse(report_json);
    j["run_config"] = run_config_json(run);
    return j;
}

}  // namespace

std::string run_config_to_json(const RunConfig& run) { return run_config_json(run).dump(2); }

void cmd_filter(const RunConfig& run, std::ostream& diag) {
    if (run.manifests.empty()) throw std::runtime_error("no input manifests");
    if (run.out_dir.empty()) throw std::runtime_error("no output directory");
    const FilterConfig cfg = load_run_filter_config(run);

    OutputSet outputs;
    for (std::size_t i = 0; i < run.manifests.size(); ++i) {
        DatasetManifest manifest = load_manifest(run.manifests[i]);
        if (const std::string* sidecar = sidecar_for(run, i)) {
            AttachResult attached = attach_annotations(manifest, *sidecar);
            for (const auto& warning : attached.warnings) diag << "warning: " << warning << "\n";
            manifest = std::move(attached.manifest);
        }
        const FilterOutcome outcome = run_pipeline(manifest, cfg);

        const fs::path dir = fs::path(run.out_dir) / "filter";
        std::ostringstream kept;
        for (const auto& s : outcome.kept.samples) {
            json rec;
            rec["id"] = s.id;
            rec["prompt"] = s.prompt;
            rec["response"] = s.response;
            if (const auto* ref = std::get_if<ImageFileRef>(&s.image)) {
                rec["image_path"] = ref->path;
            } else if (const auto* inl = std::get_if<InlineImage>(&s.image)) {
                rec["image"] = {{"width", inl->width},
                                {"height", inl->height},
                                {"pixels_path", inl->pixels_path}};
            }
            kept << rec.dump() << '\n';
        }
        outputs.add(dir / (manifest.name + ".kept.jsonl"), kept.str());

        json report = report_with_run_config(filter_report_to_json(outcome.report, cfg), run);
        outputs.add(dir / (manifest.name + ".report.json"), report.dump(2) + "\n");

        diag << manifest.name << ": kept " << outcome.report.kept << "/" << outcome.report.total
             << "\n";
    }
    outputs.commit();
}

void cmd_score(const RunConfig& run, std::ostream& diag) {
    if (run.out_dir.empty()) throw std::runtime_error("no output directory");
    const ScoredBatch batch = score_all(run, diag);

    OutputSet outputs;
    const fs::path dir = fs::path(run.out_dir) / "score";
    for (const auto& report : batch.reports) {
        const json doc = report_with_run_config(report_to_json(report), run);
        outputs.add(dir / (report.dataset + ".report.json"), doc.dump(2) + "\n");
    }

    // Batch summary, hardest first.
    std::vector<std::size_t> order(batch.reports.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& ra = batch.reports[a];
        const auto& rb = batch.reports[b];
        if (ra.composite != rb.composite) return ra.composite > rb.composite;
        return ra.dataset < rb.dataset;
    });
    json ranking = json::array();
    for (const std::size_t i : order) {
        const auto& r = batch.reports[i];
        ranking.push_back({{"dataset", r.dataset},
                           {"category", r.category ? json(to_string(*r.category)) : json(nullptr)},
                           {"composite", r.composite}});
    }
    json summary;
    summary["ranking"] = ranking;
    summary["run_config"] = run_config_json(run);
    outputs.add(dir / "summary.json", summary.dump(2) + "\n");
    outputs.commit();

    for (const std::size_t i : order) {
        diag << batch.reports[i].dataset << ": S = " << batch.reports[i].composite << "\n";
    }
}

void cmd_calibrate(const RunConfig& run, const CalibrateArgs& args, std::ostream& diag) {
    if (args.report_paths.size() != 5) {
        throw std::runtime_error("calibrate needs exactly 5 ranked subset reports");
    }
    if (run.weights_config.empty()) throw std::runtime_error("no weights config path");

    RankedSubsets ranked;
    ranked.category = args.category;
    std::vector<AxisScores> scores;
    for (std::size_t i = 0; i < args.report_paths.size(); ++i) {
        const ComplexityReport report = report_from_json(io::read_file(args.report_paths[i]));
        if (!report.text || !report.image || !report.task) {
            throw std::runtime_error("report '" + report.dataset +
                                     "': all three axis scores are required for calibration");
        }
        ranked.entries.push_back({report.dataset, static_cast<int>(i) + 1});
        scores.push_back({report.text->score, report.image->score, report.task->score});
    }

    const CalibrationResult result = calibrate_weights(ranked, scores, args.grid_step);

    WeightsConfig config;
    if (fs::exists(run.weights_config)) config = load_weights_config(run.weights_config);
    WeightsConfigEntry entry;
    entry.weights = result.weights;
    entry.feasible = result.feasible;
    entry.min_margin = result.min_margin;
    entry.kendall_tau = result.kendall_tau;
    config.categories[args.category] = entry;
    write_weights_config(config, run.weights_config);

    diag << "category " << to_string(args.category) << ": lambda = (" << result.weights.lambda_text
         << ", " << result.weights.lambda_image << ", " << result.weights.lambda_task
         << "), feasible = " << (result.feasible ? "true" : "false")
         << ", min_margin = " << result.min_margin << ", kendall_tau = " << result.kendall_tau
         << "\n";

    if (args.require_margin && (!result.feasible || result.min_margin < *args.require_margin)) {
        std::ostringstream msg;
        msg << "calibration gate failed: feasible = " << (result.feasible ? "true" : "false")
            << ", min_margin = " << result.min_margin << " < required " << *args.require_margin;
        throw std::runtime_error(msg.str());
    }
}

void cmd_plan_tiles_single(const RunConfig& run, int width, int height, std::ostream& out) {
    const TilePlan plan = plan_tiles(width, height, run.resolution);
    out << tile_plan_to_json(plan, run.resolution) << "\n";
}

void cmd_plan_tiles_batch(const RunConfig& run, std::istream& sizes, std::ostream& out) {
    std::vector<Scheme> schemes = run.schemes;
    if (schemes.empty()) {
        schemes = {Scheme::magicvl, Scheme::fixed_multiple_grid, Scheme::fixed_width_grid};
    }

    out << std::left << std::setw(8) << "width" << std::setw(8) << "height" << std::setw(22)
        << "scheme" << std::setw(14) << "resized" << std::setw(8) << "tiles" << "tokens\n";

    std::map<Scheme, long long> totals;
    json rows = json::array();
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(sizes, line)) {
        ++line_no;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream fields(line);
        int width = 0, height = 0;
        if (!(fields >> width >> height)) {
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            throw std::runtime_error("sizes input line " + std::to_string(line_no) +
                                     ": expected 'width height'");
        }
        for (const Scheme scheme : schemes) {
            const TokenBudget budget = compare_schemes(width, height, run.resolution, scheme);
            totals[scheme] += budget.tokens;
            std::ostringstream resized;
            resized << budget.resized_width << "x" << budget.resized_height;
            out << std::left << std::setw(8) << width << std::setw(8) << height << std::setw(22)
                << to_string(scheme) << std::setw(14) << resized.str() << std::setw(8)
                << budget.tiles << budget.tokens << "\n";
            rows.push_back({{"width", width},
                            {"height", height},
                            {"scheme", to_string(scheme)},
                            {"resized_width", budget.resized_width},
                            {"resized_height", budget.resized_height},
                            {"tiles", budget.tiles},
                            {"tokens", budget.tokens}});
        }
    }
    for (const Scheme scheme : schemes) {
        out << "total " << to_string(scheme) << ": " << totals[scheme] << " tokens\n";
    }

    if (!run.out_dir.empty()) {
        json doc;
        doc["budgets"] = rows;
        json totals_json = json::object();
        for (const auto& [scheme, total] : totals) totals_json[to_string(scheme)] = total;
        doc["totals"] = totals_json;
        doc["run_config"] = run_config_json(run);
        OutputSet outputs;
        outputs.add(fs::path(run.out_dir) / "plan_tiles" / "budgets.json", doc.dump(2) + "\n");
        outputs.commit();
    }
}

void cmd_schedule(const RunConfig& run, std::ostream& diag) {
    if (run.out_dir.empty()) throw std::runtime_error("no output directory");
    const ScoredBatch batch = score_all(run, diag);
    CurriculumPlan plan = build_plan(batch.reports, run.scale_factor, run.split);
    plan.shared.max_tiles = run.resolution.max_tiles;

    std::map<std::string, const DatasetManifest*> parts_by_name;
    for (const auto& part : batch.parts) parts_by_name[part.name] = &part;

    OutputSet outputs;
    const fs::path dir = fs::path(run.out_dir) / "schedule";
    outputs.add(dir / "training_config.json", emit_config(plan, run_config_to_json(run)));

    const PackLimits limits{plan.shared.max_pack_tokens, plan.shared.max_pack_images};
    for (std::size_t s = 0; s < plan.stages.size(); ++s) {
        const StageSpec& stage = plan.stages[s];
        const auto& datasets = plan.stage_datasets[s];

        // Proportional quotas by dataset size (largest remainder), capped by
        // the stage budget.
        std::int64_t available = 0;
        for (const auto& name : datasets) {
            available += static_cast<std::int64_t>(parts_by_name.at(name)->samples.size());
        }
        const std::int64_t budget = std::min<std::int64_t>(stage.sample_budget, available);
        std::vector<std::int64_t> quotas(datasets.size(), 0);
        if (available > 0 && budget > 0) {
            std::vector<std::pair<double, std::size_t>> remainders;
            std::int64_t assigned = 0;
            for (std::size_t d = 0; d < datasets.size(); ++d) {
                const auto size = static_cast<double>(parts_by_name.at(datasets[d])->samples.size());
                const double exact = static_cast<double>(budget) * size / static_cast<double>(available);
                quotas[d] = static_cast<std::int64_t>(std::floor(exact));
                assigned += quotas[d];
                remainders.push_back({exact - std::floor(exact), d});
            }
            std::stable_sort(remainders.begin(), remainders.end(),
                             [](const auto& a, const auto& b) { return a.first > b.first; });
            for (std::size_t r = 0; assigned < budget && r < remainders.size(); ++r) {
                ++quotas[remainders[r].second];
                ++assigned;
            }
        }

        // Seeded deterministic draw per dataset, then token costing.
        std::vector<PackItem> items;
        json draws = json::array();
        for (std::size_t d = 0; d < datasets.size(); ++d) {
            const DatasetManifest& part = *parts_by_name.at(datasets[d]);
            std::vector<std::size_t> indices(part.samples.size());
            for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;
            std::mt19937_64 rng(mix_seed(run.seed, stage.index, part.name));
            std::shuffle(indices.begin(), indices.end(), rng);
            const auto quota = static_cast<std::size_t>(quotas[d]);
            draws.push_back({{"dataset", part.name}, {"drawn", quota}});
            for (std::size_t i = 0; i < quota; ++i) {
                const Sample& sample = part.samples[indices[i]];
                PackItem item;
                item.id = part.name + "/" + sample.id;
                item.text_tokens = static_cast<std::int64_t>(tokenize(sample.prompt).size() +
                                                             tokenize(sample.response).size());
                if (sample.has_image()) {
                    const auto [w, h] = image_dims(sample);
                    const TilePlan tile_plan = plan_tiles(w, h, run.resolution);
                    item.image_tokens.push_back(tile_plan.retained_tokens);
                }
                items.push_back(std::move(item));
            }
        }
        const std::vector<Pack> packs = pack_batches(items, limits);

        json packs_json = json::array();
        for (const auto& pack : packs) {
            packs_json.push_back({{"samples", pack.sample_ids},
                                  {"total_tokens", pack.total_tokens},
                                  {"total_images", pack.total_images}});
        }
        json doc;
        doc["stage"] = stage.index;
        doc["name"] = stage.name;
        doc["sample_budget"] = stage.sample_budget;
        doc["dataset_draws"] = draws;
        doc["packs"] = packs_json;
        doc["run_config"] = run_config_json(run);
        outputs.add(dir / ("stage" + std::to_string(stage.index) + ".packs.json"), doc.dump(2) + "\n");

        diag << "stage " << stage.index << ": " << items.size() << " samples in " << packs.size()
             << " packs\n";
    }
    outputs.commit();
}

void cmd_report(const std::vector<std::string>& report_paths, const std::string& out_path,
                std::ostream& out) {
    std::vector<ComplexityReport> reports;
    for (const auto& path : report_paths) {
        reports.push_back(report_from_json(io::read_file(path)));
    }
    std::sort(reports.begin(), reports.end(), [](const ComplexityReport& a, const ComplexityReport& b) {
        if (a.composite != b.composite) return a.composite > b.composite;
        return a.dataset < b.dataset;
    });

    std::ostringstream md;
    md << "| dataset | category | S_text | S_image | S_task | S | weights (t/i/k) |\n";
    md << "|---|---|---|---|---|---|---|\n";
    const auto cell = [](const std::optional<double>& v) {
        if (!v) return std::string("-");
        std::ostringstream s;
        s << std::fixed << std::setprecision(4) << *v;
        return s.str();
    };
    for (const auto& r : reports) {
        md << "| " << r.dataset << " | " << (r.category ? to_string(*r.category) : "-") << " | "
           << cell(r.text ? std::optional<double>(r.text->score) : std::nullopt) << " | "
           << cell(r.image ? std::optional<double>(r.image->score) : std::nullopt) << " | "
           << cell(r.task ? std::optional<double>(r.task->score) : std::nullopt) << " | "
           << cell(r.composite) << " | " << std::fixed << std::setprecision(2)
           << r.weights.lambda_text << "/" << r.weights.lambda_image << "/" << r.weights.lambda_task
           << " |\n";
    }
    if (out_path.empty()) {
        out << md.str();
    } else {
        io::write_file(out_path, md.str());
    }
}

}  // namespace vlcurate
