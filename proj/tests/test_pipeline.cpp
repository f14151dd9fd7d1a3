#include <doctest.h>

#include <filesystem>
#include <sstream>

#include <nlohmann/json.hpp>

#include "testutil.hpp"
#include "vlcurate/pipeline.hpp"

using namespace vlcurate;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Writes a small annotated two-dataset corpus; returns the run config.
RunConfig write_corpus(const testutil::TempDir& dir) {
    std::ostringstream caption_manifest, caption_sidecar;
    std::ostringstream mixed_manifest, mixed_sidecar;
    for (int i = 0; i < 6; ++i) {
        const std::string id = "c" + std::to_string(i);
        json rec;
        rec["id"] = id;
        rec["prompt"] = "Describe image " + std::to_string(i) + ".";
        rec["response"] = "A scene with object " + std::to_string(i) + " and some detail.";
        caption_manifest << rec.dump() << "\n";
        json side;
        side["id"] = id;
        side["perplexity"] = 2.0 + i;
        side["loss_small"] = 2.0 + 0.2 * i;
        side["loss_mid"] = 1.0 + 0.1 * i;
        side["loss_large"] = 0.5;
        side["category"] = "caption";
        caption_sidecar << side.dump() << "\n";
    }
    for (int i = 0; i < 6; ++i) {
        const std::string id = "m" + std::to_string(i);
        json rec;
        rec["id"] = id;
        rec["prompt"] = "Read the text in image " + std::to_string(i) + ".";
        rec["response"] = "The sign says number " + std::to_string(i) + " quite clearly.";
        mixed_manifest << rec.dump() << "\n";
        json side;
        side["id"] = id;
        side["perplexity"] = 3.0 + i;
        side["loss_small"] = 1.0 + 0.3 * i;
        side["loss_mid"] = 0.8 + 0.1 * i;
        side["loss_large"] = 0.4;
        side["category"] = i < 3 ? "ocr" : "caption";
        mixed_sidecar << side.dump() << "\n";
    }
    testutil::write_file(dir.file("captions.jsonl"), caption_manifest.str());
    testutil::write_file(dir.file("captions.sidecar.jsonl"), caption_sidecar.str());
    testutil::write_file(dir.file("mixed.jsonl"), mixed_manifest.str());
    testutil::write_file(dir.file("mixed.sidecar.jsonl"), mixed_sidecar.str());

    RunConfig run;
    run.manifests = {dir.file("captions.jsonl"), dir.file("mixed.jsonl")};
    run.sidecars = {dir.file("captions.sidecar.jsonl"), dir.file("mixed.sidecar.jsonl")};
    run.out_dir = dir.file("out");
    // Text-and-task scoring only; this corpus has no images.
    run.gap.beta = 1.2;
    run.gap.delta = 0.5;
    return run;
}

WeightVector text_task_weights() { return WeightVector{0.5, 0.0, 0.5}; }

void write_weights(const testutil::TempDir& dir, RunConfig& run) {
    WeightsConfig config;
    config.fallback = text_task_weights();
    run.weights_config = dir.file("weights.json");
    write_weights_config(config, run.weights_config);
}

}  // namespace

TEST_CASE("cmd_filter writes kept manifests and reports") {
    testutil::TempDir dir;
    std::ostringstream manifest;
    manifest << json{{"id", "good"},
                     {"prompt", "What does the sign say?"},
                     {"response", "It lists the opening hours of the museum."}}
                    .dump()
             << "\n";
    manifest << json{{"id", "dots"},
                     {"prompt", "Describe."},
                     {"response", "dots, dots, dots, dots, dots, dots, dots, dots"}}
                    .dump()
             << "\n";
    testutil::write_file(dir.file("data.jsonl"), manifest.str());

    RunConfig run;
    run.manifests = {dir.file("data.jsonl")};
    run.out_dir = dir.file("out");
    std::ostringstream diag;
    cmd_filter(run, diag);

    const DatasetManifest kept = load_manifest(dir.file("out/filter/data.kept.jsonl"));
    REQUIRE(kept.samples.size() == 1);
    CHECK(kept.samples[0].id == "good");

    const json report = json::parse(testutil::read_file(dir.file("out/filter/data.report.json")));
    CHECK(report.at("total") == 2);
    CHECK(report.at("kept") == 1);
    CHECK(report.at("rule_counts").at("frequent_phrase") == 1);
    CHECK(report.contains("run_config"));
    CHECK(report.at("run_config").at("seed") == 0);
}

TEST_CASE("cmd_filter honors a filter config with a companion blocklist file") {
    testutil::TempDir dir;
    std::ostringstream manifest;
    manifest << json{{"id", "ai"},
                     {"prompt", "q"},
                     {"response", "As an AI language model I cannot view images."}}
                    .dump()
             << "\n";
    manifest << json{{"id", "ok"}, {"prompt", "q"}, {"response", "A dog chasing a ball."}}.dump()
             << "\n";
    testutil::write_file(dir.file("data.jsonl"), manifest.str());
    testutil::write_file(dir.file("blocklist.txt"), "as an ai language model\n");
    testutil::write_file(dir.file("filter.json"),
                         R"({"max_abnormal_char_ratio":0.2,"keyword_blocklist_path":"blocklist.txt"})");

    RunConfig run;
    run.manifests = {dir.file("data.jsonl")};
    run.filter_config = dir.file("filter.json");
    run.out_dir = dir.file("out");
    std::ostringstream diag;
    cmd_filter(run, diag);

    const DatasetManifest kept = load_manifest(dir.file("out/filter/data.kept.jsonl"));
    REQUIRE(kept.samples.size() == 1);
    CHECK(kept.samples[0].id == "ok");
    const json report = json::parse(testutil::read_file(dir.file("out/filter/data.report.json")));
    CHECK(report.at("rule_counts").at("keyword") == 1);
}

TEST_CASE("cmd_filter leaves no outputs behind on failure") {
    testutil::TempDir dir;
    RunConfig run;
    run.manifests = {dir.file("absent.jsonl")};
    run.out_dir = dir.file("out");
    std::ostringstream diag;
    CHECK_THROWS(cmd_filter(run, diag));
    CHECK_FALSE(fs::exists(dir.file("out")));
}

TEST_CASE("cmd_score writes per-dataset reports and a ranked summary") {
    testutil::TempDir dir;
    RunConfig run = write_corpus(dir);
    write_weights(dir, run);
    std::ostringstream diag;
    cmd_score(run, diag);

    // Per-sample labels split "mixed" into ocr and caption parts.
    CHECK(fs::exists(dir.file("out/score/captions.report.json")));
    CHECK(fs::exists(dir.file("out/score/mixed.ocr.report.json")));
    CHECK(fs::exists(dir.file("out/score/mixed.caption.report.json")));

    const json summary = json::parse(testutil::read_file(dir.file("out/score/summary.json")));
    REQUIRE(summary.at("ranking").size() == 3);
    double previous = 2.0;
    for (const auto& row : summary.at("ranking")) {
        const double s = row.at("composite").get<double>();
        CHECK(s <= previous);
        previous = s;
    }
    CHECK(summary.at("run_config").at("beta") == 1.2);

    const ComplexityReport report =
        report_from_json(testutil::read_file(dir.file("out/score/captions.report.json")));
    CHECK(report.category == TaskCategory::caption);
    CHECK(report.text.has_value());
    CHECK(report.task.has_value());
    CHECK_FALSE(report.image.has_value());
}

TEST_CASE("cmd_score reruns byte-identically") {
    testutil::TempDir dir;
    RunConfig run = write_corpus(dir);
    write_weights(dir, run);
    std::ostringstream diag;
    cmd_score(run, diag);
    const std::string first = testutil::read_file(dir.file("out/score/summary.json"));
    const std::string first_report = testutil::read_file(dir.file("out/score/captions.report.json"));
    fs::remove_all(dir.file("out"));
    cmd_score(run, diag);
    CHECK(testutil::read_file(dir.file("out/score/summary.json")) == first);
    CHECK(testutil::read_file(dir.file("out/score/captions.report.json")) == first_report);
}

TEST_CASE("cmd_score fails when a weighted axis has no inputs") {
    testutil::TempDir dir;
    RunConfig run = write_corpus(dir);
    // Uniform weights demand the image axis, but the corpus has no images.
    std::ostringstream diag;
    CHECK_THROWS_WITH_AS(cmd_score(run, diag), doctest::Contains("image axis"),
                         std::runtime_error);
    CHECK_FALSE(fs::exists(dir.file("out/score")));
}

TEST_CASE("cmd_calibrate writes a weights entry") {
    testutil::TempDir dir;

    // Five synthetic reports, strictly increasing task difficulty.
    std::vector<std::string> paths;
    for (int i = 0; i < 5; ++i) {
        ComplexityReport r;
        r.dataset = "subset" + std::to_string(i);
        r.category = TaskCategory::vqa;
        r.sample_count = 100;
        TextAxis text;
        text.score = 0.5;
        r.text = text;
        ImageAxis image;
        image.score = 0.5;
        r.image = image;
        TaskAxis task;
        task.score = 0.1 + 0.2 * i;
        r.task = task;
        r.weights = WeightVector::uniform();
        r.composite = composite_score(0.5, 0.5, task.score, r.weights);
        const std::string path = dir.file("subset" + std::to_string(i) + ".json");
        testutil::write_file(path, report_to_json(r));
        paths.push_back(path);
    }

    RunConfig run;
    run.weights_config = dir.file("weights.json");
    CalibrateArgs args;
    args.category = TaskCategory::vqa;
    args.report_paths = paths;
    std::ostringstream diag;
    cmd_calibrate(run, args, diag);

    const WeightsConfig config = load_weights_config(run.weights_config);
    const auto& entry = config.categories.at(TaskCategory::vqa);
    CHECK(entry.weights.lambda_task == 1.0);
    CHECK(*entry.feasible);
    CHECK(*entry.min_margin == doctest::Approx(0.2));

    // Four reports is a usage error.
    args.report_paths.pop_back();
    CHECK_THROWS(cmd_calibrate(run, args, diag));
}

TEST_CASE("cmd_plan_tiles batch handles empty input") {
    RunConfig run;
    std::istringstream empty("");
    std::ostringstream out;
    cmd_plan_tiles_batch(run, empty, out);
    CHECK(out.str().find("tokens") != std::string::npos);  // header only
}

TEST_CASE("cmd_plan_tiles single mode prints the plan document") {
    RunConfig run;
    std::ostringstream out;
    cmd_plan_tiles_single(run, 384, 384, out);
    const json plan = json::parse(out.str());
    CHECK(plan.at("retained_tokens") == 144);
    CHECK(plan.at("padded_tokens") == 0);
}

TEST_CASE("cmd_schedule emits a loadable plan and capped packs") {
    testutil::TempDir dir;
    RunConfig run = write_corpus(dir);
    write_weights(dir, run);
    run.scale_factor = 1e-6;
    run.seed = 7;
    std::ostringstream diag;
    cmd_schedule(run, diag);

    const std::string config_text =
        testutil::read_file(dir.file("out/schedule/training_config.json"));
    const CurriculumPlan plan = load_training_config(config_text);
    CHECK(plan.stages[0].sample_budget == 10);
    CHECK(plan.stages[3].sample_budget == 66);

    for (int stage = 1; stage <= 4; ++stage) {
        const json packs = json::parse(testutil::read_file(
            dir.file("out/schedule/stage" + std::to_string(stage) + ".packs.json")));
        CHECK(packs.at("run_config").at("seed") == 7);
        for (const auto& pack : packs.at("packs")) {
            CHECK(pack.at("total_tokens").get<std::int64_t>() <= 16384);
            CHECK(pack.at("total_images").get<int>() <= 48);
        }
    }
}

TEST_CASE("cmd_schedule is deterministic for a fixed seed") {
    testutil::TempDir dir;
    RunConfig run = write_corpus(dir);
    write_weights(dir, run);
    run.scale_factor = 1e-6;
    run.seed = 99;
    std::ostringstream diag;
    cmd_schedule(run, diag);
    const std::string first = testutil::read_file(dir.file("out/schedule/stage4.packs.json"));
    fs::remove_all(dir.file("out"));
    cmd_schedule(run, diag);
    CHECK(testutil::read_file(dir.file("out/schedule/stage4.packs.json")) == first);
}

TEST_CASE("cmd_report renders a markdown table") {
    testutil::TempDir dir;
    RunConfig run = write_corpus(dir);
    write_weights(dir, run);
    std::ostringstream diag;
    cmd_score(run, diag);

    std::ostringstream out;
    cmd_report({dir.file("out/score/captions.report.json"),
                dir.file("out/score/mixed.ocr.report.json")},
               "", out);
    const std::string table = out.str();
    CHECK(table.find("| dataset |") != std::string::npos);
    CHECK(table.find("captions") != std::string::npos);
    CHECK(table.find("mixed.ocr") != std::string::npos);

    cmd_report({dir.file("out/score/captions.report.json")}, dir.file("table.md"), out);
    CHECK(testutil::read_file(dir.file("table.md")).find("| dataset |") != std::string::npos);
}
