#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>

#include "vlcurate/curriculum.hpp"

using namespace vlcurate;

namespace {

ComplexityReport report_of(const std::string& name, double composite,
                           std::optional<TaskCategory> category = std::nullopt) {
    ComplexityReport r;
    r.dataset = name;
    r.composite = composite;
    r.category = category;
    return r;
}

std::vector<ComplexityReport> caption_batch() {
    return {
        report_of("cap_lo", 0.2, TaskCategory::caption),
        report_of("cap_hi", 0.8, TaskCategory::caption),
        report_of("ocr_lo", 0.3, TaskCategory::ocr),
        report_of("ocr_hi", 0.9, TaskCategory::ocr),
    };
}

}  // namespace

TEST_CASE("median split puts the lower half low") {
    std::vector<ComplexityReport> reports = {report_of("a", 0.2), report_of("b", 0.4),
                                             report_of("c", 0.6), report_of("d", 0.8)};
    const ComplexitySplit split = split_by_complexity(reports, SplitPolicy{});
    CHECK(split.low == std::vector<std::size_t>{0, 1});
    CHECK(split.high == std::vector<std::size_t>{2, 3});
    CHECK(split.thresholds.at("*") == doctest::Approx(0.5));
}

TEST_CASE("threshold split is inclusive on the low side") {
    std::vector<ComplexityReport> reports = {report_of("a", 0.5)};
    SplitPolicy policy;
    policy.kind = SplitPolicy::Kind::threshold;
    policy.threshold = 0.5;
    const ComplexitySplit split = split_by_complexity(reports, policy);
    CHECK(split.low == std::vector<std::size_t>{0});
    CHECK(split.high.empty());
}

TEST_CASE("a single dataset is low under the median policy") {
    std::vector<ComplexityReport> reports = {report_of("only", 0.73)};
    const ComplexitySplit split = split_by_complexity(reports, SplitPolicy{});
    CHECK(split.low == std::vector<std::size_t>{0});
    CHECK(split.high.empty());
}

TEST_CASE("median split works per category and partitions the input") {
    auto reports = caption_batch();
    const ComplexitySplit split = split_by_complexity(reports, SplitPolicy{});
    // Each category median splits its own pair.
    CHECK(split.thresholds.at("caption") == doctest::Approx(0.5));
    CHECK(split.thresholds.at("ocr") == doctest::Approx(0.6));

    std::vector<std::size_t> all = split.low;
    all.insert(all.end(), split.high.begin(), split.high.end());
    std::sort(all.begin(), all.end());
    CHECK(all == std::vector<std::size_t>{0, 1, 2, 3});
}

TEST_CASE("build_plan reproduces the four-stage constants at scale 1") {
    const CurriculumPlan plan = build_plan(caption_batch(), 1.0);

    CHECK(plan.stages[0].sample_budget == 10'000'000);
    CHECK(plan.stages[1].sample_budget == 23'000'000);
    CHECK(plan.stages[2].sample_budget == 54'000'000);
    CHECK(plan.stages[3].sample_budget == 66'000'000);

    CHECK(plan.stages[0].learning_rate == 2e-4);
    CHECK(plan.stages[1].learning_rate == 1e-5);
    CHECK(plan.stages[2].learning_rate == 4e-5);
    CHECK(plan.stages[3].learning_rate == 4e-5);

    CHECK(plan.stages[0].warmup.kind == Warmup::Kind::steps);
    CHECK(plan.stages[0].warmup.value == 100);
    CHECK(plan.stages[1].warmup.kind == Warmup::Kind::steps);
    CHECK(plan.stages[1].warmup.value == 100);
    CHECK(plan.stages[2].warmup.kind == Warmup::Kind::ratio);
    CHECK(plan.stages[2].warmup.value == 0.03);
    CHECK(plan.stages[3].warmup.kind == Warmup::Kind::ratio);
    CHECK(plan.stages[3].warmup.value == 0.03);

    CHECK(plan.stages[0].train_steps == 65'000);
    CHECK(plan.stages[1].train_steps == 90'000);
    CHECK(plan.stages[2].train_steps == 140'000);
    CHECK(plan.stages[3].train_steps == 250'000);

    CHECK(plan.stages[0].trainable == std::set<Component>{Component::projector});
    CHECK(plan.stages[1].trainable ==
          std::set<Component>{Component::visual_encoder, Component::projector});
    const std::set<Component> all = {Component::visual_encoder, Component::projector,
                                     Component::llm};
    CHECK(plan.stages[2].trainable == all);
    CHECK(plan.stages[3].trainable == all);

    CHECK(plan.shared.max_pack_tokens == 16384);
    CHECK(plan.shared.max_pack_images == 48);
    CHECK(plan.shared.max_tiles == 24);
    CHECK(plan.shared.optimizer == "AdamW");
    CHECK(plan.shared.lr_schedule == "cosine decay");

    // Stage data: 1-2 caption-only split, 3-4 everything by tier.
    CHECK(plan.stage_datasets[0] == std::vector<std::string>{"cap_lo"});
    CHECK(plan.stage_datasets[1] == std::vector<std::string>{"cap_hi"});
    CHECK(plan.stage_datasets[2] == std::vector<std::string>{"cap_lo", "ocr_lo"});
    CHECK(plan.stage_datasets[3] == std::vector<std::string>{"cap_hi", "ocr_hi"});
}

TEST_CASE("budgets and steps scale with ceiling and freeze flags do not") {
    const CurriculumPlan tiny = build_plan(caption_batch(), 1e-6);
    CHECK(tiny.stages[0].sample_budget == 10);
    CHECK(tiny.stages[1].sample_budget == 23);
    CHECK(tiny.stages[2].sample_budget == 54);
    CHECK(tiny.stages[3].sample_budget == 66);
    CHECK(tiny.stages[0].train_steps == 1);
    CHECK(tiny.stages[0].warmup.value == 1);  // scaled step counts floor at 1
    CHECK(tiny.stages[2].warmup.value == 0.03);  // ratios are scale-free
    CHECK(tiny.stages[0].trainable == std::set<Component>{Component::projector});
    CHECK(tiny.stages[0].learning_rate == 2e-4);

    const CurriculumPlan small = build_plan(caption_batch(), 1e-5);
    CHECK(small.stages[0].sample_budget == 100);
    CHECK(small.stages[3].sample_budget == 660);
}

TEST_CASE("build_plan requires caption data and a valid scale") {
    std::vector<ComplexityReport> no_caption = {report_of("ocr", 0.4, TaskCategory::ocr)};
    CHECK_THROWS_WITH_AS(build_plan(no_caption, 1.0), doctest::Contains("caption"),
                         std::runtime_error);
    CHECK_THROWS(build_plan(caption_batch(), 0.0));
    CHECK_THROWS(build_plan(caption_batch(), 1.5));
}

TEST_CASE("pack_batches first-fit-decreasing walkthrough") {
    std::vector<PackItem> items;
    items.push_back({"big1", 9000, {}});
    items.push_back({"big2", 9000, {}});
    items.push_back({"small", 400, {}});
    const auto packs = pack_batches(items, PackLimits{16384, 48});
    REQUIRE(packs.size() == 2);
    CHECK(packs[0].sample_ids == std::vector<std::string>{"big1", "small"});
    CHECK(packs[0].total_tokens == 9400);
    CHECK(packs[1].sample_ids == std::vector<std::string>{"big2"});
}

TEST_CASE("the image cap binds independently of tokens") {
    std::vector<PackItem> items;
    for (int i = 0; i < 49; ++i) {
        items.push_back({"img" + std::to_string(i), 5, {5}});
    }
    const auto packs = pack_batches(items, PackLimits{16384, 48});
    REQUIRE(packs.size() == 2);
    CHECK(packs[0].total_images == 48);
    CHECK(packs[1].total_images == 1);
}

TEST_CASE("oversize samples are rejected by name") {
    std::vector<PackItem> items = {{"giant", 20000, {}}};
    CHECK_THROWS_WITH_AS(pack_batches(items, PackLimits{16384, 48}), doctest::Contains("giant"),
                         std::runtime_error);

    std::vector<PackItem> too_many_images = {{"gallery", 10, std::vector<std::int64_t>(49, 1)}};
    CHECK_THROWS_WITH_AS(pack_batches(too_many_images, PackLimits{16384, 48}),
                         doctest::Contains("gallery"), std::runtime_error);
}

TEST_CASE("packing conserves ids and respects caps on random inputs") {
    std::mt19937 rng(41);
    std::uniform_int_distribution<int> text(1, 4000);
    std::uniform_int_distribution<int> images(0, 3);
    std::uniform_int_distribution<int> image_cost(64, 864);
    std::vector<PackItem> items;
    std::int64_t total_tokens = 0;
    for (int i = 0; i < 500; ++i) {
        PackItem item;
        item.id = "s" + std::to_string(i);
        item.text_tokens = text(rng);
        const int n = images(rng);
        for (int k = 0; k < n; ++k) item.image_tokens.push_back(image_cost(rng));
        total_tokens += item.total_tokens();
        items.push_back(std::move(item));
    }
    const PackLimits limits{16384, 48};
    const auto packs = pack_batches(items, limits);
    CHECK(packs.size() <= items.size());

    std::int64_t packed_tokens = 0;
    std::vector<std::string> packed_ids;
    for (const auto& pack : packs) {
        CHECK(pack.total_tokens <= limits.max_tokens);
        CHECK(pack.total_images <= limits.max_images);
        packed_tokens += pack.total_tokens;
        for (const auto& id : pack.sample_ids) packed_ids.push_back(id);
    }
    CHECK(packed_tokens == total_tokens);
    std::vector<std::string> input_ids;
    for (const auto& item : items) input_ids.push_back(item.id);
    std::sort(packed_ids.begin(), packed_ids.end());
    std::sort(input_ids.begin(), input_ids.end());
    CHECK(packed_ids == input_ids);
}

TEST_CASE("training config round-trips and hashes deterministically") {
    const CurriculumPlan plan = build_plan(caption_batch(), 0.25);
    const std::string doc = emit_config(plan);
    CHECK(doc == emit_config(plan));  // byte-identical

    CHECK(doc.find("\"train_steps\": 62500") != std::string::npos);  // stage 4: 250k * 0.25
    CHECK(doc.find("4e-05") != std::string::npos);

    const CurriculumPlan loaded = load_training_config(doc);
    CHECK(loaded.scale_factor == plan.scale_factor);
    for (std::size_t s = 0; s < 4; ++s) {
        CHECK(loaded.stages[s].index == plan.stages[s].index);
        CHECK(loaded.stages[s].name == plan.stages[s].name);
        CHECK(loaded.stages[s].trainable == plan.stages[s].trainable);
        CHECK(loaded.stages[s].tier == plan.stages[s].tier);
        CHECK(loaded.stages[s].categories == plan.stages[s].categories);
        CHECK(loaded.stages[s].sample_budget == plan.stages[s].sample_budget);
        CHECK(loaded.stages[s].learning_rate == plan.stages[s].learning_rate);
        CHECK(loaded.stages[s].warmup.kind == plan.stages[s].warmup.kind);
        CHECK(loaded.stages[s].warmup.value == plan.stages[s].warmup.value);
        CHECK(loaded.stages[s].train_steps == plan.stages[s].train_steps);
        CHECK(loaded.stage_datasets[s] == plan.stage_datasets[s]);
    }
    CHECK(loaded.thresholds == plan.thresholds);
    CHECK(loaded.shared.optimizer == plan.shared.optimizer);

    // Tampering breaks the hash.
    std::string corrupted = doc;
    const auto at = corrupted.find("16384");
    REQUIRE(at != std::string::npos);
    corrupted.replace(at, 5, "16383");
    CHECK_THROWS_WITH_AS(load_training_config(corrupted), doctest::Contains("hash"),
                         std::runtime_error);
}

TEST_CASE("emit_config carries optional metadata under the hash") {
    const CurriculumPlan plan = build_plan(caption_batch(), 0.5);
    const std::string doc = emit_config(plan, R"({"note":"run-42"})");
    CHECK(doc.find("run-42") != std::string::npos);
    const CurriculumPlan loaded = load_training_config(doc);
    CHECK(loaded.stages[0].sample_budget == plan.stages[0].sample_budget);
}
