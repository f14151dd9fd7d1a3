#include <doctest.h>

#include <algorithm>
#include <random>

#include "testutil.hpp"
#include "vlcurate/oracles.hpp"
#include "vlcurate/textstats.hpp"

using namespace vlcurate;
using testutil::make_manifest;
using testutil::make_sample;

TEST_CASE("tokenize segments on word boundaries") {
    CHECK(tokenize("hello world") == std::vector<std::string>{"hello", "world"});
    CHECK(tokenize("").empty());
    CHECK(tokenize("a, a; A") == std::vector<std::string>{"a", "a", "A"});
    CHECK(tokenize("...!?").empty());
    CHECK(tokenize("x2 + y_3") == std::vector<std::string>{"x2", "y_3"});
    CHECK(tokenize("don't stop") == std::vector<std::string>{"don", "t", "stop"});
}

TEST_CASE("tokenize emits CJK codepoints as single tokens") {
    const auto tokens = tokenize("\xE4\xBD\xA0\xE5\xA5\xBD world");  // two han chars
    REQUIRE(tokens.size() == 3);
    CHECK(tokens[2] == "world");
}

TEST_CASE("tokenize_spans reports byte ranges") {
    const std::string text = "ab, cd";
    const auto spans = tokenize_spans(text);
    REQUIRE(spans.size() == 2);
    CHECK(text.substr(spans[0].begin, spans[0].end - spans[0].begin) == "ab");
    CHECK(text.substr(spans[1].begin, spans[1].end - spans[1].begin) == "cd");
}

TEST_CASE("avg_token_length averages response token counts") {
    const auto m = make_manifest("m", {make_sample("a", "q", "hello world"),
                                       make_sample("b", "q", "hi")});
    CHECK(avg_token_length(m) == doctest::Approx(1.5).epsilon(1e-12));

    const auto single =
        make_manifest("s", {make_sample("a", "q", "one two three four five six seven")});
    CHECK(avg_token_length(single) == doctest::Approx(7.0));

    const auto empty_resp = make_manifest("e", {make_sample("a", "q", ""), make_sample("b", "q", "")});
    CHECK(avg_token_length(empty_resp) == 0.0);
}

TEST_CASE("avg_ttr follows the distinct/total definition") {
    const auto half = make_manifest("m", {make_sample("a", "a b", "a b")});
    CHECK(avg_ttr(half).value == doctest::Approx(0.5));

    const auto distinct = make_manifest("m", {make_sample("a", "v w x", "y z")});
    CHECK(avg_ttr(distinct).value == doctest::Approx(1.0));

    const auto two = make_manifest("m", {make_sample("a", "v w", "x y"),  // TTR 1.0
                                         make_sample("b", "c c", "c c")});  // TTR 0.25? no: 1/4
    // hand average of per-sample TTRs 1.0 and 0.25
    CHECK(avg_ttr(two).value == doctest::Approx((1.0 + 0.25) / 2));

    const auto mixed = make_manifest("m", {make_sample("a", "v w", "x y"),
                                           make_sample("b", "w x", "w x")});  // TTRs 1.0, 0.5
    CHECK(avg_ttr(mixed).value == doctest::Approx(0.75));
}

TEST_CASE("avg_ttr skips empty samples and reports them") {
    const auto m = make_manifest("m", {make_sample("a", "v w", "x y"), make_sample("b", "-", "!")});
    const TtrResult result = avg_ttr(m);
    CHECK(result.value == doctest::Approx(1.0));
    CHECK(result.used == 1);
    REQUIRE(result.skipped_ids.size() == 1);
    CHECK(result.skipped_ids[0] == "b");

    const auto all_empty = make_manifest("m", {make_sample("a", "-", "!")});
    CHECK_THROWS_WITH_AS(avg_ttr(all_empty), doctest::Contains("undefined"), std::runtime_error);
}

TEST_CASE("avg_perplexity prefers annotations and averages them") {
    auto s1 = make_sample("a", "q", "r");
    s1.annotations.perplexity = 2.0;
    auto s2 = make_sample("b", "q", "r");
    s2.annotations.perplexity = 4.0;
    const auto m = make_manifest("m", {s1, s2});
    CHECK(avg_perplexity(m) == doctest::Approx(3.0));
}

TEST_CASE("unigram oracle gives PPL 1 on a single-token alphabet") {
    const auto m = make_manifest("m", {make_sample("x", "q", "a"), make_sample("y", "q", "a a"),
                                       make_sample("z", "q", "a a a")});
    const UnigramPerplexityOracle oracle(m);
    for (const auto& s : m.samples) {
        CHECK(*oracle.perplexity(s) == 1.0);
    }
    CHECK(avg_perplexity(m, &oracle) == 1.0);
}

TEST_CASE("avg_perplexity errors name the sample lacking a value") {
    const auto m = make_manifest("m", {make_sample("needs_ppl", "q", "r")});
    CHECK_THROWS_WITH_AS(avg_perplexity(m), doctest::Contains("needs_ppl"), std::runtime_error);
}

TEST_CASE("text_score is the mean of normalized inputs") {
    CHECK(text_score(0, 0, 0) == 0.0);
    CHECK(text_score(1, 1, 1) == 1.0);
    CHECK(text_score(0.3, 0.6, 0.9) == doctest::Approx(0.6));
    CHECK_THROWS(text_score(-0.1, 0.5, 0.5));
    CHECK_THROWS(text_score(0.5, 1.2, 0.5));
}

TEST_CASE("TTR depends only on the token multiset") {
    const auto base = make_manifest("m", {make_sample("a", "red green", "red blue"),
                                          make_sample("b", "one", "two three")});
    const double t1 = avg_ttr(base).value;

    // Reorder samples.
    const auto swapped = make_manifest("m", {base.samples[1], base.samples[0]});
    CHECK(avg_ttr(swapped).value == t1);

    // Reorder tokens within a sample.
    const auto shuffled = make_manifest("m", {make_sample("a", "blue red", "green red"),
                                              make_sample("b", "three", "two one")});
    CHECK(avg_ttr(shuffled).value == t1);
}

TEST_CASE("avg_token_length is linear under dataset concatenation") {
    std::mt19937 rng(7);
    std::uniform_int_distribution<int> words(0, 9);
    const auto random_manifest = [&](const std::string& name, int n) {
        std::vector<Sample> samples;
        for (int i = 0; i < n; ++i) {
            std::string response;
            const int count = words(rng);
            for (int w = 0; w < count; ++w) response += "w" + std::to_string(w) + " ";
            samples.push_back(make_sample(name + std::to_string(i), "q", response));
        }
        return make_manifest(name, samples);
    };
    const auto d1 = random_manifest("a", 5);
    const auto d2 = random_manifest("b", 9);
    DatasetManifest both = d1;
    for (const auto& s : d2.samples) both.samples.push_back(s);
    const double expected = (5 * avg_token_length(d1) + 9 * avg_token_length(d2)) / 14.0;
    CHECK(avg_token_length(both) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("duplicating every sample leaves L, T and P unchanged") {
    auto s1 = make_sample("a", "what color", "deep blue sky");
    s1.annotations.perplexity = 5.0;
    auto s2 = make_sample("b", "count", "one one two");
    s2.annotations.perplexity = 9.0;
    const auto m = make_manifest("m", {s1, s2});
    auto s1d = s1;
    s1d.id = "a2";
    auto s2d = s2;
    s2d.id = "b2";
    const auto doubled = make_manifest("m", {s1, s2, s1d, s2d});

    CHECK(avg_token_length(doubled) == avg_token_length(m));
    CHECK(avg_ttr(doubled).value == avg_ttr(m).value);
    CHECK(avg_perplexity(doubled) == avg_perplexity(m));
}

TEST_CASE("text_metrics bundles the three raw metrics") {
    auto s1 = make_sample("a", "count the", "one two three");
    s1.annotations.perplexity = 4.0;
    auto s2 = make_sample("b", "echo", "one one");
    s2.annotations.perplexity = 2.0;
    const auto m = make_manifest("m", {s1, s2});
    const TextMetrics metrics = text_metrics(m);
    CHECK(metrics.avg_token_length == doctest::Approx(2.5));
    CHECK(metrics.avg_ttr == doctest::Approx((1.0 + 2.0 / 3.0) / 2));
    CHECK(metrics.avg_perplexity == doctest::Approx(3.0));
    CHECK(metrics.n == 2);
}

TEST_CASE("unigram oracle is bitwise deterministic") {
    const auto m = make_manifest(
        "m", {make_sample("a", "q", "alpha beta gamma"), make_sample("b", "q", "beta beta delta")});
    const UnigramPerplexityOracle o1(m);
    const UnigramPerplexityOracle o2(m);
    for (const auto& s : m.samples) {
        CHECK(*o1.perplexity(s) == *o2.perplexity(s));
        CHECK(*o1.perplexity(s) >= 1.0);
    }
    CHECK(*o1.perplexity(make_sample("empty", "q", "")) == 1.0);
}
