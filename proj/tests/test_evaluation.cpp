#include <doctest.h>

#include <algorithm>
#include <random>

#include "atelier/evaluation.hpp"
#include "helpers.hpp"

using namespace atelier;

namespace {
const PromptLibrary kPrompts;

RubricRating rating(const std::array<double, 6>& dims, const std::string& rater = "r") {
    RubricRating r;
    r.rater_id = rater;
    r.originality = dims[0];
    r.relevance = dims[1];
    r.complexity = dims[2];
    r.flexibility = dims[3];
    r.participation_style = dims[4];
    r.task_distribution = dims[5];
    return r;
}
}  // namespace

TEST_CASE("design score is the mean over all dimensions of all raters") {
    CHECK(design_score({rating({8, 8, 8, 8, 8, 8})}) == doctest::Approx(8.0).epsilon(1e-12));
    CHECK(design_score({rating({0, 2, 4, 6, 8, 10})}) == doctest::Approx(5.0).epsilon(1e-12));
    // Two raters: overall mean, not mean of means weighted differently.
    CHECK(design_score({rating({7, 7, 7, 7, 7, 7}, "a"), rating({9, 9, 9, 9, 9, 9}, "b")}) ==
          doctest::Approx(8.0).epsilon(1e-12));
    CHECK_THROWS_AS(design_score({}), PreconditionError);
    CHECK_THROWS_AS(design_score({rating({11, 0, 0, 0, 0, 0})}), PreconditionError);
    CHECK_THROWS_AS(design_score({rating({-0.1, 5, 5, 5, 5, 5})}), PreconditionError);
}

TEST_CASE("design score is invariant under rater permutation") {
    SplitMix64 rng(404u);
    std::vector<RubricRating> ratings;
    for (int i = 0; i < 20; ++i) {
        std::array<double, 6> dims{};
        for (auto& d : dims) d = rng.uniform01() * 10.0;
        ratings.push_back(rating(dims, "r" + std::to_string(i)));
    }
    const double reference = design_score(ratings);
    std::mt19937_64 shuffler(7);
    for (int trial = 0; trial < 200; ++trial) {
        std::shuffle(ratings.begin(), ratings.end(), shuffler);
        CHECK(design_score(ratings) == doctest::Approx(reference).epsilon(1e-12));
    }
}

TEST_CASE("image creativity sits in [0,10] and ignores vector scale") {
    MockEmbedBackend embed;
    const auto a = embed.embed_text({"terraced campus"}, space::joint).front();
    const auto b = embed.embed_text({"timber atrium"}, space::joint).front();

    const double base = creativity_image(a, b);
    CHECK(base >= 0.0);
    CHECK(base <= 10.0);
    CHECK(creativity_image(a, a) == doctest::Approx(10.0));

    auto scaled = b;
    for (auto& v : scaled.values) v *= 1000.0;
    CHECK(creativity_image(a, scaled) == doctest::Approx(base).epsilon(1e-9));

    auto other_space = b;
    other_space.space_id = "text";
    CHECK_THROWS_AS(creativity_image(a, other_space), PreconditionError);
}

TEST_CASE("judge score parsing takes the last SCORE: marker and clamps") {
    CHECK(parse_judge_score("SCORE: 7.5") == doctest::Approx(7.5));
    CHECK(parse_judge_score("discussion...\nSCORE: 3\nmore") == doctest::Approx(3.0));
    CHECK(parse_judge_score("SCORE: 2\nrevised verdict\nSCORE: 9.25") == doctest::Approx(9.25));
    CHECK(parse_judge_score("SCORE: 42") == doctest::Approx(10.0));   // clamped high
    CHECK(parse_judge_score("SCORE: -3") == doctest::Approx(0.0));    // clamped low
    CHECK(parse_judge_score("SCORE: 8.0/10") == doctest::Approx(8.0));
    CHECK_THROWS_AS(parse_judge_score("no marker here"), ParseError);
    CHECK_THROWS_AS(parse_judge_score("SCORE: not a number"), ParseError);
    CHECK_THROWS_AS(parse_judge_score("SCORE:"), ParseError);
}

TEST_CASE("text creativity asks the judge fixtures and parses the verdict") {
    auto chat = testing::mock_chat();
    const double score = creativity_text({"proposal text"}, *chat, kPrompts);
    // First fixture variant ends "SCORE: 7.5".
    CHECK(score == doctest::Approx(7.5));
    const auto calls = chat->recorded_calls();
    REQUIRE(calls.size() == 1);
    CHECK(calls[0].system_prompt == kPrompts.get("judge_creativity"));
    CHECK(calls[0].history.back().content == "proposal text");
    CHECK_THROWS_AS(creativity_text({}, *chat, kPrompts), PreconditionError);

    MockChatBackend silent;
    silent.add_template("judge_creativity", {"no verdict"});
    CHECK_THROWS_AS(creativity_text({"x"}, silent, kPrompts, 1), StageError);
    CHECK(silent.call_count("judge_creativity") == 2);
}

TEST_CASE("creativity is the mean of its image and text components") {
    CHECK(creativity_score(8.0, 7.0) == doctest::Approx(7.5).epsilon(1e-12));
    CHECK(creativity_score(0.0, 10.0) == doctest::Approx(5.0).epsilon(1e-12));
    SplitMix64 rng(55u);
    for (int i = 0; i < 1000; ++i) {
        const double ci = rng.uniform01() * 10.0;
        const double ct = rng.uniform01() * 10.0;
        CHECK(creativity_score(ci, ct) == doctest::Approx((ci + ct) / 2.0).epsilon(1e-12));
    }
    CHECK_THROWS_AS(creativity_score(-0.5, 5.0), PreconditionError);
    CHECK_THROWS_AS(creativity_score(5.0, 10.5), PreconditionError);
}

TEST_CASE("balance matches its closed form for identity transforms") {
    for (double alpha : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        BalanceSpec spec;
        spec.alpha = alpha;
        SplitMix64 rng(static_cast<std::uint64_t>(alpha * 16) + 1);
        for (int i = 0; i < 200; ++i) {
            const double d = rng.uniform01() * 10.0;
            const double c = rng.uniform01() * 10.0;
            CHECK(balance(d, c, spec) ==
                  doctest::Approx(alpha * d + (1.0 - alpha) * c).epsilon(1e-9));
        }
    }
    CHECK(balance(8.5, 8.0) == doctest::Approx(8.25).epsilon(1e-12));  // default alpha 0.5

    BalanceSpec curved;
    curved.alpha = 0.5;
    curved.f_transform = [](double v) { return v * v / 10.0; };
    curved.g_transform = [](double v) { return v / 2.0; };
    CHECK(balance(10.0, 4.0, curved) == doctest::Approx(0.5 * 10.0 + 0.5 * 2.0));

    BalanceSpec bad;
    bad.alpha = 1.5;
    CHECK_THROWS_AS(balance(5, 5, bad), PreconditionError);
    CHECK_THROWS_AS(balance(-1, 5), PreconditionError);
    CHECK_THROWS_AS(balance(5, 11), PreconditionError);
}

TEST_CASE("rating files load per line with positional errors") {
    const std::string dir = testing::ratings_dir("table2");
    const auto ours = load_ratings_file(dir + "/OURS.ratings.jsonl");
    REQUIRE(ours.size() == 2);
    CHECK(design_score(ours) == doctest::Approx(8.5).epsilon(1e-12));

    const std::string tmp = "/tmp/atelier_eval_bad.jsonl";
    write_file(tmp, "{\"originality\": 5}\n");
    CHECK_THROWS(load_ratings_file(tmp));
    write_file(tmp, "not json\n");
    CHECK_THROWS_WITH_AS(load_ratings_file(tmp), doctest::Contains(":1: invalid JSON"), Error);
    write_file(tmp, "\n\n");
    CHECK_THROWS_WITH_AS(load_ratings_file(tmp), doctest::Contains("no ratings"), Error);
}

TEST_CASE("rating directories resolve creativity sidecars and optional balance") {
    const auto reports = load_rating_dir(testing::ratings_dir("table2"));
    REQUIRE(reports.size() == 3);
    // Rows come back sorted by filename.
    CHECK(reports[0].method_name == "DALLE3");
    CHECK(reports[1].method_name == "OURS");
    CHECK(reports[2].method_name == "SD");
    CHECK(reports[0].creativity == doctest::Approx(8.0).epsilon(1e-12));
    CHECK(reports[0].design == doctest::Approx(7.25).epsilon(1e-12));
    CHECK(reports[1].creativity == doctest::Approx(8.0).epsilon(1e-12));
    CHECK(reports[1].design == doctest::Approx(8.5).epsilon(1e-12));
    CHECK(reports[2].creativity == doctest::Approx(7.25).epsilon(1e-12));
    CHECK(reports[2].design == doctest::Approx(7.5).epsilon(1e-12));
    for (const auto& r : reports) {
        CHECK(r.creativity == doctest::Approx((r.creativity_i + r.creativity_t) / 2.0));
        CHECK_FALSE(r.has_balance);
    }

    const auto balanced = load_rating_dir(testing::ratings_dir("table2"), 0.5);
    for (const auto& r : balanced) {
        CHECK(r.has_balance);
        CHECK(r.balance == doctest::Approx(0.5 * r.design + 0.5 * r.creativity).epsilon(1e-12));
    }

    CHECK_THROWS_WITH_AS(load_rating_dir("/tmp/does-not-exist-atelier"),
                         doctest::Contains("ratings directory not found"), Error);
}

TEST_CASE("comparison tables render sorted rows with fixed headers") {
    const auto reports = load_rating_dir(testing::ratings_dir("table3"));
    const ComparisonTable table = render_comparison(reports);
    const std::string expected =
        "Method      Creativity Score  Design Score  \n"
        "AgentVerse  7.5               7.25          \n"
        "AutoGEN     7                 7.5           \n"
        "Ours        7.25              8             \n";
    CHECK(table.text == expected);
    REQUIRE(table.structured.at("rows").size() == 3);
    CHECK(table.structured["rows"][2]["method"] == "Ours");
    CHECK(table.structured["rows"][2]["design"].get<double>() == doctest::Approx(8.0));

    // Row order in the input does not matter; duplicates are rejected.
    std::vector<ScoreReport> reversed(reports.rbegin(), reports.rend());
    CHECK(render_comparison(reversed).text == expected);
    std::vector<ScoreReport> dup = {reports[0], reports[0]};
    CHECK_THROWS_WITH_AS(render_comparison(dup), doctest::Contains("duplicate method"),
                         PreconditionError);
    CHECK_THROWS_AS(render_comparison({}), PreconditionError);
}

TEST_CASE("ablation rating fixtures reproduce their reference scores") {
    const auto reports = load_rating_dir(testing::ratings_dir("table4"));
    REQUIRE(reports.size() == 2);
    CHECK(reports[0].method_name == "wo_Agent_I");
    CHECK(reports[0].creativity == doctest::Approx(8.0).epsilon(1e-12));
    CHECK(reports[0].design == doctest::Approx(7.25).epsilon(1e-12));
    CHECK(reports[1].method_name == "wo_Agent_R");
    CHECK(reports[1].creativity == doctest::Approx(7.5).epsilon(1e-12));
    CHECK(reports[1].design == doctest::Approx(8.0).epsilon(1e-12));
}
