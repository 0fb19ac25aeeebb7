#include <doctest.h>

#include "atelier/reliable.hpp"
#include "helpers.hpp"

using namespace atelier;

namespace {
const PromptLibrary kPrompts;
}

TEST_CASE("all four logic-chain fixtures parse as 9 'Consider' points") {
    for (std::size_t i = 0; i < 4; ++i) {
        const auto points = parse_logic_points(testing::fixture_variant("logic_extract", i));
        REQUIRE(points.size() == kLogicPointCount);
        for (const auto& p : points) CHECK(to_lower(p).rfind("consider", 0) == 0);
    }
    const auto fourth = parse_logic_points(testing::fixture_variant("logic_extract", 3));
    CHECK(fourth[0] == "Consider design from an innovative educational concept perspective");
}

TEST_CASE("the 9-point cardinality rule rejects 8- and 10-point lists") {
    auto make_list = [](int n) {
        std::vector<std::string> points;
        for (int i = 0; i < n; ++i) points.push_back("Consider aspect " + std::to_string(i));
        return "['" + join(points, "', '") + "']";
    };
    CHECK(parse_logic_points(make_list(9)).size() == 9);
    CHECK_THROWS_WITH_AS(parse_logic_points(make_list(8)),
                         doctest::Contains("must write 9 points"), ParseError);
    CHECK_THROWS_WITH_AS(parse_logic_points(make_list(10)),
                         doctest::Contains("must write 9 points"), ParseError);
    // A point not beginning with "Consider" is rejected outright.
    CHECK_THROWS_WITH_AS(
        parse_logic_points("['Consider a', 'Think about b', 'Consider c', 'Consider d', "
                           "'Consider e', 'Consider f', 'Consider g', 'Consider h', "
                           "'Consider i']"),
        doctest::Contains("does not begin with 'Consider'"), ParseError);
}

TEST_CASE("step list parser reads the 10-step fixture") {
    const auto steps = parse_step_list(testing::fixture_variant("reliable_design", 0));
    REQUIRE(steps.size() == 10);
    CHECK(steps[0].first == "Research and Conceptualization");
    CHECK(steps[9].first == "Review and Adjustments");
    for (const auto& [title, body] : steps) {
        CHECK_FALSE(title.empty());
        CHECK_FALSE(body.empty());
    }
    CHECK(steps[2].second.find("daily needs of students") != std::string::npos);
}

TEST_CASE("step list parser enforces contiguous numbering") {
    CHECK_THROWS_AS(parse_step_list("**Step 2: out of order**\nbody"), ParseError);
    CHECK_THROWS_AS(parse_step_list("**Step 1: a**\nx\n**Step 3: b**\ny"), ParseError);
    CHECK_THROWS_AS(parse_step_list("no steps at all"), ParseError);
    CHECK_THROWS_AS(parse_step_list("**Step 99999999999999999999: overflow**\nbody"),
                    ParseError);
    const auto two = parse_step_list("**Step 1: A**\nfirst\n**Step 2: B**\nsecond");
    REQUIRE(two.size() == 2);
    CHECK(two[1] == std::pair<std::string, std::string>{"B", "second"});
}

TEST_CASE("retrieve_context returns k grounded passages") {
    MockEmbedBackend embed;
    auto [records, report] = ingest(testing::corpus_path());
    const auto index = build_index(records, embed, space::text, TextSelector::description);
    const ContextSet ctx = retrieve_context(testing::kQuery, index, embed, 6, &records);
    CHECK(ctx.query == testing::kQuery);
    REQUIRE(ctx.hits.size() == 6);
    REQUIRE(ctx.passages.size() == 6);
    // With a 6-record corpus and k=6, the special-education school case is
    // always in context.
    bool found = false;
    for (const auto& [id, text] : ctx.passages)
        if (id == "heyuan-village-school") {
            found = true;
            CHECK(text.find("Village in the Village") != std::string::npos);
        }
    CHECK(found);
    // Passage order matches hit order.
    for (std::size_t i = 0; i < ctx.hits.size(); ++i)
        CHECK(ctx.hits[i].record_id == ctx.passages[i].first);
}

TEST_CASE("extract_logic is grounded to a record and parses strictly") {
    auto mock = std::make_shared<MockChatBackend>(testing::fixtures_dir());
    const LogicChain chain =
        extract_logic(testing::kQuery, "heyuan-village-school", "some passage", *mock, kPrompts);
    CHECK(chain.source_record_id == "heyuan-village-school");
    CHECK(chain.points.size() == 9);
    // Low temperature for the grounded role.
    CHECK(mock->recorded_calls()[0].temperature == doctest::Approx(0.2));
    CHECK(mock->recorded_calls()[0].template_id == "logic_extract");
}

TEST_CASE("logic sampling follows the documented seeded rule") {
    std::vector<LogicChain> pool(6);
    for (std::size_t i = 0; i < pool.size(); ++i)
        pool[i].source_record_id = "r" + std::to_string(i);

    for (std::uint64_t seed : {0ull, 1ull, 42ull, 999999ull}) {
        std::size_t chosen = 0;
        const LogicChain& chain = sample_logic(pool, seed, &chosen);
        CHECK(chosen == SplitMix64(seed).bounded(pool.size()));  // replayable oracle
        CHECK(&chain == &pool[chosen]);
        CHECK(sample_logic_index(pool.size(), seed) == chosen);
    }
    CHECK_THROWS_AS(sample_logic({}, 42), PreconditionError);
}

TEST_CASE("write_reliable_design produces a titled step-wise plan") {
    auto mock = std::make_shared<MockChatBackend>(testing::fixtures_dir());
    LogicChain chain;
    chain.points = parse_logic_points(testing::fixture_variant("logic_extract", 3));
    chain.source_record_id = "heyuan-village-school";
    const ReliableDesign design = write_reliable_design(testing::kQuery, chain, *mock, kPrompts);
    REQUIRE(design.steps.size() == 10);
    CHECK(design.steps[0].first == "Research and Conceptualization");
    CHECK(design.source_chain.source_record_id == "heyuan-village-school");
    // The rendered prompt embeds the chosen logic chain.
    const auto call = mock->recorded_calls()[0];
    CHECK(call.system_prompt.find(chain.points[0]) != std::string::npos);
    CHECK(call.template_id == "reliable_design");
}
