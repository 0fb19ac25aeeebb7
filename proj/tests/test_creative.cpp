#include <doctest.h>

#include <algorithm>
#include <set>

#include "atelier/creative.hpp"
#include "atelier/prompts.hpp"
#include "helpers.hpp"

using namespace atelier;

namespace {
const PromptLibrary kPrompts;
}

TEST_CASE("keyword extraction fixture parses to 18 distinct keywords") {
    const KeywordList list = parse_keyword_list(testing::fixture_variant("keyword_extract", 0));
    CHECK(list.size() == 18);
    CHECK(list.items.front() == "Keyuan Experimental School");
    CHECK(list.items.back() == "interactive learning environment");
    CHECK(list.contains_ci("SHENZHEN"));
    CHECK_NOTHROW(list.validate());
}

TEST_CASE("keyword list parser handles edge shapes") {
    CHECK(parse_keyword_list("noise before ['a', 'b'] noise after").items ==
          std::vector<std::string>{"a", "b"});
    // Case-insensitive dedup keeps the first occurrence.
    CHECK(parse_keyword_list("['Apple', 'apple', 'pear']").items ==
          std::vector<std::string>{"Apple", "pear"});
    // Internal apostrophes do not terminate an item.
    CHECK(parse_keyword_list("['nature's embrace', 'x']").items ==
          std::vector<std::string>{"nature's embrace", "x"});
    // Mixed quotes.
    CHECK(parse_keyword_list("[\"a\", 'b']").items == std::vector<std::string>{"a", "b"});

    CHECK_THROWS_AS(parse_keyword_list("no list here"), ParseError);
    CHECK_THROWS_AS(parse_keyword_list("[unterminated"), ParseError);
    CHECK_THROWS_AS(parse_keyword_list("[]"), ParseError);
}

TEST_CASE("all four association fixtures carry exactly 15 fresh keywords") {
    const KeywordList seeds = parse_keyword_list(testing::fixture_variant("keyword_extract", 0));
    std::vector<KeywordList> history;
    for (std::size_t i = 0; i < 4; ++i) {
        const KeywordList list = parse_keyword_list(testing::fixture_variant("associate", i));
        CHECK(list.size() == kAssociationKeywordCount);
        for (const auto& item : list.items) {
            CHECK_FALSE(seeds.contains_ci(item));
            for (const auto& prev : history) CHECK_FALSE(prev.contains_ci(item));
        }
        history.push_back(list);
    }
    CHECK(history[0].items.front() == "cognitive growth");
    CHECK(history[3].contains_ci("unity hubspot"));
}

TEST_CASE("associate enforces count and disjointness via re-ask") {
    auto mock = std::make_shared<MockChatBackend>(testing::fixtures_dir());
    KeywordList seeds;
    seeds.items = {"alpha", "beta"};

    SUBCASE("clean fixture passes on first attempt") {
        const KeywordList out = associate(seeds, {}, *mock, kPrompts);
        CHECK(out.size() == 15);
        CHECK(mock->call_count("associate") == 1);
    }
    SUBCASE("wrong count and repeats are re-asked with the violation") {
        MockChatBackend bad;
        bad.add_template("associate", {"['only', 'four', 'items', 'here']",  // wrong count
                                       testing::fixture_variant("associate", 0)});
        const KeywordList out = associate(seeds, {}, bad, kPrompts);
        CHECK(out.size() == 15);
        REQUIRE(bad.call_count("associate") == 2);
        // The re-ask appends the violation to the conversation.
        const auto calls = bad.recorded_calls();
        const auto& retry_history = calls[1].history;
        REQUIRE(retry_history.size() >= 3);
        CHECK(retry_history[retry_history.size() - 1].role == "user");
        CHECK(retry_history[retry_history.size() - 1].content.find("invalid") !=
              std::string::npos);
        CHECK(retry_history[retry_history.size() - 2].role == "assistant");
    }
    SUBCASE("a keyword repeating the seeds is a violation") {
        MockChatBackend bad;
        std::string repeats = testing::fixture_variant("associate", 0);
        repeats.replace(repeats.find("cognitive growth"), 16, "alpha");
        bad.add_template("associate", {repeats, testing::fixture_variant("associate", 1)});
        const KeywordList out = associate(seeds, {}, bad, kPrompts);
        CHECK(out.items.front() == "mental expansion");
        CHECK(bad.call_count("associate") == 2);
    }
    SUBCASE("retry budget exhaustion raises a stage error with partial output") {
        MockChatBackend bad;
        bad.add_template("associate", {"never a list"});
        try {
            associate(seeds, {}, bad, kPrompts, 2);
            FAIL("expected StageError");
        } catch (const StageError& e) {
            CHECK(e.stage() == "associate");
            CHECK(e.partial() == "never a list");
            CHECK(bad.call_count("associate") == 3);  // 1 + retry_limit
        }
    }
}

TEST_CASE("strategy parser accepts all six fixture shapes") {
    const char* expected_names[] = {"Urban Mosaic Coliseum",      "Educational Elegance Enclave",
                                    "Synergistic Wisdom Canopy",  "Academic Panorama Pavilion",
                                    "Scholar's Nature Nook",      "Metropolitan Imagination Matrix"};
    for (std::size_t i = 0; i < 6; ++i) {
        const CreativeStrategy s = parse_strategy(testing::fixture_variant("strategy", i));
        CHECK(s.scene_name == expected_names[i]);
        CHECK(s.strategy.size() > 50);
        // The 'Design strategy' label is stripped from the body.
        CHECK(s.strategy.rfind("Design strategy", 0) != 0);
    }
    CHECK(parse_strategy("'A': 'B'").scene_name == "A");
    CHECK(parse_strategy("prefix text 'Name': body text").strategy == "body text");
    CHECK_THROWS_AS(parse_strategy("no pattern at all"), ParseError);
    CHECK_THROWS_AS(parse_strategy("'only a name'"), ParseError);
}

TEST_CASE("keyword subset draw is replayable and well-formed") {
    std::vector<std::string> pool;
    for (int i = 0; i < 30; ++i) pool.push_back("kw" + std::to_string(i));

    SplitMix64 a(1234), b(1234);
    const auto s1 = draw_keyword_subset(pool, 8, a);
    const auto s2 = draw_keyword_subset(pool, 8, b);
    CHECK(s1 == s2);
    CHECK(s1.size() == 8);
    // No duplicates; all drawn from the pool.
    std::set<std::string> seen(s1.begin(), s1.end());
    CHECK(seen.size() == 8);
    for (const auto& k : s1)
        CHECK(std::find(pool.begin(), pool.end(), k) != pool.end());

    // Oracle: replay the documented partial Fisher-Yates rule.
    std::vector<std::string> copy = pool;
    SplitMix64 rng(1234);
    for (std::size_t i = 0; i < 8; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.bounded(copy.size() - i));
        std::swap(copy[i], copy[j]);
    }
    copy.resize(8);
    CHECK(s1 == copy);

    // Subset larger than the pool returns a permutation of the pool.
    SplitMix64 c(5);
    std::vector<std::string> tiny{"a", "b", "c"};
    const auto all = draw_keyword_subset(tiny, 10, c);
    CHECK(all.size() == 3);
}

TEST_CASE("imagine produces one caption per requested scene, deterministically") {
    auto mock = std::make_shared<MockChatBackend>(testing::fixtures_dir());
    std::vector<KeywordList> pool;
    pool.push_back(parse_keyword_list(testing::fixture_variant("keyword_extract", 0)));
    for (std::size_t i = 0; i < 4; ++i)
        pool.push_back(parse_keyword_list(testing::fixture_variant("associate", i)));

    const auto captions = imagine(pool, 6, stage_seed(42, "imagine"), *mock, kPrompts);
    REQUIRE(captions.size() == 6);
    CHECK(captions[0].index == 1);
    CHECK(captions[0].sentence.find("Unity Hubspot") != std::string::npos);
    for (const auto& c : captions) {
        CHECK_FALSE(c.sentence.empty());
        CHECK(c.source_keywords.size() == 8);
    }

    // Same seed, fresh backend: identical keyword subsets.
    auto mock2 = std::make_shared<MockChatBackend>(testing::fixtures_dir());
    const auto again = imagine(pool, 6, stage_seed(42, "imagine"), *mock2, kPrompts);
    for (std::size_t i = 0; i < 6; ++i)
        CHECK(again[i].source_keywords.items == captions[i].source_keywords.items);

    // Different seed: different draws (overwhelmingly likely across 6x8).
    auto mock3 = std::make_shared<MockChatBackend>(testing::fixtures_dir());
    const auto other = imagine(pool, 6, stage_seed(43, "imagine"), *mock3, kPrompts);
    bool any_diff = false;
    for (std::size_t i = 0; i < 6; ++i)
        if (other[i].source_keywords.items != captions[i].source_keywords.items) any_diff = true;
    CHECK(any_diff);

    CHECK_THROWS_AS(imagine({}, 6, 1, *mock, kPrompts), PreconditionError);
    CHECK_THROWS_AS(imagine(pool, 0, 1, *mock, kPrompts), PreconditionError);
}

TEST_CASE("draft_strategies yields one strategy per caption") {
    auto mock = std::make_shared<MockChatBackend>(testing::fixtures_dir());
    std::vector<SceneCaption> captions;
    for (int i = 1; i <= 6; ++i)
        captions.push_back({i, "caption " + std::to_string(i), {}});
    const auto strategies = draft_strategies(captions, *mock, kPrompts);
    REQUIRE(strategies.size() == 6);
    CHECK(strategies[0].scene_name == "Urban Mosaic Coliseum");
    CHECK(strategies[5].scene_name == "Metropolitan Imagination Matrix");
    CHECK_THROWS_AS(draft_strategies({}, *mock, kPrompts), PreconditionError);
}

TEST_CASE("extract_keywords rejects an empty query") {
    auto mock = std::make_shared<MockChatBackend>(testing::fixtures_dir());
    CHECK_THROWS_AS(extract_keywords("   ", *mock, kPrompts), PreconditionError);
    const KeywordList list = extract_keywords(testing::kQuery, *mock, kPrompts);
    CHECK(list.size() == 18);
}
