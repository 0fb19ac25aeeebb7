#pragma once

#include <memory>
#include <string>

#include "atelier/gateway.hpp"
#include "atelier/pipeline.hpp"

namespace testing {

inline std::string source_dir() { return ATELIER_SOURCE_DIR; }
inline std::string fixtures_dir() { return source_dir() + "/fixtures/mock_chat"; }
inline std::string corpus_path() { return source_dir() + "/fixtures/corpus/keyuan.jsonl"; }
inline std::string ratings_dir(const std::string& table) {
    return source_dir() + "/fixtures/ratings/" + table;
}
inline std::string cli_path() { return ATELIER_CLI_PATH; }

inline const std::string kQuery =
    "As the client of the project, we need to design a detailed expansion plan for Keyuan "
    "Experimental School in Pingshan District, Shenzhen. The design should include teaching "
    "buildings with innovative educational concepts, multi-functional complexes, "
    "three-dimensional event platforms and underground parking facilities.";

inline std::shared_ptr<atelier::MockChatBackend> mock_chat() {
    return std::make_shared<atelier::MockChatBackend>(fixtures_dir());
}

inline atelier::RunConfig run_config(std::uint64_t seed = 42) {
    atelier::RunConfig config;
    config.seed = seed;
    config.corpus_path = corpus_path();
    config.fixtures_dir = fixtures_dir();
    config.mode = atelier::RunMode::mock;
    return config;
}

// One fixture variant of a mock template, by index.
inline std::string fixture_variant(const std::string& template_id, std::size_t index) {
    const auto doc = nlohmann::json::parse(
        atelier::read_file(fixtures_dir() + "/" + template_id + ".json"));
    return doc.at("variants").at(index).get<std::string>();
}

inline std::size_t fixture_variant_count(const std::string& template_id) {
    const auto doc = nlohmann::json::parse(
        atelier::read_file(fixtures_dir() + "/" + template_id + ".json"));
    return doc.at("variants").size();
}

// Deterministic printable junk for fuzzing: mixes random bytes, brackets,
// quotes, and digits so parser branch coverage is broad.
inline std::string fuzz_string(atelier::SplitMix64& rng) {
    static const std::string alphabet =
        "abcdefghijklmnopqrstuvwxyz '\":,[]{}()0123456789\n\t**Step:.-#\x01\xff\xc3";
    const std::size_t len = rng.bounded(200);
    std::string out;
    out.reserve(len);
    for (std::size_t i = 0; i < len; ++i) out += alphabet[rng.bounded(alphabet.size())];
    return out;
}

}  // namespace testing
