#pragma once

#include <string>
#include <vector>

#include "atelier/common.hpp"
#include "atelier/corpus.hpp"
#include "atelier/creative.hpp"
#include "atelier/prompts.hpp"

namespace atelier {

// ---------------------------------------------------------------------------
// Grounded-chain artifacts
// ---------------------------------------------------------------------------

struct ContextSet {
    std::string query;
    std::vector<SearchHit> hits;
    std::vector<std::pair<std::string, std::string>> passages;  // (record_id, description)
};

inline constexpr std::size_t kLogicPointCount = 9;

struct LogicChain {
    std::vector<std::string> points;  // exactly 9, each begins with "Consider"
    std::string source_record_id;
};

struct ReliableDesign {
    std::vector<std::pair<std::string, std::string>> steps;  // (title, body)
    LogicChain source_chain;
};

// ---------------------------------------------------------------------------
// Parsers
// ---------------------------------------------------------------------------

inline std::vector<std::string> parse_logic_points(const std::string& raw) {
    const auto items = detail::quoted_items_in_first_bracket(raw, "logic_extract");
    std::vector<std::string> points;
    for (const auto& item : items) {
        if (item.empty()) continue;
        if (to_lower(item).rfind("consider", 0) != 0)
            throw ParseError("logic_extract", "point does not begin with 'Consider': '" + item + "'");
        points.push_back(item);
    }
    if (points.size() != kLogicPointCount)
        throw ParseError("logic_extract", "must write 9 points, got " +
                                              std::to_string(points.size()));
    return points;
}

// Step list parsed from "**Step N:" headings; numbering must be contiguous
// from 1.
inline std::vector<std::pair<std::string, std::string>> parse_step_list(const std::string& raw) {
    struct StepStart {
        int number;
        std::string title;
        std::size_t body_begin;
        std::size_t heading_begin;
    };
    std::vector<StepStart> starts;
    std::size_t pos = 0;
    while ((pos = raw.find("**Step", pos)) != std::string::npos) {
        std::size_t cur = pos + 6;
        while (cur < raw.size() && raw[cur] == ' ') ++cur;
        std::size_t num_begin = cur;
        while (cur < raw.size() && std::isdigit(static_cast<unsigned char>(raw[cur]))) ++cur;
        if (cur == num_begin || cur >= raw.size() || raw[cur] != ':') {
            pos += 6;
            continue;
        }
        int number = 0;
        try {
            number = std::stoi(raw.substr(num_begin, cur - num_begin));
        } catch (const std::exception&) {
            throw ParseError("reliable_design", "step number out of range");
        }
        std::size_t title_begin = cur + 1;
        std::size_t line_end = raw.find('\n', title_begin);
        if (line_end == std::string::npos) line_end = raw.size();
        std::string title = raw.substr(title_begin, line_end - title_begin);
        const std::size_t closing = title.find("**");
        if (closing != std::string::npos) title = title.substr(0, closing);
        starts.push_back({number, trim(title), line_end, pos});
        pos = line_end;
    }
    if (starts.empty()) throw ParseError("reliable_design", "no step headings found");
    std::vector<std::pair<std::string, std::string>> steps;
    for (std::size_t i = 0; i < starts.size(); ++i) {
        if (starts[i].number != static_cast<int>(i + 1))
            throw ParseError("reliable_design",
                             "non-contiguous step numbering at step " +
                                 std::to_string(starts[i].number));
        const std::size_t end =
            (i + 1 < starts.size()) ? starts[i + 1].heading_begin : raw.size();
        steps.emplace_back(starts[i].title, trim(raw.substr(starts[i].body_begin,
                                                            end - starts[i].body_begin)));
    }
    return steps;
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

inline ContextSet retrieve_context(const std::string& query, const VectorIndex& index,
                                   const EmbedBackend& embed, std::size_t k = 6,
                                   const std::vector<DesignRecord>* records = nullptr) {
    if (index.entries.empty()) throw PreconditionError("empty index");
    const auto query_vec = embed.embed_text({query}, index.space_id).front();
    ContextSet ctx;
    ctx.query = query;
    ctx.hits = search(index, query_vec, k);
    for (const auto& hit : ctx.hits) {
        std::string passage = hit.record_id;
        if (records) {
            for (const auto& rec : *records)
                if (rec.id == hit.record_id) {
                    passage = rec.description;
                    break;
                }
        }
        ctx.passages.emplace_back(hit.record_id, passage);
    }
    return ctx;
}

inline LogicChain extract_logic(const std::string& query, const std::string& record_id,
                                const std::string& passage, const ChatBackend& chat,
                                const PromptLibrary& prompts,
                                int retry_limit = kDefaultRetryLimit) {
    if (trim(passage).empty()) throw PreconditionError("empty passage");
    ChatRequest req;
    req.system_prompt = prompts.render("logic_extract", {{"query", query}});
    req.history = {{"user", passage}};
    req.temperature = 0.2;
    req.template_id = "logic_extract";
    req.stage = "logic_extract";
    LogicChain chain;
    chain.points = ask_with_retry<std::vector<std::string>>(
        chat, req, [](const std::string& raw) { return parse_logic_points(raw); },
        "logic_extract", retry_limit);
    chain.source_record_id = record_id;
    return chain;
}

// Uniform seeded choice from the pool; the index is what the run record
// stores.
inline std::size_t sample_logic_index(std::size_t pool_size, std::uint64_t seed) {
    if (pool_size == 0) throw PreconditionError("empty pool");
    return static_cast<std::size_t>(SplitMix64(seed).bounded(pool_size));
}

inline const LogicChain& sample_logic(const std::vector<LogicChain>& pool, std::uint64_t seed,
                                      std::size_t* chosen_index = nullptr) {
    const std::size_t idx = sample_logic_index(pool.size(), seed);
    if (chosen_index) *chosen_index = idx;
    return pool[idx];
}

inline ReliableDesign write_reliable_design(const std::string& query, const LogicChain& chain,
                                            const ChatBackend& chat,
                                            const PromptLibrary& prompts,
                                            int retry_limit = kDefaultRetryLimit) {
    if (chain.points.size() != kLogicPointCount)
        throw PreconditionError("logic chain must have 9 points");
    ChatRequest req;
    req.system_prompt = prompts.render(
        "reliable_design",
        {{"logic", "['" + join(chain.points, "', '") + "']"}, {"query", query}});
    req.history = {{"user", "Please write the detailed step-wise design now."}};
    req.temperature = 0.2;
    req.template_id = "reliable_design";
    req.stage = "reliable_design";
    ReliableDesign design;
    design.steps = ask_with_retry<std::vector<std::pair<std::string, std::string>>>(
        chat, req, [](const std::string& raw) { return parse_step_list(raw); },
        "reliable_design", retry_limit);
    design.source_chain = chain;
    return design;
}

}  // namespace atelier
