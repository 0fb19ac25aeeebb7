#pragma once

#include <functional>
#include <string>
#include <vector>

#include "atelier/common.hpp"
#include "atelier/gateway.hpp"
#include "atelier/keyword_list.hpp"
#include "atelier/prompts.hpp"

namespace atelier {

// ---------------------------------------------------------------------------
// Retry protocol shared by every format-constrained chat stage: on a parse
// violation the stage re-asks with the violation appended, up to retry_limit
// extra attempts, then fails stage-tagged.
// ---------------------------------------------------------------------------

inline constexpr int kDefaultRetryLimit = 3;

template <typename T>
T ask_with_retry(const ChatBackend& chat, ChatRequest req,
                 const std::function<T(const std::string&)>& parse, const std::string& stage,
                 int retry_limit = kDefaultRetryLimit) {
    std::string last_violation;
    std::string last_response;
    for (int attempt = 0; attempt <= retry_limit; ++attempt) {
        if (attempt > 0) {
            req.history.push_back({"assistant", last_response});
            req.history.push_back(
                {"user", "Your previous response was invalid: " + last_violation +
                             ". Please answer again following the required format exactly."});
        }
        const ChatResponse resp = chat.chat(req);
        last_response = resp.content.empty() ? "(empty)" : resp.content;
        try {
            return parse(resp.content);
        } catch (const ParseError& e) {
            last_violation = e.what();
        }
    }
    throw StageError(stage, "unparseable after " + std::to_string(retry_limit) + " retries (" +
                                last_violation + ")",
                     last_response);
}

// ---------------------------------------------------------------------------
// Stage artifacts
// ---------------------------------------------------------------------------

struct SceneCaption {
    int index = 0;
    std::string sentence;
    KeywordList source_keywords;
};

struct CreativeStrategy {
    std::string scene_name;
    std::string strategy;
};

struct CreativeConfig {
    int association_rounds = 4;
    int imagination_count = 6;
    std::size_t keyword_subset_size = 8;
    int retry_limit = kDefaultRetryLimit;
};

// ---------------------------------------------------------------------------
// Parsers. Total over arbitrary text: they return a value or throw a
// structured ParseError, never crash.
// ---------------------------------------------------------------------------

namespace detail {

// Scans a quoted item inside a bracketed list. An apostrophe inside an item
// ("nature's") only closes the quote when followed by a delimiter.
inline bool scan_quoted_item(std::string_view block, std::size_t& pos, std::string& out) {
    while (pos < block.size() && block[pos] != '\'' && block[pos] != '"') ++pos;
    if (pos >= block.size()) return false;
    const char quote = block[pos++];
    const std::size_t start = pos;
    while (pos < block.size()) {
        if (block[pos] == quote) {
            std::size_t ahead = pos + 1;
            while (ahead < block.size() &&
                   std::isspace(static_cast<unsigned char>(block[ahead])))
                ++ahead;
            if (ahead >= block.size() || block[ahead] == ',' || block[ahead] == ']') {
                out = std::string(block.substr(start, pos - start));
                pos = ahead;
                return true;
            }
        }
        ++pos;
    }
    return false;
}

inline std::vector<std::string> quoted_items_in_first_bracket(std::string_view raw,
                                                              const std::string& stage) {
    const std::size_t open = raw.find('[');
    if (open == std::string_view::npos) throw ParseError(stage, "no bracketed list found");
    const std::size_t close = raw.find(']', open);
    if (close == std::string_view::npos) throw ParseError(stage, "unterminated bracketed list");
    std::string_view block = raw.substr(open + 1, close - open);  // include ']' as terminator
    std::vector<std::string> items;
    std::size_t pos = 0;
    std::string item;
    while (scan_quoted_item(block, pos, item)) items.push_back(trim(item));
    return items;
}

}  // namespace detail

// First bracketed, quoted list in raw; case-insensitive dedup keeping the
// first occurrence of each keyword.
inline KeywordList parse_keyword_list(const std::string& raw) {
    const auto items = detail::quoted_items_in_first_bracket(raw, "keyword_list");
    KeywordList list;
    for (const auto& item : items) {
        if (item.empty()) continue;
        if (!list.contains_ci(item)) list.items.push_back(item);
    }
    if (list.empty()) throw ParseError("keyword_list", "empty list");
    return list;
}

inline CreativeStrategy parse_strategy(const std::string& raw) {
    // First quoted-name-colon pattern: 'Scene Name': rest. A scene name is a
    // single line; an apostrophe inside the name only closes the quote when
    // followed by a colon.
    for (std::size_t open = 0; open < raw.size(); ++open) {
        if (raw[open] != '\'' && raw[open] != '"') continue;
        const char quote = raw[open];
        for (std::size_t close = open + 1; close < raw.size() && raw[close] != '\n'; ++close) {
            if (raw[close] != quote) continue;
            std::size_t after = close + 1;
            while (after < raw.size() && (raw[after] == ' ' || raw[after] == '\t')) ++after;
            if (after >= raw.size() || raw[after] != ':') continue;
            const std::string name = trim(raw.substr(open + 1, close - open - 1));
            std::string rest = trim(raw.substr(after + 1));
            // Strip a leading quoted label like 'Design strategy' if present.
            if (!rest.empty() && (rest.front() == '\'' || rest.front() == '"')) {
                const char q = rest.front();
                const std::size_t end = rest.find(q, 1);
                if (end != std::string::npos && end + 1 < rest.size())
                    rest = trim(rest.substr(end + 1));
            }
            if (!name.empty() && !rest.empty() && name != rest) return {name, rest};
        }
    }
    throw ParseError("strategy", "no 'Scene Name': 'Design Strategy' pattern found");
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

inline KeywordList extract_keywords(const std::string& query, const ChatBackend& chat,
                                    const PromptLibrary& prompts,
                                    int retry_limit = kDefaultRetryLimit) {
    if (trim(query).empty()) throw PreconditionError("empty query");
    ChatRequest req;
    req.system_prompt = prompts.get("keyword_extract");
    req.history = {{"user", query}};
    req.temperature = 0.9;
    req.template_id = "keyword_extract";
    req.stage = "keyword_extract";
    return ask_with_retry<KeywordList>(
        chat, req, [](const std::string& raw) { return parse_keyword_list(raw); },
        "keyword_extract", retry_limit);
}

inline constexpr std::size_t kAssociationKeywordCount = 15;

inline KeywordList associate(const KeywordList& seed_keywords,
                             const std::vector<KeywordList>& history, const ChatBackend& chat,
                             const PromptLibrary& prompts,
                             int retry_limit = kDefaultRetryLimit) {
    seed_keywords.validate();
    std::vector<std::string> forbidden = seed_keywords.items;
    for (const auto& list : history)
        forbidden.insert(forbidden.end(), list.items.begin(), list.items.end());

    std::string user = "Keywords: ['" + join(seed_keywords.items, "', '") + "']";
    if (!forbidden.empty())
        user += "\nDo not repeat any of: ['" + join(forbidden, "', '") + "']";

    ChatRequest req;
    req.system_prompt = prompts.get("associate");
    req.history = {{"user", user}};
    req.temperature = 0.9;
    req.template_id = "associate";
    req.stage = "associate";

    auto parse = [&forbidden](const std::string& raw) {
        KeywordList list = parse_keyword_list(raw);
        if (list.size() != kAssociationKeywordCount)
            throw ParseError("associate", "expected exactly " +
                                              std::to_string(kAssociationKeywordCount) +
                                              " keywords, got " + std::to_string(list.size()));
        for (const auto& item : list.items)
            for (const auto& f : forbidden)
                if (iequals(item, f))
                    throw ParseError("associate", "keyword '" + item + "' repeats prior keywords");
        return list;
    };
    return ask_with_retry<KeywordList>(chat, req, parse, "associate", retry_limit);
}

// Seeded draw of a keyword subset: partial Fisher-Yates over a copy of the
// flattened pool, consuming one stream of SplitMix64 draws per run.
inline std::vector<std::string> draw_keyword_subset(std::vector<std::string> pool,
                                                    std::size_t subset_size, SplitMix64& rng) {
    const std::size_t k = std::min(subset_size, pool.size());
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.bounded(pool.size() - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
}

inline std::vector<SceneCaption> imagine(const std::vector<KeywordList>& pool, int count,
                                         std::uint64_t seed, const ChatBackend& chat,
                                         const PromptLibrary& prompts,
                                         std::size_t subset_size = 8,
                                         int retry_limit = kDefaultRetryLimit) {
    std::vector<std::string> flattened;
    for (const auto& list : pool)
        flattened.insert(flattened.end(), list.items.begin(), list.items.end());
    if (flattened.size() < 5) throw PreconditionError("keyword pool too small (< 5)");
    if (count < 1) throw PreconditionError("count must be >= 1");

    SplitMix64 rng(seed);
    std::vector<SceneCaption> captions;
    for (int i = 0; i < count; ++i) {
        KeywordList subset;
        subset.items = draw_keyword_subset(flattened, subset_size, rng);
        ChatRequest req;
        req.system_prompt = prompts.get("imagine");
        req.history = {{"user", "Keywords: ['" + join(subset.items, "', '") + "']"}};
        req.temperature = 0.9;
        req.template_id = "imagine";
        req.stage = "imagine";
        const std::string sentence = ask_with_retry<std::string>(
            chat, req,
            [](const std::string& raw) -> std::string {
                const std::string s = trim(raw);
                if (s.empty()) throw ParseError("imagine", "empty caption");
                return s;
            },
            "imagine", retry_limit);
        captions.push_back({i + 1, sentence, std::move(subset)});
    }
    return captions;
}

inline std::vector<CreativeStrategy> draft_strategies(const std::vector<SceneCaption>& captions,
                                                      const ChatBackend& chat,
                                                      const PromptLibrary& prompts,
                                                      int retry_limit = kDefaultRetryLimit) {
    if (captions.empty()) throw PreconditionError("no captions");
    std::vector<CreativeStrategy> strategies;
    for (const auto& caption : captions) {
        ChatRequest req;
        req.system_prompt = prompts.get("strategy");
        req.history = {{"user", caption.sentence}};
        req.temperature = 0.9;
        req.template_id = "strategy";
        req.stage = "strategy";
        strategies.push_back(ask_with_retry<CreativeStrategy>(
            chat, req, [](const std::string& raw) { return parse_strategy(raw); }, "strategy",
            retry_limit));
    }
    return strategies;
}

}  // namespace atelier
