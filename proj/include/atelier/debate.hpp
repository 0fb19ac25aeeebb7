#pragma once

#include <string>
#include <vector>

#include "atelier/common.hpp"
#include "atelier/gateway.hpp"
#include "atelier/prompts.hpp"

namespace atelier {

// ---------------------------------------------------------------------------
// Fixed-round adversarial exchange between the creative and reliable
// personas. The creative role opens every round; its first user message is
// the reliable design, so the debate starts as an attack on the step-wise
// plan.
// ---------------------------------------------------------------------------

struct Turn {
    int round = 0;
    std::string role;  // "creative" | "reliable"
    std::string content;
};

struct DebateTranscript {
    std::string query;
    std::string creative_digest;
    std::string reliable_digest;
    std::vector<Turn> turns;
    int rounds = 0;

    void validate() const {
        if (rounds < 1) throw PreconditionError("rounds must be >= 1");
        if (turns.size() != static_cast<std::size_t>(2 * rounds))
            throw PreconditionError("transcript must have 2 x rounds turns");
        for (std::size_t i = 0; i < turns.size(); ++i) {
            const auto& turn = turns[i];
            if (turn.content.empty()) throw PreconditionError("empty turn content");
            const std::string expected = (i % 2 == 0) ? "creative" : "reliable";
            if (turn.role != expected)
                throw PreconditionError("turns must alternate creative/reliable");
            if (turn.round != static_cast<int>(i / 2) + 1)
                throw PreconditionError("round numbering mismatch");
        }
    }
};

struct DebateState {
    std::string query;
    std::string creative_system_prompt;
    std::string reliable_system_prompt;
    std::string creative_digest;
    std::string reliable_digest;
    std::vector<Turn> turns;
};

inline DebateState open_debate(const std::string& query, const std::string& creative_material,
                               const std::string& reliable_material,
                               const PromptLibrary& prompts) {
    if (trim(creative_material).empty() || trim(reliable_material).empty())
        throw PreconditionError("empty debate seed material");
    DebateState state;
    state.query = query;
    state.creative_digest = creative_material;
    state.reliable_digest = reliable_material;
    state.creative_system_prompt = prompts.render(
        "debate_creative_system", {{"query", query}, {"material", creative_material}});
    state.reliable_system_prompt = prompts.render(
        "debate_reliable_system", {{"query", query}, {"material", reliable_material}});
    return state;
}

namespace detail {

// Builds one side's chat request: its own prior turns as assistant messages,
// the opponent's as user messages, newest last.
inline ChatRequest debate_request(const DebateState& state, const std::string& role,
                                  std::uint64_t seed) {
    ChatRequest req;
    req.temperature = role == "creative" ? 0.9 : 0.2;
    req.seed = seed;
    req.template_id = "debate_" + role;
    req.stage = "debate";
    req.system_prompt =
        role == "creative" ? state.creative_system_prompt : state.reliable_system_prompt;
    if (state.turns.empty()) {
        // The creative agent opens by attacking the step-wise plan.
        req.history.push_back({"user", state.reliable_digest});
        return req;
    }
    std::vector<ChatMessage> messages;
    for (const auto& turn : state.turns)
        messages.push_back({turn.role == role ? "assistant" : "user", turn.content});
    if (role == "creative") messages.insert(messages.begin(), {"user", state.reliable_digest});
    req.history = std::move(messages);
    return req;
}

}  // namespace detail

// Runs the full exchange. A chat failure mid-debate aborts with the valid
// prefix (all completed full rounds) attached to the error.
inline DebateTranscript run_debate(DebateState state, int rounds, const ChatBackend& chat,
                                   std::uint64_t seed = 0) {
    if (rounds < 1) throw PreconditionError("rounds must be >= 1");
    for (int round = 1; round <= rounds; ++round) {
        for (const std::string role : {"creative", "reliable"}) {
            ChatRequest req = detail::debate_request(state, role, seed);
            ChatResponse resp;
            try {
                resp = chat.chat(req);
            } catch (const Error& e) {
                // Preserve a valid prefix: drop any half-finished round.
                while (!state.turns.empty() && state.turns.size() % 2 != 0)
                    state.turns.pop_back();
                std::string prefix;
                for (const auto& turn : state.turns)
                    prefix += "[" + turn.role + " " + std::to_string(turn.round) + "]\n" +
                              turn.content + "\n";
                throw StageError("debate",
                                 "aborted in round " + std::to_string(round) + ": " + e.what(),
                                 prefix);
            }
            state.turns.push_back({round, role, resp.content});
        }
    }
    DebateTranscript transcript;
    transcript.query = state.query;
    transcript.creative_digest = state.creative_digest;
    transcript.reliable_digest = state.reliable_digest;
    transcript.turns = std::move(state.turns);
    transcript.rounds = rounds;
    transcript.validate();
    return transcript;
}

inline std::string render_transcript_markdown(const DebateTranscript& transcript) {
    std::string out = "# Debate Transcript\n\n";
    out += "Query: " + transcript.query + "\n";
    int last_round = 0;
    for (const auto& turn : transcript.turns) {
        if (turn.round != last_round) {
            out += "\n## Round " + std::to_string(turn.round) + "\n";
            last_round = turn.round;
        }
        out += "\n### " + std::string(turn.role == "creative" ? "Creative Agent" : "Reliable Agent") +
               "\n\n" + turn.content + "\n";
    }
    return out;
}

}  // namespace atelier
