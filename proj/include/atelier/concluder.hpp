#pragma once

#include <string>
#include <vector>

#include "atelier/common.hpp"
#include "atelier/creative.hpp"
#include "atelier/debate.hpp"
#include "atelier/prompts.hpp"

namespace atelier {

// ---------------------------------------------------------------------------
// Conclusion-chain artifacts
// ---------------------------------------------------------------------------

struct Framework {
    std::string title;
    std::vector<std::pair<int, std::string>> subheadings;  // contiguous from 1

    void validate(int min_count = 3, int max_count = 12) const {
        if (title.empty()) throw PreconditionError("framework title empty");
        const int n = static_cast<int>(subheadings.size());
        if (n < min_count || n > max_count)
            throw PreconditionError("subheading count out of bounds: " + std::to_string(n));
        std::vector<std::string> seen;
        for (int i = 0; i < n; ++i) {
            if (subheadings[static_cast<std::size_t>(i)].first != i + 1)
                throw PreconditionError("framework numbering not contiguous");
            const auto& heading = subheadings[static_cast<std::size_t>(i)].second;
            for (const auto& s : seen)
                if (s == heading) throw PreconditionError("duplicate heading: " + heading);
            seen.push_back(heading);
        }
    }
};

struct Section {
    int number = 0;
    std::string subheading;
    std::string specifics;
};

struct DesignDocument {
    std::string title;
    std::vector<Section> sections;
    std::string source_transcript_id;
    std::string hash;
};

struct ConcluderConfig {
    int section_count = 6;  // configurable 3..12
    std::size_t history_char_budget = 60000;
    int retry_limit = kDefaultRetryLimit;
};

// ---------------------------------------------------------------------------
// Parsers
// ---------------------------------------------------------------------------

// Framework response shape: a "Title:" line (or first non-empty line)
// followed by numbered headings "N. Heading" / "N: Heading".
inline Framework parse_framework(const std::string& raw) {
    Framework fw;
    for (const auto& line_raw : split_lines(raw)) {
        const std::string line = trim(line_raw);
        if (line.empty()) continue;
        if (fw.title.empty() && to_lower(line).rfind("title", 0) == 0) {
            const std::size_t colon = line.find(':');
            if (colon != std::string::npos) {
                fw.title = trim(line.substr(colon + 1));
                continue;
            }
        }
        std::size_t pos = 0;
        while (pos < line.size() && std::isdigit(static_cast<unsigned char>(line[pos]))) ++pos;
        if (pos > 0 && pos < line.size() && (line[pos] == '.' || line[pos] == ':' || line[pos] == ')')) {
            int number = 0;
            try {
                number = std::stoi(line.substr(0, pos));
            } catch (const std::exception&) {
                throw ParseError("framework", "heading number out of range");
            }
            std::string heading = trim(line.substr(pos + 1));
            if (!heading.empty()) {
                fw.subheadings.emplace_back(number, heading);
                continue;
            }
        }
        if (fw.title.empty()) fw.title = line;
    }
    if (fw.title.empty()) throw ParseError("framework", "no title found");
    if (fw.subheadings.empty()) throw ParseError("framework", "no numbered subheadings found");
    for (std::size_t i = 0; i < fw.subheadings.size(); ++i)
        if (fw.subheadings[i].first != static_cast<int>(i + 1))
            throw ParseError("framework", "subheading numbering not contiguous");
    return fw;
}

// Parses "[1: A, 2: B, ...]": number-colon-heading pairs, re-sorted by
// number, duplicate numbers rejected.
inline std::vector<std::pair<int, std::string>> verify_framework(const std::string& raw) {
    const std::size_t open = raw.find('[');
    if (open == std::string::npos) throw ParseError("framework_verify", "no bracketed list found");
    const std::size_t close = raw.find(']', open);
    if (close == std::string::npos)
        throw ParseError("framework_verify", "unterminated bracketed list");
    const std::string block = raw.substr(open + 1, close - open - 1);

    std::vector<std::pair<int, std::string>> pairs;
    std::size_t start = 0;
    while (start <= block.size()) {
        std::size_t comma = block.find(',', start);
        if (comma == std::string::npos) comma = block.size();
        const std::string piece = trim(block.substr(start, comma - start));
        start = comma + 1;
        if (piece.empty()) continue;
        const std::size_t colon = piece.find(':');
        if (colon == std::string::npos)
            throw ParseError("framework_verify", "entry without ':' separator: '" + piece + "'");
        int number = 0;
        try {
            number = std::stoi(trim(piece.substr(0, colon)));
        } catch (const std::exception&) {
            throw ParseError("framework_verify", "non-numeric entry number: '" + piece + "'");
        }
        std::string heading = trim(piece.substr(colon + 1));
        // Collapse internal whitespace runs.
        std::string normalized;
        bool in_space = false;
        for (char c : heading) {
            if (std::isspace(static_cast<unsigned char>(c))) {
                if (!in_space) normalized += ' ';
                in_space = true;
            } else {
                normalized += c;
                in_space = false;
            }
        }
        if (normalized.empty())
            throw ParseError("framework_verify", "empty heading for number " + std::to_string(number));
        for (const auto& [n, h] : pairs)
            if (n == number)
                throw ParseError("framework_verify", "duplicate number " + std::to_string(number));
        pairs.emplace_back(number, normalized);
    }
    if (pairs.empty()) throw ParseError("framework_verify", "empty list");
    std::sort(pairs.begin(), pairs.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    return pairs;
}

// Parses "[number,subheadings,specifics]": tolerates quoted triples
// (['1', 'Heading', 'text...']) and plain comma splits; specifics keep their
// internal commas.
inline Section parse_section(const std::string& raw) {
    const std::size_t open = raw.find('[');
    if (open == std::string::npos) throw ParseError("section", "no bracketed section found");
    const std::size_t close = raw.rfind(']');
    if (close == std::string::npos || close <= open)
        throw ParseError("section", "unterminated bracketed section");
    const std::string block = raw.substr(open + 1, close - open - 1);

    Section section;
    std::string number_str, heading, specifics;
    std::size_t pos = 0;
    std::string first, second;
    if (detail::scan_quoted_item(block, pos, first)) {
        // Quoted form. The third element runs to the end of the block.
        std::size_t pos2 = pos;
        if (!detail::scan_quoted_item(block, pos2, second))
            throw ParseError("section", "quoted section needs three elements");
        std::size_t rest_begin = block.find_first_of("'\"", pos2);
        if (rest_begin == std::string::npos)
            throw ParseError("section", "quoted section needs three elements");
        const char q = block[rest_begin];
        std::size_t rest_end = block.rfind(q);
        if (rest_end <= rest_begin) rest_end = block.size();
        number_str = first;
        heading = second;
        specifics = trim(block.substr(rest_begin + 1, rest_end - rest_begin - 1));
    } else {
        const std::size_t c1 = block.find(',');
        if (c1 == std::string::npos) throw ParseError("section", "section needs three elements");
        const std::size_t c2 = block.find(',', c1 + 1);
        if (c2 == std::string::npos) throw ParseError("section", "section needs three elements");
        number_str = trim(block.substr(0, c1));
        heading = trim(block.substr(c1 + 1, c2 - c1 - 1));
        specifics = trim(block.substr(c2 + 1));
    }
    try {
        section.number = std::stoi(number_str);
    } catch (const std::exception&) {
        throw ParseError("section", "non-numeric section number: '" + number_str + "'");
    }
    section.subheading = trim(heading);
    section.specifics = specifics;
    if (section.subheading.empty() || section.specifics.empty())
        throw ParseError("section", "empty subheading or specifics");
    return section;
}

// ---------------------------------------------------------------------------
// Conclusion session: continues the debate's history ("Following our recent
// discussions..."), so the same growing message list backs the framework
// request and every section expansion.
// ---------------------------------------------------------------------------

class ConcluderSession {
public:
    ConcluderSession(const DebateTranscript& transcript, const PromptLibrary& prompts,
                     ConcluderConfig config = {})
        : prompts_(prompts), config_(config) {
        transcript.validate();
        // Creative turns become user messages, reliable turns assistant:
        // the concluder dialogue continues as the user speaking to the
        // reliable designer. Truncated oldest-first under the budget, whole
        // rounds at a time so alternation survives.
        std::size_t total = 0;
        for (const auto& turn : transcript.turns) total += turn.content.size();
        std::size_t skip_turns = 0;
        while (total > config_.history_char_budget &&
               skip_turns + 2 < transcript.turns.size()) {
            total -= transcript.turns[skip_turns].content.size();
            total -= transcript.turns[skip_turns + 1].content.size();
            skip_turns += 2;
        }
        truncated_turns_ = skip_turns;
        for (std::size_t i = skip_turns; i < transcript.turns.size(); ++i) {
            const auto& turn = transcript.turns[i];
            history_.push_back({turn.role == "creative" ? "user" : "assistant", turn.content});
        }
    }

    std::size_t truncated_turns() const { return truncated_turns_; }

    Framework request_framework(const ChatBackend& chat, int target_count = 6) {
        const std::string ask =
            prompts_.render("framework_request", {{"count", std::to_string(target_count)}});
        std::string raw = exchange(chat, ask, "framework_request", "framework");
        for (int attempt = 0;; ++attempt) {
            try {
                Framework fw = parse_framework(raw);
                if (static_cast<int>(fw.subheadings.size()) != target_count)
                    throw ParseError("framework",
                                     "expected " + std::to_string(target_count) +
                                         " subheadings, got " +
                                         std::to_string(fw.subheadings.size()));
                fw.validate();
                framework_ = fw;
                return fw;
            } catch (const ParseError& e) {
                if (attempt >= config_.retry_limit)
                    throw StageError("framework", std::string("retry exhaustion: ") + e.what(), raw);
                // Count mismatch or malformed shape: fire the verification
                // prompt and rebuild from its normalized pairs.
                const std::string verify_ask = prompts_.render(
                    "framework_verify", {{"count", std::to_string(target_count)}});
                const std::string verify_raw =
                    exchange(chat, verify_ask, "framework_verify", "framework");
                try {
                    Framework fw;
                    fw.title = extract_title(raw);
                    fw.subheadings = verify_framework(verify_raw);
                    if (static_cast<int>(fw.subheadings.size()) != target_count)
                        throw ParseError("framework_verify", "verification count mismatch");
                    fw.validate();
                    framework_ = fw;
                    return fw;
                } catch (const ParseError& e2) {
                    if (attempt + 1 > config_.retry_limit)
                        throw StageError("framework",
                                         std::string("retry exhaustion: ") + e2.what(), verify_raw);
                    raw = exchange(chat, ask, "framework_request", "framework");
                }
            }
        }
    }

    Section expand_section(const Framework& framework, int index, const ChatBackend& chat) {
        if (index < 1 || index > static_cast<int>(framework.subheadings.size()))
            throw PreconditionError("section index out of range");
        std::string fw_text = framework.title + ": ";
        for (const auto& [n, heading] : framework.subheadings)
            fw_text += std::to_string(n) + ". " + heading + "; ";
        const std::string ask = prompts_.render(
            "section_expand",
            {{"framework", fw_text}, {"index", std::to_string(index)}});

        std::string violation;
        for (int attempt = 0; attempt <= config_.retry_limit; ++attempt) {
            const std::string prompt =
                attempt == 0 ? ask
                             : ask + "\nYour previous response was invalid: " + violation;
            const std::string raw = exchange(chat, prompt, "section_expand", "sections");
            try {
                Section section = parse_section(raw);
                if (section.number != index)
                    throw ParseError("section", "expanded index " +
                                                    std::to_string(section.number) +
                                                    ", wanted " + std::to_string(index));
                const auto& expected =
                    framework.subheadings[static_cast<std::size_t>(index - 1)].second;
                if (!iequals(section.subheading, expected))
                    throw ParseError("section", "subheading mismatch: '" + section.subheading +
                                                    "' vs framework '" + expected + "'");
                return section;
            } catch (const ParseError& e) {
                violation = e.what();
            }
        }
        throw StageError("sections", "retry exhaustion expanding section " +
                                         std::to_string(index) + " (" + violation + ")");
    }

private:
    std::string extract_title(const std::string& raw) const {
        try {
            return parse_framework(raw).title;
        } catch (const ParseError&) {
            return "Design Proposal";
        }
    }

    std::string exchange(const ChatBackend& chat, const std::string& user_message,
                         const std::string& template_id, const std::string& stage) {
        ChatRequest req;
        req.system_prompt =
            "You are the designer concluding the preceding discussion into a final document.";
        req.history = history_;
        req.history.push_back({"user", user_message});
        req.temperature = 0.2;
        req.template_id = template_id;
        req.stage = stage;
        const ChatResponse resp = chat.chat(req);
        history_.push_back({"user", user_message});
        history_.push_back({"assistant", resp.content});
        return resp.content;
    }

    const PromptLibrary& prompts_;
    ConcluderConfig config_;
    std::vector<ChatMessage> history_;
    std::size_t truncated_turns_ = 0;
    Framework framework_;
};

// ---------------------------------------------------------------------------
// Document assembly: order-independent over its inputs, content-hashed.
// ---------------------------------------------------------------------------

inline DesignDocument assemble_document(const std::string& title, std::vector<Section> sections,
                                        const std::string& source_transcript_id = "") {
    if (sections.empty()) throw PreconditionError("no sections");
    std::sort(sections.begin(), sections.end(),
              [](const Section& a, const Section& b) { return a.number < b.number; });
    for (std::size_t i = 0; i < sections.size(); ++i) {
        const int expected = static_cast<int>(i + 1);
        if (sections[i].number != expected) {
            if (i > 0 && sections[i].number == sections[i - 1].number)
                throw PreconditionError("duplicate section number " +
                                        std::to_string(sections[i].number));
            throw PreconditionError("missing section " + std::to_string(expected));
        }
    }
    DesignDocument doc;
    doc.title = title;
    doc.sections = std::move(sections);
    doc.source_transcript_id = source_transcript_id;
    std::string canonical = title;
    for (const auto& s : doc.sections)
        canonical += '\x1e' + std::to_string(s.number) + '\x1f' + s.subheading + '\x1f' + s.specifics;
    doc.hash = content_hash(canonical);
    return doc;
}

inline std::string render_document_markdown(const DesignDocument& doc) {
    std::string out = "# " + doc.title + "\n";
    for (const auto& section : doc.sections)
        out += "\n## " + std::to_string(section.number) + ". " + section.subheading + "\n\n" +
               section.specifics + "\n";
    return out;
}

}  // namespace atelier
