#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "atelier/common.hpp"
#include "atelier/image_request.hpp"

namespace atelier {

// ---------------------------------------------------------------------------
// Chat types
// ---------------------------------------------------------------------------

struct ChatMessage {
    std::string role;  // system | user | assistant
    std::string content;
};

struct ChatRequest {
    std::string system_prompt;
    std::vector<ChatMessage> history;
    double temperature = 0.2;
    std::optional<std::uint64_t> seed;
    int max_tokens = 4096;

    // Routing metadata, not part of the wire payload: the mock backend keys
    // canned fixtures by template_id; stage names feed the call recorder.
    std::string template_id;
    std::string stage;

    void validate() const {
        if (history.empty()) throw PreconditionError("empty history");
        if (temperature < 0.0 || temperature > 2.0)
            throw PreconditionError("temperature out of range");
        if (max_tokens <= 0) throw PreconditionError("max_tokens must be positive");
        // Leading system entries are allowed; after them roles must
        // alternate user/assistant starting with user.
        std::size_t i = 0;
        while (i < history.size() && history[i].role == "system") ++i;
        bool expect_user = true;
        for (; i < history.size(); ++i) {
            const auto& msg = history[i];
            if (msg.content.empty()) throw PreconditionError("empty message content");
            const std::string expected = expect_user ? "user" : "assistant";
            if (msg.role != expected)
                throw PreconditionError("history roles must alternate user/assistant, got '" +
                                        msg.role + "'");
            expect_user = !expect_user;
        }
    }
};

struct TokenUsage {
    int prompt_tokens = 0;
    int completion_tokens = 0;
};

struct ChatResponse {
    std::string content;
    std::string backend_id;
    TokenUsage usage;
};

// ---------------------------------------------------------------------------
// Embedding types
// ---------------------------------------------------------------------------

namespace space {
inline constexpr const char* text = "text";    // text-to-text search
inline constexpr const char* joint = "joint";  // joint text-image search
}  // namespace space

struct EmbeddingVector {
    std::vector<double> values;
    std::string space_id;

    std::size_t dimension() const { return values.size(); }

    void validate() const {
        if (values.empty()) throw PreconditionError("empty embedding");
        for (double v : values)
            if (!std::isfinite(v)) throw PreconditionError("non-finite embedding value");
    }
};

struct BackendConfig {
    std::string endpoint_url;
    std::string model_name;
    std::optional<std::string> auth_token;
    std::chrono::milliseconds timeout{30000};
    int max_retries = 2;

    void validate() const {
        if (max_retries < 0) throw PreconditionError("max_retries must be >= 0");
        if (timeout.count() <= 0) throw PreconditionError("timeout must be positive");
    }
};

// ---------------------------------------------------------------------------
// Backend interfaces. Immutable after construction, shareable across runs.
// ---------------------------------------------------------------------------

class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    virtual ChatResponse chat(const ChatRequest& req) const = 0;
};

class EmbedBackend {
public:
    virtual ~EmbedBackend() = default;

    // One vector per input, order preserved, all the same dimension.
    virtual std::vector<EmbeddingVector> embed_text(const std::vector<std::string>& texts,
                                                    const std::string& space_id) const = 0;

    // caption_proxy=true treats image_ref as the image's caption text and
    // embeds it in the joint space; otherwise image_ref is a file path.
    virtual EmbeddingVector embed_image(const std::string& image_ref,
                                        bool caption_proxy) const = 0;
};

class ImageBackend {
public:
    virtual ~ImageBackend() = default;
    virtual ImageResult generate(const ImageRequest& req) const = 0;
};

// ---------------------------------------------------------------------------
// Wire payload builders (chat-completions protocol), kept as free functions
// so the wire shape is testable without a live endpoint.
// ---------------------------------------------------------------------------

inline nlohmann::json build_chat_payload(const ChatRequest& req, const std::string& model) {
    nlohmann::json messages = nlohmann::json::array();
    if (!req.system_prompt.empty())
        messages.push_back({{"role", "system"}, {"content", req.system_prompt}});
    for (const auto& msg : req.history)
        messages.push_back({{"role", msg.role}, {"content", msg.content}});
    nlohmann::json payload{
        {"model", model},
        {"messages", messages},
        {"temperature", req.temperature},
        {"max_tokens", req.max_tokens},
    };
    if (req.seed) payload["seed"] = *req.seed;
    return payload;
}

inline ChatResponse parse_chat_payload(const nlohmann::json& body, const std::string& backend_id) {
    ChatResponse resp;
    resp.backend_id = backend_id;
    try {
        resp.content = rtrim(body.at("choices").at(0).at("message").at("content").get<std::string>());
        if (body.contains("usage")) {
            resp.usage.prompt_tokens = body["usage"].value("prompt_tokens", 0);
            resp.usage.completion_tokens = body["usage"].value("completion_tokens", 0);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ProtocolError(200, std::string("malformed chat response: ") + e.what());
    }
    if (resp.content.empty()) throw ProtocolError(200, "empty completion content");
    return resp;
}

inline nlohmann::json build_embedding_payload(const std::vector<std::string>& texts,
                                              const std::string& model) {
    return nlohmann::json{{"input", texts}, {"model", model}};
}

// ---------------------------------------------------------------------------
// Retry wrapper: 1 + min(failures, max_retries) total attempts, exponential
// backoff between transport failures. Protocol errors are not retried.
// ---------------------------------------------------------------------------

template <typename Fn>
auto with_retries(int max_retries, std::chrono::milliseconds base_backoff, Fn&& fn)
    -> decltype(fn()) {
    int attempt = 0;
    for (;;) {
        try {
            return fn();
        } catch (const TransportError&) {
            if (attempt >= max_retries) throw;
            std::this_thread::sleep_for(base_backoff * (1 << attempt));
            ++attempt;
        }
    }
}

// ---------------------------------------------------------------------------
// Mock chat backend. Template-driven: responses come from canned fixtures
// keyed by ChatRequest::template_id, rotating through variants in call
// order so multi-call stages (association rounds, per-section expansion)
// receive the fixture matching their position. Records every request for
// oracle tests. Deterministic given fixtures and call order.
// ---------------------------------------------------------------------------

class MockChatBackend : public ChatBackend {
public:
    MockChatBackend() = default;

    explicit MockChatBackend(const std::string& fixtures_dir) { load_dir(fixtures_dir); }

    void load_dir(const std::string& dir) {
        namespace fs = std::filesystem;
        if (!fs::is_directory(dir)) throw Error("mock fixtures directory not found: " + dir);
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(dir))
            if (entry.path().extension() == ".json") files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        for (const auto& file : files) {
            const auto doc = nlohmann::json::parse(read_file(file.string()));
            std::vector<std::string> variants;
            for (const auto& v : doc.at("variants")) variants.push_back(v.get<std::string>());
            add_template(doc.at("template").get<std::string>(), variants);
        }
    }

    void add_template(const std::string& id, std::vector<std::string> variants) {
        if (variants.empty()) throw Error("mock template '" + id + "' has no variants");
        templates_[id] = std::move(variants);
    }

    ChatResponse chat(const ChatRequest& req) const override {
        req.validate();
        std::lock_guard<std::mutex> lock(mutex_);
        recorded_.push_back(req);
        auto it = templates_.find(req.template_id);
        if (it == templates_.end())
            throw Error("mock backend: unknown template '" + req.template_id + "'");
        const auto& variants = it->second;
        const std::size_t idx = counters_[req.template_id]++ % variants.size();
        ChatResponse resp;
        resp.content = rtrim(variants[idx]);
        resp.backend_id = "mock-chat";
        resp.usage.prompt_tokens = static_cast<int>(req.system_prompt.size() / 4);
        resp.usage.completion_tokens = static_cast<int>(resp.content.size() / 4);
        return resp;
    }

    std::vector<ChatRequest> recorded_calls() const {
        std::lock_guard<std::mutex> lock(mutex_);
        return recorded_;
    }

    std::size_t call_count(const std::string& template_id) const {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = counters_.find(template_id);
        return it == counters_.end() ? 0 : it->second;
    }

    void reset() {
        std::lock_guard<std::mutex> lock(mutex_);
        recorded_.clear();
        counters_.clear();
    }

private:
    std::map<std::string, std::vector<std::string>> templates_;
    mutable std::map<std::string, std::size_t> counters_;
    mutable std::vector<ChatRequest> recorded_;
    mutable std::mutex mutex_;
};

// Chat backend that fails with a transport error a fixed number of times
// before delegating; used by retry-bound tests.
class FlakyChatBackend : public ChatBackend {
public:
    FlakyChatBackend(std::shared_ptr<ChatBackend> inner, int failures)
        : inner_(std::move(inner)), failures_(failures) {}

    ChatResponse chat(const ChatRequest& req) const override {
        ++attempts_;
        if (seen_failures_ < failures_) {
            ++seen_failures_;
            throw TransportError("injected transport failure");
        }
        return inner_->chat(req);
    }

    int attempts() const { return attempts_; }

private:
    std::shared_ptr<ChatBackend> inner_;
    int failures_;
    mutable int seen_failures_ = 0;
    mutable int attempts_ = 0;
};

// ---------------------------------------------------------------------------
// Mock embedding backend: dimension 64, coordinates derived from a stable
// hash of (space_id, input, coordinate index), mapped into [-1, 1].
// ---------------------------------------------------------------------------

class MockEmbedBackend : public EmbedBackend {
public:
    explicit MockEmbedBackend(std::size_t dimension = 64) : dimension_(dimension) {}

    std::size_t dimension() const { return dimension_; }

    // The documented hash rule; tests recompute vectors through this.
    static double coordinate(const std::string& space_id, const std::string& input,
                             std::size_t index) {
        const std::uint64_t h =
            fnv1a(space_id + '\x1f' + input + '\x1f' + std::to_string(index));
        return static_cast<double>(h >> 11) * 0x1.0p-53 * 2.0 - 1.0;
    }

    std::vector<EmbeddingVector> embed_text(const std::vector<std::string>& texts,
                                            const std::string& space_id) const override {
        if (texts.empty()) throw PreconditionError("empty batch");
        std::vector<EmbeddingVector> out;
        out.reserve(texts.size());
        for (const auto& text : texts) {
            if (text.empty()) throw PreconditionError("empty text in batch");
            out.push_back(hash_vector(space_id, text));
        }
        return out;
    }

    EmbeddingVector embed_image(const std::string& image_ref,
                                bool caption_proxy) const override {
        if (caption_proxy) {
            if (image_ref.empty()) throw PreconditionError("empty caption proxy");
            return hash_vector(space::joint, image_ref);
        }
        if (!std::filesystem::exists(image_ref))
            throw Error("resource not found: " + image_ref);
        return hash_vector(space::joint, "bytes:" + read_file(image_ref));
    }

private:
    EmbeddingVector hash_vector(const std::string& space_id, const std::string& input) const {
        EmbeddingVector vec;
        vec.space_id = space_id;
        vec.values.resize(dimension_);
        for (std::size_t j = 0; j < dimension_; ++j)
            vec.values[j] = coordinate(space_id, input, j);
        return vec;
    }

    std::size_t dimension_;
};

// ---------------------------------------------------------------------------
// Image backends
// ---------------------------------------------------------------------------

// Deterministic stub: bytes depend only on (seed, prompt hash).
class MockImageBackend : public ImageBackend {
public:
    static std::string stub_bytes(std::int64_t seed, const std::string& positive_prompt) {
        SplitMix64 rng(static_cast<std::uint64_t>(seed) ^ fnv1a(positive_prompt));
        std::string bytes;
        for (int i = 0; i < 2; ++i) {
            std::uint64_t w = rng.next();
            for (int b = 0; b < 8; ++b) bytes += static_cast<char>((w >> (8 * b)) & 0xff);
        }
        return bytes;
    }

    ImageResult generate(const ImageRequest& req) const override {
        req.validate();
        ImageResult result;
        result.status = "ok";
        result.image_bytes = stub_bytes(req.seed, req.prompt.positive);
        result.payload_json = build_txt2img_payload(req).dump();
        result.backend_id = "mock-image";
        result.stub_caption = req.prompt.positive;
        return result;
    }
};

// Emit-only: serializes the payload without dispatching anywhere.
class EmitOnlyImageBackend : public ImageBackend {
public:
    ImageResult generate(const ImageRequest& req) const override {
        req.validate();
        ImageResult result;
        result.status = "not_dispatched";
        result.payload_json = build_txt2img_payload(req).dump();
        result.backend_id = "emit-only";
        result.stub_caption = req.prompt.positive;
        return result;
    }
};

}  // namespace atelier
