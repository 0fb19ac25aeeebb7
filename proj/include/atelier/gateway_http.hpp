#pragma once

// Live HTTP backends for the three model services. Split from gateway.hpp so
// only the CLI and wire tests pay for httplib.

#include <httplib.h>

#include "atelier/gateway.hpp"

namespace atelier {

namespace detail {

struct ParsedUrl {
    std::string host_port;  // scheme://host[:port], as httplib::Client wants it
    std::string path;
};

inline ParsedUrl parse_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw Error("invalid endpoint url: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

inline nlohmann::json post_json(const BackendConfig& config, const std::string& path_suffix,
                                const nlohmann::json& payload) {
    config.validate();
    const auto url = parse_url(config.endpoint_url);
    std::string path = url.path;
    if (!path_suffix.empty()) {
        if (path.back() == '/') path.pop_back();
        path += path_suffix;
    }
    return with_retries(config.max_retries, std::chrono::milliseconds(100), [&] {
        httplib::Client client(url.host_port);
        client.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(config.timeout));
        client.set_read_timeout(std::chrono::duration_cast<std::chrono::seconds>(config.timeout));
        httplib::Headers headers;
        if (config.auth_token)
            headers.emplace("Authorization", "Bearer " + *config.auth_token);
        auto res = client.Post(path, headers, payload.dump(), "application/json");
        if (!res) throw TransportError("endpoint unreachable: " + config.endpoint_url);
        if (res->status < 200 || res->status >= 300)
            throw ProtocolError(res->status, res->body.substr(0, 512));
        try {
            return nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::exception& e) {
            throw ProtocolError(res->status, std::string("invalid JSON body: ") + e.what());
        }
    });
}

}  // namespace detail

class HttpChatBackend : public ChatBackend {
public:
    explicit HttpChatBackend(BackendConfig config) : config_(std::move(config)) {
        config_.validate();
    }

    ChatResponse chat(const ChatRequest& req) const override {
        req.validate();
        const auto body = detail::post_json(config_, "", build_chat_payload(req, config_.model_name));
        return parse_chat_payload(body, config_.model_name);
    }

private:
    BackendConfig config_;
};

class HttpEmbedBackend : public EmbedBackend {
public:
    explicit HttpEmbedBackend(BackendConfig config) : config_(std::move(config)) {
        config_.validate();
    }

    std::vector<EmbeddingVector> embed_text(const std::vector<std::string>& texts,
                                            const std::string& space_id) const override {
        if (texts.empty()) throw PreconditionError("empty batch");
        for (const auto& t : texts)
            if (t.empty()) throw PreconditionError("empty text in batch");
        const auto body =
            detail::post_json(config_, "", build_embedding_payload(texts, config_.model_name));
        std::vector<EmbeddingVector> out;
        try {
            for (const auto& item : body.at("data")) {
                EmbeddingVector vec;
                vec.space_id = space_id;
                for (const auto& v : item.at("embedding")) vec.values.push_back(v.get<double>());
                vec.validate();
                out.push_back(std::move(vec));
            }
        } catch (const nlohmann::json::exception& e) {
            throw ProtocolError(200, std::string("malformed embedding response: ") + e.what());
        }
        if (out.size() != texts.size())
            throw ProtocolError(200, "embedding count mismatch with batch size");
        for (const auto& vec : out)
            if (vec.dimension() != out.front().dimension())
                throw Error("dimension mismatch across batch");
        return out;
    }

    EmbeddingVector embed_image(const std::string& image_ref, bool caption_proxy) const override {
        // Caption-proxy is the only live mode: joint-space image embedding is
        // served by embedding the caption text.
        if (!caption_proxy) throw Error("unsupported space: live backend requires caption proxy");
        if (image_ref.empty()) throw PreconditionError("empty caption proxy");
        return embed_text({image_ref}, space::joint).front();
    }

private:
    BackendConfig config_;
};

class HttpImageBackend : public ImageBackend {
public:
    explicit HttpImageBackend(BackendConfig config) : config_(std::move(config)) {
        config_.validate();
    }

    ImageResult generate(const ImageRequest& req) const override {
        req.validate();
        const auto payload = build_txt2img_payload(req);
        const auto body = detail::post_json(config_, "", payload);
        ImageResult result;
        result.status = "ok";
        result.payload_json = payload.dump();
        result.backend_id = config_.model_name;
        try {
            if (body.contains("images") && !body["images"].empty())
                result.image_bytes = body["images"][0].get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw ProtocolError(200, std::string("malformed image response: ") + e.what());
        }
        return result;
    }

private:
    BackendConfig config_;
};

}  // namespace atelier
