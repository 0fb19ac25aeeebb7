#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "atelier/common.hpp"
#include "atelier/keyword_list.hpp"

namespace atelier {

struct ImagePrompt {
    std::string positive;
    std::string negative;
    KeywordList design_keywords;
};

// One ControlNet conditioning attachment. "linear" constrains line layout,
// "segmentation" constrains region layout.
struct ControlUnit {
    enum class Kind { linear, segmentation };

    Kind kind = Kind::linear;
    std::string conditioning_image;  // file reference; may be unresolved in emit-only mode
    double weight = 1.0;
    std::string model_name;
    bool resolved = false;  // true when conditioning_image existed at build time

    static std::string kind_name(Kind k) {
        return k == Kind::linear ? "linear" : "segmentation";
    }
};

// Full generation payload handed to the image backend.
struct ImageRequest {
    ImagePrompt prompt;
    std::string base_model = "sd-v1.5";
    std::string checkpoint = "Landscape SuperMix";
    std::vector<ControlUnit> control_units;
    int steps = 28;
    double cfg_scale = 7.0;
    std::int64_t seed = 0;
    int width = 768;
    int height = 512;

    void validate(bool conditioning_required = true) const {
        if (prompt.positive.empty()) throw PreconditionError("empty positive prompt");
        if (steps <= 0) throw PreconditionError("steps must be positive");
        if (width <= 0 || height <= 0) throw PreconditionError("dimensions must be positive");
        if (width % 8 != 0 || height % 8 != 0)
            throw PreconditionError("dimension not multiple of 8");
        if (conditioning_required && control_units.empty())
            throw PreconditionError("at least one control unit required");
    }
};

struct ImageResult {
    std::string status;        // "ok" | "not_dispatched"
    std::string image_bytes;   // raw bytes when dispatched
    std::string payload_json;  // serialized wire payload
    std::string backend_id;
    std::string stub_caption;  // mock/emit-only caption proxy for quality review
};

namespace detail {
inline std::string base64_encode(std::string_view data) {
    static const char* table =
        "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((data.size() + 2) / 3 * 4);
    std::size_t i = 0;
    while (i + 2 < data.size()) {
        std::uint32_t n = (static_cast<unsigned char>(data[i]) << 16) |
                          (static_cast<unsigned char>(data[i + 1]) << 8) |
                          static_cast<unsigned char>(data[i + 2]);
        out += table[(n >> 18) & 63];
        out += table[(n >> 12) & 63];
        out += table[(n >> 6) & 63];
        out += table[n & 63];
        i += 3;
    }
    if (i + 1 == data.size()) {
        std::uint32_t n = static_cast<unsigned char>(data[i]) << 16;
        out += table[(n >> 18) & 63];
        out += table[(n >> 12) & 63];
        out += "==";
    } else if (i + 2 == data.size()) {
        std::uint32_t n = (static_cast<unsigned char>(data[i]) << 16) |
                          (static_cast<unsigned char>(data[i + 1]) << 8);
        out += table[(n >> 18) & 63];
        out += table[(n >> 12) & 63];
        out += table[(n >> 6) & 63];
        out += '=';
    }
    return out;
}
}  // namespace detail

// txt2img-style wire payload. Field set and ordering are part of the
// external contract; nlohmann::json sorts keys, so serialization is stable.
inline nlohmann::json build_txt2img_payload(const ImageRequest& req) {
    nlohmann::json units = nlohmann::json::array();
    for (const auto& unit : req.control_units) {
        std::string input_image;
        if (unit.resolved && std::filesystem::exists(unit.conditioning_image))
            input_image = detail::base64_encode(read_file(unit.conditioning_image));
        units.push_back({{"module", ControlUnit::kind_name(unit.kind)},
                         {"model", unit.model_name},
                         {"weight", unit.weight},
                         {"input_image", input_image}});
    }
    return nlohmann::json{
        {"prompt", req.prompt.positive},
        {"negative_prompt", req.prompt.negative},
        {"steps", req.steps},
        {"cfg_scale", req.cfg_scale},
        {"seed", req.seed},
        {"width", req.width},
        {"height", req.height},
        {"override_settings", {{"sd_model_checkpoint", req.checkpoint}}},
        {"alwayson_scripts", {{"controlnet", {{"args", units}}}}},
    };
}

inline nlohmann::json image_request_to_json(const ImageRequest& req) {
    nlohmann::json units = nlohmann::json::array();
    for (const auto& unit : req.control_units)
        units.push_back({{"kind", ControlUnit::kind_name(unit.kind)},
                         {"conditioning_image", unit.conditioning_image},
                         {"weight", unit.weight},
                         {"model_name", unit.model_name},
                         {"resolved", unit.resolved}});
    return nlohmann::json{
        {"prompt",
         {{"positive", req.prompt.positive},
          {"negative", req.prompt.negative},
          {"design_keywords", req.prompt.design_keywords.items}}},
        {"base_model", req.base_model},
        {"checkpoint", req.checkpoint},
        {"control_units", units},
        {"steps", req.steps},
        {"cfg_scale", req.cfg_scale},
        {"seed", req.seed},
        {"width", req.width},
        {"height", req.height},
    };
}

}  // namespace atelier
