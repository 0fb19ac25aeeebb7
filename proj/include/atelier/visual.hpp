#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "atelier/common.hpp"
#include "atelier/concluder.hpp"
#include "atelier/corpus.hpp"
#include "atelier/creative.hpp"
#include "atelier/gateway.hpp"
#include "atelier/image_request.hpp"
#include "atelier/prompts.hpp"

namespace atelier {

// ---------------------------------------------------------------------------
// Per-section reference matching and generation request construction.
// ---------------------------------------------------------------------------

struct ReferenceMatch {
    int section_number = 0;
    std::string record_id;
    double match_score = 0.0;
    std::string seg_image_ref;
};

struct VisualConfig {
    std::string base_model = "sd-v1.5";
    std::string checkpoint = "Landscape SuperMix";
    std::string linear_model = "control_v11p_sd15_lineart";
    std::string segmentation_model = "control_v11p_sd15_seg";
    bool enable_segmentation_unit = false;
    bool emit_only = true;
    double control_weight = 1.0;
    int steps = 28;
    double cfg_scale = 7.0;
    int width = 768;
    int height = 512;
    std::string negative_prompt =
        "lowres, blurry, distorted geometry, watermark, text, oversaturated";
    double review_pass_threshold = 5.0;
    int retry_limit = kDefaultRetryLimit;
};

// Best joint-space hit for the section's design-keyword string; the matched
// record must carry a seg image, otherwise the next-ranked hit is used.
inline ReferenceMatch match_reference(int section_number, const KeywordList& design_keywords,
                                      const VectorIndex& joint_index, const EmbedBackend& embed,
                                      const std::vector<DesignRecord>& records) {
    if (joint_index.entries.empty()) throw PreconditionError("empty index");
    design_keywords.validate();
    const std::string keyword_text = join(design_keywords.items, ", ");
    const auto query_vec = embed.embed_text({keyword_text}, joint_index.space_id).front();
    const auto hits = search(joint_index, query_vec, joint_index.entries.size());
    for (const auto& hit : hits) {
        for (const auto& rec : records) {
            if (rec.id != hit.record_id) continue;
            if (!rec.has_seg_image) break;
            return {section_number, rec.id, hit.score, rec.seg_image};
        }
    }
    throw Error("no conditionable reference: every matched record lacks a seg image");
}

namespace detail {

// The scene descriptor is the section's first sentence with leading
// instruction verbs ("Design a...", "The design will include...") removed so
// the prompt reads as image content rather than an instruction.
inline std::string scene_descriptor(const std::string& specifics) {
    std::string first = specifics;
    const std::size_t dot = first.find(". ");
    if (dot != std::string::npos) first = first.substr(0, dot + 1);
    first = trim(first);
    static const char* prefixes[] = {
        "the design will include", "the design will", "this element of the design strategy",
        "the expansion will",      "design a",        "design",
        "develop",                 "create",          "incorporate",
        "ensure",                  "plan for",        "these spaces within",
    };
    const std::string low = to_lower(first);
    for (const char* prefix : prefixes) {
        const std::size_t len = std::string(prefix).size();
        if (low.rfind(prefix, 0) == 0 && first.size() > len) {
            first = trim(first.substr(len));
            break;
        }
    }
    if (!first.empty() && first.front() >= 'a' && first.front() <= 'z')
        first[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(first[0])));
    return first;
}

}  // namespace detail

inline ImagePrompt build_prompt(const Section& section, const ChatBackend& chat,
                                const PromptLibrary& prompts, const VisualConfig& config = {}) {
    if (trim(section.specifics).empty()) throw PreconditionError("empty section specifics");
    ChatRequest req;
    req.system_prompt = prompts.get("section_keywords");
    req.history = {{"user", section.subheading + ": " + section.specifics}};
    req.temperature = 0.2;
    req.template_id = "section_keywords";
    req.stage = "image_requests";
    KeywordList keywords = ask_with_retry<KeywordList>(
        chat, req, [](const std::string& raw) { return parse_keyword_list(raw); },
        "image_requests", config.retry_limit);

    ImagePrompt prompt;
    prompt.design_keywords = keywords;
    prompt.positive = join(keywords.items, ", ");
    const std::string descriptor = detail::scene_descriptor(section.specifics);
    if (!descriptor.empty()) prompt.positive += ", " + descriptor;
    prompt.negative = config.negative_prompt;
    return prompt;
}

inline ImageRequest build_generation_request(const ImagePrompt& prompt,
                                             const ReferenceMatch& reference,
                                             const VisualConfig& config, std::int64_t seed) {
    ImageRequest req;
    req.prompt = prompt;
    req.base_model = config.base_model;
    req.checkpoint = config.checkpoint;
    req.steps = config.steps;
    req.cfg_scale = config.cfg_scale;
    req.seed = seed;
    req.width = config.width;
    req.height = config.height;

    const bool resolved = std::filesystem::exists(reference.seg_image_ref);
    if (!resolved && !config.emit_only)
        throw Error("missing conditioning image: " + reference.seg_image_ref);

    ControlUnit linear;
    linear.kind = ControlUnit::Kind::linear;
    linear.conditioning_image = reference.seg_image_ref;
    linear.weight = config.control_weight;
    linear.model_name = config.linear_model;
    linear.resolved = resolved;
    req.control_units.push_back(linear);

    if (config.enable_segmentation_unit) {
        ControlUnit seg = linear;
        seg.kind = ControlUnit::Kind::segmentation;
        seg.model_name = config.segmentation_model;
        req.control_units.push_back(seg);
    }
    req.validate();
    return req;
}

// ---------------------------------------------------------------------------
// Quality review: per-image prompt/image similarity mapped onto [0,10] via
// score = 5 * (1 + cosine).
// ---------------------------------------------------------------------------

struct QualityEntry {
    int index = 0;
    double similarity = 0.0;
    double score = 0.0;
    bool pass = false;
};

struct QualityReport {
    std::vector<QualityEntry> entries;
    double threshold = 5.0;
};

inline double similarity_to_score(double cosine_value) {
    return std::clamp(5.0 * (1.0 + cosine_value), 0.0, 10.0);
}

inline QualityReport review_outputs(const std::vector<ImageResult>& results,
                                    const std::vector<ImagePrompt>& prompts,
                                    const EmbedBackend& embed, double threshold = 5.0) {
    if (results.size() != prompts.size())
        throw PreconditionError("results/prompts length mismatch");
    QualityReport report;
    report.threshold = threshold;
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto prompt_vec = embed.embed_text({prompts[i].positive}, space::joint).front();
        // Without a live joint-space image encoder the image side is the
        // caption proxy carried on the result.
        const std::string& caption =
            results[i].stub_caption.empty() ? prompts[i].positive : results[i].stub_caption;
        const auto image_vec = embed.embed_image(caption, /*caption_proxy=*/true);
        QualityEntry entry;
        entry.index = static_cast<int>(i + 1);
        entry.similarity = cosine(prompt_vec, image_vec);
        entry.score = similarity_to_score(entry.similarity);
        entry.pass = entry.score >= threshold;
        report.entries.push_back(entry);
    }
    return report;
}

}  // namespace atelier
