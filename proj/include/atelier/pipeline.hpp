#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "atelier/common.hpp"
#include "atelier/concluder.hpp"
#include "atelier/corpus.hpp"
#include "atelier/creative.hpp"
#include "atelier/debate.hpp"
#include "atelier/evaluation.hpp"
#include "atelier/gateway.hpp"
#include "atelier/prompts.hpp"
#include "atelier/reliable.hpp"
#include "atelier/visual.hpp"

namespace atelier {

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

enum class RunMode { mock, live, emit_only_images };

inline std::string mode_name(RunMode mode) {
    switch (mode) {
        case RunMode::live: return "live";
        case RunMode::emit_only_images: return "emit_only_images";
        default: return "mock";
    }
}

inline RunMode parse_mode(const std::string& name) {
    if (name == "mock") return RunMode::mock;
    if (name == "live") return RunMode::live;
    if (name == "emit_only_images") return RunMode::emit_only_images;
    throw Error("unknown mode: " + name);
}

struct StageParams {
    int association_rounds = 4;
    int imagination_count = 6;
    std::size_t keyword_subset_size = 8;
    std::size_t retrieval_k = 6;
    int debate_rounds = 6;
    int section_count = 6;
    double alpha = 0.5;
    int retry_limit = kDefaultRetryLimit;
    std::size_t digest_char_budget = 4000;
};

struct AblationFlags {
    bool disable_agent_i = false;
    bool disable_agent_r = false;
    bool disable_agent_c = false;
};

struct RunConfig {
    std::uint64_t seed = 42;
    std::string corpus_path;
    std::string fixtures_dir;   // mock-mode chat fixtures
    std::string templates_dir;  // optional prompt template overrides
    RunMode mode = RunMode::mock;
    BackendConfig chat_backend;
    BackendConfig embed_backend;
    BackendConfig image_backend;
    StageParams params;
    AblationFlags ablation;
    VisualConfig visual;

    void validate() const {
        if (corpus_path.empty()) throw PreconditionError("corpus path required");
        if (mode == RunMode::mock && fixtures_dir.empty())
            throw PreconditionError("mock mode requires a fixtures directory");
        if (ablation.disable_agent_i && ablation.disable_agent_r)
            throw PreconditionError("at least one design source required: "
                                    "cannot disable both agent_i and agent_r");
        if (params.debate_rounds < 1 || params.debate_rounds > 10)
            throw PreconditionError("debate rounds must be in 1..10");
        if (params.section_count < 3 || params.section_count > 12)
            throw PreconditionError("section count must be in 3..12");
        if (params.alpha < 0.0 || params.alpha > 1.0)
            throw PreconditionError("alpha must be in [0,1]");
        if (params.association_rounds < 1 || params.imagination_count < 1)
            throw PreconditionError("association rounds and imagination count must be >= 1");
    }
};

inline nlohmann::json config_to_json(const RunConfig& config) {
    auto backend = [](const BackendConfig& b) {
        return nlohmann::json{{"endpoint_url", b.endpoint_url},
                              {"model_name", b.model_name},
                              {"timeout_ms", b.timeout.count()},
                              {"max_retries", b.max_retries}};
    };
    return nlohmann::json{
        {"seed", config.seed},
        {"corpus", config.corpus_path},
        {"fixtures_dir", config.fixtures_dir},
        {"templates_dir", config.templates_dir},
        {"mode", mode_name(config.mode)},
        {"backends",
         {{"chat", backend(config.chat_backend)},
          {"embed", backend(config.embed_backend)},
          {"image", backend(config.image_backend)}}},
        {"params",
         {{"association_rounds", config.params.association_rounds},
          {"imagination_count", config.params.imagination_count},
          {"keyword_subset_size", config.params.keyword_subset_size},
          {"retrieval_k", config.params.retrieval_k},
          {"debate_rounds", config.params.debate_rounds},
          {"section_count", config.params.section_count},
          {"alpha", config.params.alpha},
          {"retry_limit", config.params.retry_limit},
          {"digest_char_budget", config.params.digest_char_budget}}},
        {"ablation",
         {{"disable_agent_i", config.ablation.disable_agent_i},
          {"disable_agent_r", config.ablation.disable_agent_r},
          {"disable_agent_c", config.ablation.disable_agent_c}}},
        {"visual",
         {{"checkpoint", config.visual.checkpoint},
          {"base_model", config.visual.base_model},
          {"enable_segmentation_unit", config.visual.enable_segmentation_unit},
          {"emit_only", config.visual.emit_only},
          {"steps", config.visual.steps},
          {"cfg_scale", config.visual.cfg_scale},
          {"width", config.visual.width},
          {"height", config.visual.height}}},
    };
}

inline RunConfig config_from_json(const nlohmann::json& obj) {
    RunConfig config;
    config.seed = obj.value("seed", std::uint64_t{42});
    config.corpus_path = obj.value("corpus", "");
    config.fixtures_dir = obj.value("fixtures_dir", "");
    config.templates_dir = obj.value("templates_dir", "");
    config.mode = parse_mode(obj.value("mode", "mock"));
    auto backend = [](const nlohmann::json& b) {
        BackendConfig out;
        out.endpoint_url = b.value("endpoint_url", "");
        out.model_name = b.value("model_name", "");
        out.timeout = std::chrono::milliseconds(b.value("timeout_ms", 30000));
        out.max_retries = b.value("max_retries", 2);
        return out;
    };
    if (obj.contains("backends")) {
        const auto& bs = obj["backends"];
        if (bs.contains("chat")) config.chat_backend = backend(bs["chat"]);
        if (bs.contains("embed")) config.embed_backend = backend(bs["embed"]);
        if (bs.contains("image")) config.image_backend = backend(bs["image"]);
    }
    if (obj.contains("params")) {
        const auto& p = obj["params"];
        config.params.association_rounds = p.value("association_rounds", 4);
        config.params.imagination_count = p.value("imagination_count", 6);
        config.params.keyword_subset_size = p.value("keyword_subset_size", std::size_t{8});
        config.params.retrieval_k = p.value("retrieval_k", std::size_t{6});
        config.params.debate_rounds = p.value("debate_rounds", 6);
        config.params.section_count = p.value("section_count", 6);
        config.params.alpha = p.value("alpha", 0.5);
        config.params.retry_limit = p.value("retry_limit", kDefaultRetryLimit);
        config.params.digest_char_budget = p.value("digest_char_budget", std::size_t{4000});
    }
    if (obj.contains("ablation")) {
        const auto& a = obj["ablation"];
        config.ablation.disable_agent_i = a.value("disable_agent_i", false);
        config.ablation.disable_agent_r = a.value("disable_agent_r", false);
        config.ablation.disable_agent_c = a.value("disable_agent_c", false);
    }
    if (obj.contains("visual")) {
        const auto& v = obj["visual"];
        config.visual.checkpoint = v.value("checkpoint", config.visual.checkpoint);
        config.visual.base_model = v.value("base_model", config.visual.base_model);
        config.visual.enable_segmentation_unit = v.value("enable_segmentation_unit", false);
        config.visual.emit_only = v.value("emit_only", true);
        config.visual.steps = v.value("steps", 28);
        config.visual.cfg_scale = v.value("cfg_scale", 7.0);
        config.visual.width = v.value("width", 768);
        config.visual.height = v.value("height", 512);
    }
    return config;
}

// ---------------------------------------------------------------------------
// Backends bundle
// ---------------------------------------------------------------------------

struct Backends {
    std::shared_ptr<ChatBackend> chat;
    std::shared_ptr<EmbedBackend> embed;
    std::shared_ptr<ImageBackend> image;
    std::shared_ptr<MockChatBackend> mock_chat;  // set in mock mode
};

inline Backends make_mock_backends(const RunConfig& config) {
    Backends backends;
    auto mock = std::make_shared<MockChatBackend>(config.fixtures_dir);
    backends.chat = mock;
    backends.mock_chat = mock;
    backends.embed = std::make_shared<MockEmbedBackend>();
    backends.image = std::make_shared<EmitOnlyImageBackend>();
    return backends;
}

// ---------------------------------------------------------------------------
// Run record: the persisted, hash-verified artifact DAG of one execution.
// ---------------------------------------------------------------------------

struct Artifact {
    std::string name;
    std::string stage;
    nlohmann::json data;
    std::map<std::string, std::string> upstream;  // artifact name -> hash
    std::string hash;
};

inline std::string serialize_artifact(const Artifact& artifact) {
    nlohmann::json obj{{"name", artifact.name},
                       {"stage", artifact.stage},
                       {"upstream", artifact.upstream},
                       {"data", artifact.data}};
    return obj.dump(2) + "\n";
}

struct RunRecord {
    std::string run_id;
    nlohmann::json config_snapshot;
    std::vector<Artifact> artifacts;
    std::map<std::string, double> timings_ms;  // excluded from determinism
    std::string transcript_markdown;
    std::string document_markdown;
    std::vector<std::string> image_payloads;  // serialized wire payloads

    const Artifact* find(const std::string& name) const {
        for (const auto& a : artifacts)
            if (a.name == name) return &a;
        return nullptr;
    }
};

// ---------------------------------------------------------------------------
// JSON views of stage artifacts
// ---------------------------------------------------------------------------

namespace detail {

inline nlohmann::json keywords_json(const KeywordList& list) {
    return nlohmann::json{{"items", list.items}};
}

inline nlohmann::json captions_json(const std::vector<SceneCaption>& captions) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : captions)
        arr.push_back({{"index", c.index},
                       {"sentence", c.sentence},
                       {"source_keywords", c.source_keywords.items}});
    return arr;
}

inline nlohmann::json strategies_json(const std::vector<CreativeStrategy>& strategies) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& s : strategies)
        arr.push_back({{"scene_name", s.scene_name}, {"strategy", s.strategy}});
    return arr;
}

inline nlohmann::json context_json(const ContextSet& ctx) {
    nlohmann::json hits = nlohmann::json::array();
    for (const auto& h : ctx.hits)
        hits.push_back({{"record_id", h.record_id}, {"score", h.score}, {"rank", h.rank}});
    nlohmann::json passages = nlohmann::json::array();
    for (const auto& [id, text] : ctx.passages)
        passages.push_back({{"record_id", id}, {"text", text}});
    return nlohmann::json{{"query", ctx.query}, {"hits", hits}, {"passages", passages}};
}

inline nlohmann::json chain_json(const LogicChain& chain) {
    return nlohmann::json{{"points", chain.points},
                          {"source_record_id", chain.source_record_id}};
}

inline nlohmann::json design_json(const ReliableDesign& design) {
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& [title, body] : design.steps)
        steps.push_back({{"title", title}, {"body", body}});
    return nlohmann::json{{"steps", steps}, {"source_chain", chain_json(design.source_chain)}};
}

inline nlohmann::json transcript_json(const DebateTranscript& transcript) {
    nlohmann::json turns = nlohmann::json::array();
    for (const auto& t : transcript.turns)
        turns.push_back({{"round", t.round}, {"role", t.role}, {"content", t.content}});
    return nlohmann::json{{"query", transcript.query},
                          {"rounds", transcript.rounds},
                          {"creative_digest", transcript.creative_digest},
                          {"reliable_digest", transcript.reliable_digest},
                          {"turns", turns}};
}

inline nlohmann::json framework_json(const Framework& fw) {
    nlohmann::json heads = nlohmann::json::array();
    for (const auto& [n, h] : fw.subheadings) heads.push_back({{"number", n}, {"heading", h}});
    return nlohmann::json{{"title", fw.title}, {"subheadings", heads}};
}

inline nlohmann::json document_json(const DesignDocument& doc) {
    nlohmann::json sections = nlohmann::json::array();
    for (const auto& s : doc.sections)
        sections.push_back(
            {{"number", s.number}, {"subheading", s.subheading}, {"specifics", s.specifics}});
    return nlohmann::json{{"title", doc.title},
                          {"sections", sections},
                          {"source_transcript_id", doc.source_transcript_id},
                          {"hash", doc.hash}};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Digests handed to the debate: each side sees the other's Phase-1 output in
// condensed form, truncated under a character budget.
// ---------------------------------------------------------------------------

inline std::string creative_digest(const std::vector<CreativeStrategy>& strategies,
                                   std::size_t budget) {
    std::string out;
    for (const auto& s : strategies) {
        out += "'" + s.scene_name + "': " + s.strategy + "\n";
        if (out.size() > budget) break;
    }
    if (out.size() > budget) out.resize(budget);
    return out;
}

inline std::string reliable_digest(const ReliableDesign& design, std::size_t budget) {
    std::string out;
    for (std::size_t i = 0; i < design.steps.size(); ++i) {
        out += "**Step " + std::to_string(i + 1) + ": " + design.steps[i].first + "**\n" +
               design.steps[i].second + "\n";
        if (out.size() > budget) break;
    }
    if (out.size() > budget) out.resize(budget);
    return out;
}

// ---------------------------------------------------------------------------
// The end-to-end run
// ---------------------------------------------------------------------------

inline RunRecord run_pipeline(const std::string& query, const RunConfig& config,
                              const Backends& backends,
                              const PromptLibrary* prompt_overrides = nullptr) {
    config.validate();
    if (trim(query).empty()) throw PreconditionError("empty query");

    PromptLibrary default_prompts;
    if (!config.templates_dir.empty()) default_prompts.load_dir(config.templates_dir);
    const PromptLibrary& prompts = prompt_overrides ? *prompt_overrides : default_prompts;

    RunRecord record;
    record.run_id = "run-" + content_hash(query + '\x1f' + std::to_string(config.seed));
    record.config_snapshot = config_to_json(config);

    auto add_artifact = [&record](const std::string& name, const std::string& stage,
                                  nlohmann::json data,
                                  std::map<std::string, std::string> upstream = {}) -> Artifact& {
        Artifact artifact{name, stage, std::move(data), std::move(upstream), ""};
        artifact.hash = content_hash(serialize_artifact(artifact));
        record.artifacts.push_back(std::move(artifact));
        return record.artifacts.back();
    };
    auto timed = [&record](const std::string& stage, auto&& fn) {
        const auto start = std::chrono::steady_clock::now();
        fn();
        const auto end = std::chrono::steady_clock::now();
        record.timings_ms[stage] =
            std::chrono::duration<double, std::milli>(end - start).count();
    };
    auto hash_of = [&record](const std::string& name) -> std::string {
        const Artifact* a = record.find(name);
        return a ? a->hash : "";
    };

    // Corpus + indexes. The joint index backs visual reference matching and
    // is built regardless of ablation flags.
    std::vector<DesignRecord> records;
    VectorIndex text_index, joint_index;
    timed("corpus", [&] {
        auto [recs, report] = ingest(config.corpus_path);
        records = std::move(recs);
        joint_index = build_index(records, *backends.embed, space::joint, TextSelector::caption);
        if (!config.ablation.disable_agent_r)
            text_index =
                build_index(records, *backends.embed, space::text, TextSelector::description);
    });

    const int retries = config.params.retry_limit;

    // Phase 1a: creative chain (Agent_I).
    std::vector<CreativeStrategy> strategies;
    if (!config.ablation.disable_agent_i) {
        timed("agent_i", [&] {
            KeywordList keywords = extract_keywords(query, *backends.chat, prompts, retries);
            add_artifact("keywords", "keyword_extract", detail::keywords_json(keywords));

            std::vector<KeywordList> associations;
            for (int round = 0; round < config.params.association_rounds; ++round)
                associations.push_back(
                    associate(keywords, associations, *backends.chat, prompts, retries));
            nlohmann::json assoc = nlohmann::json::array();
            for (const auto& list : associations) assoc.push_back(detail::keywords_json(list));
            add_artifact("associations", "associate", assoc, {{"keywords", hash_of("keywords")}});

            std::vector<KeywordList> pool = associations;
            pool.insert(pool.begin(), keywords);
            const auto captions = imagine(pool, config.params.imagination_count,
                                          stage_seed(config.seed, "imagine"), *backends.chat,
                                          prompts, config.params.keyword_subset_size, retries);
            add_artifact("captions", "imagine", detail::captions_json(captions),
                         {{"keywords", hash_of("keywords")},
                          {"associations", hash_of("associations")}});

            strategies = draft_strategies(captions, *backends.chat, prompts, retries);
            add_artifact("strategies", "strategy", detail::strategies_json(strategies),
                         {{"captions", hash_of("captions")}});
        });
    }

    // Phase 1b: grounded chain (Agent_R).
    std::optional<ReliableDesign> reliable;
    if (!config.ablation.disable_agent_r) {
        timed("agent_r", [&] {
            const ContextSet ctx = retrieve_context(query, text_index, *backends.embed,
                                                    config.params.retrieval_k, &records);
            add_artifact("context_set", "retrieve", detail::context_json(ctx));

            std::vector<LogicChain> pool;
            for (const auto& [record_id, passage] : ctx.passages)
                pool.push_back(
                    extract_logic(query, record_id, passage, *backends.chat, prompts, retries));
            std::size_t sampled_index = 0;
            const LogicChain& chosen =
                sample_logic(pool, stage_seed(config.seed, "logic_sample"), &sampled_index);
            nlohmann::json pool_json = nlohmann::json::array();
            for (const auto& chain : pool) pool_json.push_back(detail::chain_json(chain));
            add_artifact("logic_pool", "logic_extract",
                         nlohmann::json{{"chains", pool_json}, {"sampled_index", sampled_index}},
                         {{"context_set", hash_of("context_set")}});

            reliable = write_reliable_design(query, chosen, *backends.chat, prompts, retries);
            add_artifact("reliable_design", "reliable_design", detail::design_json(*reliable),
                         {{"logic_pool", hash_of("logic_pool")}});
        });
    }

    // Phase 2a: debate. Each side is seeded with whatever Phase-1 material
    // exists; with one agent ablated both sides argue over the survivor's
    // material.
    DebateTranscript transcript;
    timed("debate", [&] {
        const std::string creative_material =
            strategies.empty() ? reliable_digest(*reliable, config.params.digest_char_budget)
                               : creative_digest(strategies, config.params.digest_char_budget);
        const std::string reliable_material =
            reliable ? reliable_digest(*reliable, config.params.digest_char_budget)
                     : creative_digest(strategies, config.params.digest_char_budget);
        DebateState state = open_debate(query, creative_material, reliable_material, prompts);
        transcript = run_debate(std::move(state), config.params.debate_rounds, *backends.chat,
                                stage_seed(config.seed, "debate"));
        std::map<std::string, std::string> upstream;
        if (!strategies.empty()) upstream["strategies"] = hash_of("strategies");
        if (reliable) upstream["reliable_design"] = hash_of("reliable_design");
        add_artifact("transcript", "debate", detail::transcript_json(transcript), upstream);
        record.transcript_markdown = render_transcript_markdown(transcript);
    });
    const std::string transcript_id = hash_of("transcript");

    // Phase 2b: conclusion (Agent_C).
    std::optional<DesignDocument> document;
    if (!config.ablation.disable_agent_c) {
        timed("agent_c", [&] {
            ConcluderConfig cc;
            cc.section_count = config.params.section_count;
            cc.retry_limit = retries;
            ConcluderSession session(transcript, prompts, cc);
            const Framework fw =
                session.request_framework(*backends.chat, config.params.section_count);
            add_artifact("framework", "framework", detail::framework_json(fw),
                         {{"transcript", transcript_id}});

            std::vector<Section> sections;
            for (int i = 1; i <= static_cast<int>(fw.subheadings.size()); ++i)
                sections.push_back(session.expand_section(fw, i, *backends.chat));
            document = assemble_document(fw.title, std::move(sections), transcript_id);
            add_artifact("document", "document", detail::document_json(*document),
                         {{"framework", hash_of("framework")},
                          {"transcript", transcript_id}});
            record.document_markdown = render_document_markdown(*document);
        });
    }

    // Phase 3: visual requests (Agent_V). With Agent_C ablated the prompt
    // source is the final debate turn.
    timed("agent_v", [&] {
        std::vector<Section> sources;
        if (document) {
            sources = document->sections;
        } else {
            Section final_turn;
            final_turn.number = 1;
            final_turn.subheading = "Final Debate Position";
            final_turn.specifics = transcript.turns.back().content;
            sources.push_back(std::move(final_turn));
        }
        VisualConfig visual = config.visual;
        if (config.mode != RunMode::live) visual.emit_only = true;

        nlohmann::json requests = nlohmann::json::array();
        nlohmann::json references = nlohmann::json::array();
        std::vector<ImagePrompt> image_prompts;
        std::vector<ImageResult> results;
        SplitMix64 seed_rng(stage_seed(config.seed, "image_requests"));
        for (const auto& section : sources) {
            const ImagePrompt prompt = build_prompt(section, *backends.chat, prompts, visual);
            const ReferenceMatch ref = match_reference(section.number, prompt.design_keywords,
                                                       joint_index, *backends.embed, records);
            const ImageRequest req = build_generation_request(
                prompt, ref, visual, static_cast<std::int64_t>(seed_rng.next() >> 1));
            const ImageResult result = backends.image->generate(req);
            requests.push_back(image_request_to_json(req));
            references.push_back({{"section_number", ref.section_number},
                                  {"record_id", ref.record_id},
                                  {"match_score", ref.match_score},
                                  {"seg_image_ref", ref.seg_image_ref}});
            record.image_payloads.push_back(result.payload_json);
            image_prompts.push_back(prompt);
            results.push_back(result);
        }
        std::map<std::string, std::string> upstream{
            {document ? "document" : "transcript",
             document ? hash_of("document") : transcript_id}};
        add_artifact("image_requests", "image_requests",
                     nlohmann::json{{"requests", requests}, {"references", references}},
                     upstream);

        const QualityReport report =
            review_outputs(results, image_prompts, *backends.embed, visual.review_pass_threshold);
        nlohmann::json entries = nlohmann::json::array();
        for (const auto& e : report.entries)
            entries.push_back({{"index", e.index},
                               {"similarity", e.similarity},
                               {"score", e.score},
                               {"pass", e.pass}});
        add_artifact("quality_report", "quality_review",
                     nlohmann::json{{"threshold", report.threshold}, {"entries", entries}},
                     {{"image_requests", hash_of("image_requests")}});
    });

    return record;
}

// ---------------------------------------------------------------------------
// Persistence: manifest.json + stages/<name>.json + rendered markdown +
// images/requests/*.json. Round-trip lossless; every artifact hash-verified
// on load.
// ---------------------------------------------------------------------------

inline std::string persist_run(const RunRecord& record, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(dir) / "stages");
    fs::create_directories(fs::path(dir) / "images" / "requests");

    nlohmann::json manifest_artifacts = nlohmann::json::array();
    for (const auto& artifact : record.artifacts) {
        const std::string rel = "stages/" + artifact.name + ".json";
        write_file((fs::path(dir) / rel).string(), serialize_artifact(artifact));
        manifest_artifacts.push_back({{"name", artifact.name},
                                      {"path", rel},
                                      {"hash", artifact.hash},
                                      {"stage", artifact.stage},
                                      {"upstream", artifact.upstream}});
    }
    if (!record.transcript_markdown.empty())
        write_file((fs::path(dir) / "transcript.md").string(), record.transcript_markdown);
    if (!record.document_markdown.empty())
        write_file((fs::path(dir) / "document.md").string(), record.document_markdown);
    for (std::size_t i = 0; i < record.image_payloads.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "req_%02zu.json", i + 1);
        write_file((fs::path(dir) / "images" / "requests" / name).string(),
                   record.image_payloads[i] + "\n");
    }

    nlohmann::json manifest{
        {"run_id", record.run_id},
        {"config", record.config_snapshot},
        {"artifacts", manifest_artifacts},
        {"image_payload_count", record.image_payloads.size()},
        {"timings_ms", record.timings_ms},
    };
    const std::string manifest_path = (fs::path(dir) / "manifest.json").string();
    write_file(manifest_path, manifest.dump(2) + "\n");
    return manifest_path;
}

inline RunRecord load_run(const std::string& dir) {
    namespace fs = std::filesystem;
    const auto manifest = nlohmann::json::parse(read_file((fs::path(dir) / "manifest.json").string()));
    RunRecord record;
    record.run_id = manifest.at("run_id").get<std::string>();
    record.config_snapshot = manifest.at("config");
    for (const auto& entry : manifest.at("artifacts")) {
        const std::string name = entry.at("name").get<std::string>();
        const std::string path = (fs::path(dir) / entry.at("path").get<std::string>()).string();
        std::string bytes;
        try {
            bytes = read_file(path);
        } catch (const Error&) {
            throw IntegrityError(name, "artifact file missing");
        }
        if (content_hash(bytes) != entry.at("hash").get<std::string>())
            throw IntegrityError(name, "content hash mismatch");
        const auto obj = nlohmann::json::parse(bytes);
        Artifact artifact;
        artifact.name = name;
        artifact.stage = obj.at("stage").get<std::string>();
        artifact.data = obj.at("data");
        for (const auto& [k, v] : obj.at("upstream").items())
            artifact.upstream[k] = v.get<std::string>();
        artifact.hash = entry.at("hash").get<std::string>();
        record.artifacts.push_back(std::move(artifact));
    }
    if (manifest.contains("timings_ms"))
        for (const auto& [k, v] : manifest["timings_ms"].items())
            record.timings_ms[k] = v.get<double>();
    if (fs::exists(fs::path(dir) / "transcript.md"))
        record.transcript_markdown = read_file((fs::path(dir) / "transcript.md").string());
    if (fs::exists(fs::path(dir) / "document.md"))
        record.document_markdown = read_file((fs::path(dir) / "document.md").string());
    const std::size_t payloads = manifest.value("image_payload_count", std::size_t{0});
    for (std::size_t i = 0; i < payloads; ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "req_%02zu.json", i + 1);
        std::string content = read_file((fs::path(dir) / "images" / "requests" / name).string());
        if (!content.empty() && content.back() == '\n') content.pop_back();
        record.image_payloads.push_back(std::move(content));
    }
    return record;
}

}  // namespace atelier
