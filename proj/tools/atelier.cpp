// Command-line front end: corpus ingestion, end-to-end design runs,
// rating-table evaluation, and run-directory inspection.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "atelier/evaluation.hpp"
#include "atelier/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitStageFailure = 1;
constexpr int kExitUsage = 2;

int cmd_ingest(const std::string& corpus_path, bool build_index) {
    auto [records, report] = atelier::ingest(corpus_path);
    std::cout << "accepted: " << report.accepted << "\n";
    std::cout << "rejected: " << report.rejected.size() << "\n";
    for (const auto& rej : report.rejected)
        std::cout << "  line " << rej.line << ": " << rej.reason << "\n";
    if (build_index) {
        atelier::MockEmbedBackend embed;
        const auto text_index =
            atelier::ensure_index(corpus_path, records, embed, atelier::space::text,
                                  atelier::TextSelector::description);
        const auto joint_index =
            atelier::ensure_index(corpus_path, records, embed, atelier::space::joint,
                                  atelier::TextSelector::caption);
        for (const auto& index : {text_index, joint_index})
            std::cout << "index " << index.space_id << ": " << index.entries.size()
                      << " entries, dim " << index.dimension << "\n";
    }
    return kExitOk;
}

int cmd_run(const std::string& query, atelier::RunConfig config, const std::string& out_dir) {
    const atelier::Backends backends = atelier::make_mock_backends(config);
    const atelier::RunRecord record = atelier::run_pipeline(query, config, backends);
    if (!out_dir.empty()) {
        atelier::persist_run(record, out_dir);
        std::cout << "run " << record.run_id << " written to " << out_dir << "\n";
    } else {
        std::cout << "run " << record.run_id << " complete\n";
    }
    for (const auto& artifact : record.artifacts)
        std::cout << "  " << artifact.name << "  " << artifact.hash << "\n";
    return kExitOk;
}

int cmd_evaluate(const std::string& ratings_dir, double alpha, bool with_balance) {
    const auto reports = atelier::load_rating_dir(
        ratings_dir, with_balance ? std::optional<double>(alpha) : std::nullopt);
    const auto table = atelier::render_comparison(reports, with_balance);
    std::cout << table.text;
    return kExitOk;
}

int cmd_inspect(const std::string& run_dir) {
    const atelier::RunRecord record = atelier::load_run(run_dir);
    std::cout << "run_id: " << record.run_id << "\n";
    std::cout << "artifacts: " << record.artifacts.size() << "\n";
    for (const auto& artifact : record.artifacts) {
        std::cout << "  " << artifact.name << " (stage " << artifact.stage << ", hash "
                  << artifact.hash << ")\n";
        for (const auto& [up, hash] : artifact.upstream)
            std::cout << "    <- " << up << " " << hash << "\n";
    }
    std::cout << "image payloads: " << record.image_payloads.size() << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-agent architectural design pipeline"};
    app.require_subcommand(1);

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Validate a design corpus");
    std::string ingest_corpus;
    bool build_index = false;
    ingest->add_option("corpus", ingest_corpus, "Path to a JSONL corpus")->required();
    ingest->add_flag("--build-index", build_index, "Also build and cache vector indexes");

    // run
    auto* run = app.add_subcommand("run", "Execute the design pipeline");
    std::string query, config_path, out_dir, mode_name;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int rounds = 0;
    std::vector<std::string> disables;
    std::string corpus_path, fixtures_dir;
    run->add_option("--query", query, "Design brief")->required();
    run->add_option("--config", config_path, "Run configuration JSON file");
    auto* seed_opt = run->add_option("--seed", seed, "Root seed");
    run->add_option("--rounds", rounds, "Debate rounds (1-10)");
    run->add_option("--mode", mode_name, "mock | live | emit_only_images");
    run->add_option("--corpus", corpus_path, "Corpus path override");
    run->add_option("--fixtures", fixtures_dir, "Mock chat fixtures directory");
    run->add_option("--disable", disables, "Ablate an agent: agent_i, agent_r, or agent_c");
    run->add_option("--out", out_dir, "Directory to persist the run record");

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "Score rating files and print a comparison");
    std::string ratings_dir;
    double alpha = 0.5;
    evaluate->add_option("--ratings", ratings_dir, "Directory of <method>.ratings.jsonl files")
        ->required();
    auto* alpha_opt = evaluate->add_option("--alpha", alpha, "Balance weight in [0,1]");

    // inspect
    auto* inspect = app.add_subcommand("inspect", "Verify and summarize a persisted run");
    std::string run_dir;
    inspect->add_option("run_dir", run_dir, "Run directory with manifest.json")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }
    seed_set = seed_opt->count() > 0;

    try {
        if (*ingest) return cmd_ingest(ingest_corpus, build_index);
        if (*run) {
            atelier::RunConfig config;
            if (!config_path.empty())
                config = atelier::config_from_json(
                    nlohmann::json::parse(atelier::read_file(config_path)));
            if (seed_set) config.seed = seed;
            if (rounds != 0) config.params.debate_rounds = rounds;
            if (!mode_name.empty()) {
                try {
                    config.mode = atelier::parse_mode(mode_name);
                } catch (const atelier::Error& e) {
                    std::cerr << "usage error: " << e.what() << "\n";
                    return kExitUsage;
                }
            }
            if (!corpus_path.empty()) config.corpus_path = corpus_path;
            if (!fixtures_dir.empty()) config.fixtures_dir = fixtures_dir;
            for (const auto& name : disables) {
                if (name == "agent_i") config.ablation.disable_agent_i = true;
                else if (name == "agent_r") config.ablation.disable_agent_r = true;
                else if (name == "agent_c") config.ablation.disable_agent_c = true;
                else {
                    std::cerr << "unknown agent: " << name << "\n";
                    return kExitUsage;
                }
            }
            if (config.ablation.disable_agent_i && config.ablation.disable_agent_r) {
                std::cerr << "usage error: cannot disable both agent_i and agent_r\n";
                return kExitUsage;
            }
            if (config.mode != atelier::RunMode::mock) {
                std::cerr << "usage error: only mock mode is runnable without live endpoints\n";
                return kExitUsage;
            }
            try {
                config.validate();
            } catch (const atelier::PreconditionError& e) {
                std::cerr << "usage error: " << e.what() << "\n";
                return kExitUsage;
            }
            return cmd_run(query, config, out_dir);
        }
        if (*evaluate) {
            if (alpha < 0.0 || alpha > 1.0) {
                std::cerr << "usage error: alpha must be in [0,1]\n";
                return kExitUsage;
            }
            return cmd_evaluate(ratings_dir, alpha, alpha_opt->count() > 0);
        }
        if (*inspect) return cmd_inspect(run_dir);
    } catch (const atelier::StageError& e) {
        std::cerr << "stage failure [" << e.stage() << "]: " << e.what() << "\n";
        return kExitStageFailure;
    } catch (const atelier::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitStageFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitStageFailure;
    }
    return kExitUsage;
}
