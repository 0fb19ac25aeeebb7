#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <optional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "atelier/common.hpp"
#include "atelier/corpus.hpp"
#include "atelier/creative.hpp"
#include "atelier/gateway.hpp"
#include "atelier/prompts.hpp"

namespace atelier {

// ---------------------------------------------------------------------------
// Score types
// ---------------------------------------------------------------------------

struct BalanceSpec {
    double alpha = 0.5;
    std::function<double(double)> f_transform = [](double v) { return v; };
    std::function<double(double)> g_transform = [](double v) { return v; };
};

struct RubricRating {
    std::string rater_id;
    double originality = 0.0;
    double relevance = 0.0;
    double complexity = 0.0;
    double flexibility = 0.0;
    double participation_style = 0.0;
    double task_distribution = 0.0;

    std::array<double, 6> dimensions() const {
        return {originality, relevance,           complexity,
                flexibility, participation_style, task_distribution};
    }

    void validate() const {
        for (double d : dimensions())
            if (d < 0.0 || d > 10.0) throw PreconditionError("rubric dimension out of [0,10]");
    }
};

struct ScoreReport {
    std::string method_name;
    double creativity_i = 0.0;
    double creativity_t = 0.0;
    double creativity = 0.0;
    double design = 0.0;
    double balance = 0.0;
    bool has_balance = false;
};

// ---------------------------------------------------------------------------
// Scoring operations
// ---------------------------------------------------------------------------

// Mean over all six dimensions of all raters.
inline double design_score(const std::vector<RubricRating>& ratings) {
    if (ratings.empty()) throw PreconditionError("no ratings");
    double sum = 0.0;
    for (const auto& rating : ratings) {
        rating.validate();
        for (double d : rating.dimensions()) sum += d;
    }
    return sum / (6.0 * static_cast<double>(ratings.size()));
}

// Image-side creativity: cosine in the joint space mapped to [0,10].
inline double creativity_image(const EmbeddingVector& prompt_vec,
                               const EmbeddingVector& image_vec) {
    if (prompt_vec.space_id != image_vec.space_id)
        throw PreconditionError("vectors from different spaces");
    const double c = cosine(prompt_vec, image_vec);
    return std::clamp(5.0 * (1.0 + c), 0.0, 10.0);
}

inline double parse_judge_score(const std::string& raw) {
    const std::string marker = "SCORE:";
    const std::size_t pos = raw.rfind(marker);
    if (pos == std::string::npos) throw ParseError("creativity_text", "no SCORE: line found");
    const std::string tail = trim(raw.substr(pos + marker.size()));
    std::size_t end = 0;
    double value = 0.0;
    try {
        value = std::stod(tail, &end);
    } catch (const std::exception&) {
        throw ParseError("creativity_text", "unparseable score: '" + tail + "'");
    }
    if (end == 0) throw ParseError("creativity_text", "no number after SCORE:");
    return std::clamp(value, 0.0, 10.0);
}

// Text-side creativity via a judge backend; the verdict comes from a
// mandated "SCORE: <number>" line.
inline double creativity_text(const std::vector<std::string>& texts, const ChatBackend& judge,
                              const PromptLibrary& prompts,
                              int retry_limit = kDefaultRetryLimit) {
    if (texts.empty()) throw PreconditionError("no texts to judge");
    ChatRequest req;
    req.system_prompt = prompts.get("judge_creativity");
    req.history = {{"user", join(texts, "\n---\n")}};
    req.temperature = 0.2;
    req.template_id = "judge_creativity";
    req.stage = "creativity_text";
    return ask_with_retry<double>(
        judge, req, [](const std::string& raw) { return parse_judge_score(raw); },
        "creativity_text", retry_limit);
}

inline double creativity_score(double creativity_i, double creativity_t) {
    if (creativity_i < 0.0 || creativity_i > 10.0 || creativity_t < 0.0 || creativity_t > 10.0)
        throw PreconditionError("creativity component out of [0,10]");
    return (creativity_i + creativity_t) / 2.0;
}

// V(D, G) = alpha * f(design) + (1 - alpha) * g(creativity).
inline double balance(double design, double creativity, const BalanceSpec& spec = {}) {
    if (spec.alpha < 0.0 || spec.alpha > 1.0) throw PreconditionError("alpha out of [0,1]");
    if (design < 0.0 || design > 10.0 || creativity < 0.0 || creativity > 10.0)
        throw PreconditionError("score out of [0,10]");
    return spec.alpha * spec.f_transform(design) + (1.0 - spec.alpha) * spec.g_transform(creativity);
}

// ---------------------------------------------------------------------------
// Rating files: <method>.ratings.jsonl (one RubricRating per line) plus an
// optional <method>.creativity.json sidecar {"creativity_i": x,
// "creativity_t": y}.
// ---------------------------------------------------------------------------

inline std::vector<RubricRating> load_ratings_file(const std::string& path) {
    std::vector<RubricRating> ratings;
    std::size_t line_no = 0;
    for (const auto& line : split_lines(read_file(path))) {
        ++line_no;
        if (trim(line).empty()) continue;
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception&) {
            throw Error(path + ":" + std::to_string(line_no) + ": invalid JSON");
        }
        RubricRating r;
        r.rater_id = obj.value("rater_id", "");
        r.originality = obj.at("originality").get<double>();
        r.relevance = obj.at("relevance").get<double>();
        r.complexity = obj.at("complexity").get<double>();
        r.flexibility = obj.at("flexibility").get<double>();
        r.participation_style = obj.at("participation_style").get<double>();
        r.task_distribution = obj.at("task_distribution").get<double>();
        r.validate();
        ratings.push_back(r);
    }
    if (ratings.empty()) throw Error("no ratings in " + path);
    return ratings;
}

inline std::vector<ScoreReport> load_rating_dir(const std::string& dir,
                                                std::optional<double> alpha = std::nullopt) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw Error("ratings directory not found: " + dir);
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const auto name = entry.path().filename().string();
        if (name.size() > 14 && name.substr(name.size() - 14) == ".ratings.jsonl")
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw Error("no *.ratings.jsonl files in " + dir);

    std::vector<ScoreReport> reports;
    for (const auto& file : files) {
        ScoreReport report;
        const auto name = file.filename().string();
        report.method_name = name.substr(0, name.size() - 14);
        report.design = design_score(load_ratings_file(file.string()));
        const auto sidecar = file.parent_path() / (report.method_name + ".creativity.json");
        if (fs::exists(sidecar)) {
            const auto obj = nlohmann::json::parse(read_file(sidecar.string()));
            report.creativity_i = obj.at("creativity_i").get<double>();
            report.creativity_t = obj.at("creativity_t").get<double>();
            report.creativity = creativity_score(report.creativity_i, report.creativity_t);
        }
        if (alpha) {
            BalanceSpec spec;
            spec.alpha = *alpha;
            report.balance = balance(report.design, report.creativity, spec);
            report.has_balance = true;
        }
        reports.push_back(std::move(report));
    }
    return reports;
}

// ---------------------------------------------------------------------------
// Comparison rendering: aligned text table plus a structured document, rows
// sorted by method name.
// ---------------------------------------------------------------------------

struct ComparisonTable {
    std::string text;
    nlohmann::json structured;
};

inline ComparisonTable render_comparison(std::vector<ScoreReport> reports,
                                         bool with_balance = false) {
    if (reports.empty()) throw PreconditionError("no reports");
    std::sort(reports.begin(), reports.end(), [](const ScoreReport& a, const ScoreReport& b) {
        return a.method_name < b.method_name;
    });
    for (std::size_t i = 1; i < reports.size(); ++i)
        if (reports[i].method_name == reports[i - 1].method_name)
            throw PreconditionError("duplicate method name: " + reports[i].method_name);

    std::size_t name_width = std::string("Method").size();
    for (const auto& r : reports) name_width = std::max(name_width, r.method_name.size());

    auto fmt = [](double v) {
        std::ostringstream ss;
        ss << std::setprecision(4) << v;
        return ss.str();
    };

    std::ostringstream out;
    out << std::left << std::setw(static_cast<int>(name_width + 2)) << "Method"
        << std::setw(18) << "Creativity Score" << std::setw(14) << "Design Score";
    if (with_balance) out << std::setw(10) << "Balance";
    out << "\n";
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : reports) {
        out << std::left << std::setw(static_cast<int>(name_width + 2)) << r.method_name
            << std::setw(18) << fmt(r.creativity) << std::setw(14) << fmt(r.design);
        if (with_balance) out << std::setw(10) << fmt(r.balance);
        out << "\n";
        nlohmann::json row{{"method", r.method_name},
                           {"creativity", r.creativity},
                           {"creativity_i", r.creativity_i},
                           {"creativity_t", r.creativity_t},
                           {"design", r.design}};
        if (r.has_balance) row["balance"] = r.balance;
        rows.push_back(row);
    }
    return {out.str(), nlohmann::json{{"rows", rows}}};
}

}  // namespace atelier
