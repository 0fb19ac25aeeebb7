#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "atelier/common.hpp"
#include "atelier/gateway.hpp"

namespace atelier {

// ---------------------------------------------------------------------------
// One corpus entry: the retrieval unit. Seven fields, newline-delimited JSON
// on disk (lower_snake_case keys).
// ---------------------------------------------------------------------------

struct DesignRecord {
    std::string id;
    std::string image;
    std::string seg_image;  // empty only when has_seg_image == false
    bool has_seg_image = false;
    std::string caption;
    std::string query;
    std::string description;
    std::string design_txt;
};

struct IngestReject {
    std::size_t line;  // 1-based
    std::string reason;
};

struct IngestReport {
    std::size_t accepted = 0;
    std::vector<IngestReject> rejected;
};

namespace detail {

inline bool parse_record_line(const nlohmann::json& obj, DesignRecord& rec, std::string& reason) {
    static const char* required[] = {"id", "image", "caption", "query", "description", "design_txt"};
    for (const char* field : required) {
        if (!obj.contains(field) || !obj[field].is_string() ||
            obj[field].get<std::string>().empty()) {
            reason = std::string("missing field: ") + field;
            return false;
        }
    }
    rec.id = obj["id"].get<std::string>();
    rec.image = obj["image"].get<std::string>();
    rec.caption = obj["caption"].get<std::string>();
    rec.query = obj["query"].get<std::string>();
    rec.description = obj["description"].get<std::string>();
    rec.design_txt = obj["design_txt"].get<std::string>();
    if (obj.contains("seg_image") && !obj["seg_image"].is_null()) {
        if (!obj["seg_image"].is_string()) {
            reason = "seg_image must be a string or null";
            return false;
        }
        rec.seg_image = obj["seg_image"].get<std::string>();
        if (rec.seg_image.empty()) {
            reason = "seg_image must not be an empty string";
            return false;
        }
        rec.has_seg_image = true;
    }
    return true;
}

}  // namespace detail

inline std::pair<std::vector<DesignRecord>, IngestReport> ingest(const std::string& path) {
    if (!std::filesystem::exists(path)) throw Error("cannot read file: " + path);
    const std::string content = read_file(path);
    std::vector<DesignRecord> records;
    IngestReport report;
    std::map<std::string, std::size_t> first_seen;  // id -> line
    std::size_t line_no = 0;
    for (const auto& line : split_lines(content)) {
        ++line_no;
        if (trim(line).empty()) continue;
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception&) {
            report.rejected.push_back({line_no, "invalid JSON"});
            continue;
        }
        DesignRecord rec;
        std::string reason;
        if (!detail::parse_record_line(obj, rec, reason)) {
            report.rejected.push_back({line_no, reason});
            continue;
        }
        auto it = first_seen.find(rec.id);
        if (it != first_seen.end()) {
            report.rejected.push_back(
                {line_no, "duplicate id '" + rec.id + "' first seen on line " +
                              std::to_string(it->second)});
            continue;
        }
        first_seen[rec.id] = line_no;
        records.push_back(std::move(rec));
        ++report.accepted;
    }
    if (records.empty()) throw Error("zero accepted records in " + path);
    return {std::move(records), std::move(report)};
}

// ---------------------------------------------------------------------------
// Cosine similarity, clamped to [-1, 1] against rounding.
// ---------------------------------------------------------------------------

inline double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dimension() != b.dimension()) throw PreconditionError("dimension mismatch");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        dot += a.values[i] * b.values[i];
        na += a.values[i] * a.values[i];
        nb += b.values[i] * b.values[i];
    }
    if (na == 0.0 || nb == 0.0) throw PreconditionError("zero-norm vector");
    const double c = dot / (std::sqrt(na) * std::sqrt(nb));
    return std::clamp(c, -1.0, 1.0);
}

// ---------------------------------------------------------------------------
// Vector index: exact linear scan over (record_id, vector) pairs. Immutable
// after build; concurrent searches are safe.
// ---------------------------------------------------------------------------

struct VectorIndex {
    std::string space_id;
    std::size_t dimension = 0;
    std::vector<std::pair<std::string, EmbeddingVector>> entries;
};

struct SearchHit {
    std::string record_id;
    double score = 0.0;
    int rank = 0;
};

enum class TextSelector { description, caption, design_txt };

inline const std::string& select_text(const DesignRecord& rec, TextSelector selector) {
    switch (selector) {
        case TextSelector::caption: return rec.caption;
        case TextSelector::design_txt: return rec.design_txt;
        default: return rec.description;
    }
}

inline VectorIndex build_index(const std::vector<DesignRecord>& records,
                               const EmbedBackend& embed, const std::string& space_id,
                               TextSelector selector) {
    if (records.empty()) throw PreconditionError("empty record list");
    std::vector<std::string> texts;
    texts.reserve(records.size());
    for (const auto& rec : records) texts.push_back(select_text(rec, selector));
    auto vectors = embed.embed_text(texts, space_id);
    VectorIndex index;
    index.space_id = space_id;
    index.dimension = vectors.front().dimension();
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (vectors[i].dimension() != index.dimension)
            throw Error("dimension mismatch across batch");
        index.entries.emplace_back(records[i].id, std::move(vectors[i]));
    }
    return index;
}

// Top-k by cosine, ties broken by ascending record_id. Returns
// min(k, |index|) hits with contiguous ranks from 1.
inline std::vector<SearchHit> search(const VectorIndex& index, const EmbeddingVector& query,
                                     std::size_t k) {
    if (k < 1) throw PreconditionError("k must be >= 1");
    if (query.dimension() != index.dimension) throw PreconditionError("dimension mismatch");
    std::vector<SearchHit> hits;
    hits.reserve(index.entries.size());
    for (const auto& [id, vec] : index.entries)
        hits.push_back({id, cosine(query, vec), 0});
    std::sort(hits.begin(), hits.end(), [](const SearchHit& a, const SearchHit& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.record_id < b.record_id;
    });
    if (hits.size() > k) hits.resize(k);
    for (std::size_t i = 0; i < hits.size(); ++i) hits[i].rank = static_cast<int>(i + 1);
    return hits;
}

// ---------------------------------------------------------------------------
// Index sidecar persistence. Little-endian binary with a magic/version
// header; the corpus content hash makes staleness detectable.
//
//   magic "ATELIDX1" | u32 version | u64 corpus_hash |
//   u32 space_len, space_id | u32 dimension | u32 count |
//   count x ( u32 id_len, id, dimension x f64 )
// ---------------------------------------------------------------------------

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out += static_cast<char>((v >> (8 * i)) & 0xff);
}
inline void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out += static_cast<char>((v >> (8 * i)) & 0xff);
}

class ByteReader {
public:
    explicit ByteReader(std::string_view data) : data_(data) {}

    std::uint32_t u32() {
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(byte()) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(byte()) << (8 * i);
        return v;
    }
    std::string str(std::size_t n) {
        if (pos_ + n > data_.size()) throw Error("truncated index file");
        std::string s(data_.substr(pos_, n));
        pos_ += n;
        return s;
    }
    double f64() {
        std::uint64_t bits = u64();
        double d;
        static_assert(sizeof(d) == sizeof(bits));
        std::memcpy(&d, &bits, sizeof(d));
        return d;
    }

private:
    unsigned char byte() {
        if (pos_ >= data_.size()) throw Error("truncated index file");
        return static_cast<unsigned char>(data_[pos_++]);
    }
    std::string_view data_;
    std::size_t pos_ = 0;
};

}  // namespace detail

inline constexpr const char* kIndexMagic = "ATELIDX1";
inline constexpr std::uint32_t kIndexVersion = 1;

inline void save_index(const VectorIndex& index, const std::string& path,
                       std::uint64_t corpus_hash) {
    std::string out;
    out += kIndexMagic;
    detail::put_u32(out, kIndexVersion);
    detail::put_u64(out, corpus_hash);
    detail::put_u32(out, static_cast<std::uint32_t>(index.space_id.size()));
    out += index.space_id;
    detail::put_u32(out, static_cast<std::uint32_t>(index.dimension));
    detail::put_u32(out, static_cast<std::uint32_t>(index.entries.size()));
    for (const auto& [id, vec] : index.entries) {
        detail::put_u32(out, static_cast<std::uint32_t>(id.size()));
        out += id;
        for (double v : vec.values) {
            std::uint64_t bits;
            std::memcpy(&bits, &v, sizeof(bits));
            detail::put_u64(out, bits);
        }
    }
    write_file(path, out);
}

inline VectorIndex load_index(const std::string& path, std::uint64_t* corpus_hash = nullptr) {
    const std::string data = read_file(path);
    detail::ByteReader reader(data);
    if (reader.str(8) != kIndexMagic) throw Error("not an index file: " + path);
    if (reader.u32() != kIndexVersion) throw Error("unsupported index version in " + path);
    const std::uint64_t stored_hash = reader.u64();
    if (corpus_hash) *corpus_hash = stored_hash;
    VectorIndex index;
    index.space_id = reader.str(reader.u32());
    index.dimension = reader.u32();
    const std::uint32_t count = reader.u32();
    for (std::uint32_t i = 0; i < count; ++i) {
        std::string id = reader.str(reader.u32());
        EmbeddingVector vec;
        vec.space_id = index.space_id;
        vec.values.resize(index.dimension);
        for (auto& v : vec.values) v = reader.f64();
        index.entries.emplace_back(std::move(id), std::move(vec));
    }
    return index;
}

// Loads the sidecar when fresh; rebuilds (and rewrites it) when the corpus
// content hash changed or no sidecar exists.
inline VectorIndex ensure_index(const std::string& corpus_path,
                                const std::vector<DesignRecord>& records,
                                const EmbedBackend& embed, const std::string& space_id,
                                TextSelector selector) {
    const std::uint64_t corpus_hash = fnv1a(read_file(corpus_path));
    const std::string sidecar = corpus_path + "." + space_id + ".idx";
    if (std::filesystem::exists(sidecar)) {
        std::uint64_t stored = 0;
        try {
            VectorIndex index = load_index(sidecar, &stored);
            if (stored == corpus_hash && index.space_id == space_id) return index;
        } catch (const Error&) {
            // corrupt sidecar: fall through to rebuild
        }
    }
    VectorIndex index = build_index(records, embed, space_id, selector);
    save_index(index, sidecar, corpus_hash);
    return index;
}

}  // namespace atelier
