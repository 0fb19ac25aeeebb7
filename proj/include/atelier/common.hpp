#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace atelier {

// ---------------------------------------------------------------------------
// Errors. Everything thrown by the library derives from Error; parse-shaped
// failures carry the pipeline stage that produced them.
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class PreconditionError : public Error {
public:
    explicit PreconditionError(const std::string& msg) : Error(msg) {}
};

class ParseError : public Error {
public:
    ParseError(std::string stage, const std::string& msg)
        : Error(stage + ": " + msg), stage_(std::move(stage)) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

class TransportError : public Error {
public:
    explicit TransportError(const std::string& msg) : Error(msg) {}
};

class ProtocolError : public Error {
public:
    ProtocolError(int status, const std::string& body_excerpt)
        : Error("protocol error: status " + std::to_string(status) + ": " + body_excerpt),
          status_(status) {}
    int status() const { return status_; }

private:
    int status_ = 0;
};

class IntegrityError : public Error {
public:
    IntegrityError(std::string artifact, const std::string& msg)
        : Error("integrity error [" + artifact + "]: " + msg), artifact_(std::move(artifact)) {}
    const std::string& artifact() const { return artifact_; }

private:
    std::string artifact_;
};

// Stage-tagged failure raised when a chat stage exhausts its retry budget or
// aborts mid-way. Carries whatever partial output the stage accumulated.
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& msg, std::string partial = "")
        : Error(stage + ": " + msg), stage_(std::move(stage)), partial_(std::move(partial)) {}
    const std::string& stage() const { return stage_; }
    const std::string& partial() const { return partial_; }

private:
    std::string stage_;
    std::string partial_;
};

// ---------------------------------------------------------------------------
// Stable hashing. FNV-1a 64 over bytes; used for mock embeddings, content
// hashes and per-stage seed derivation, so it must never change.
// ---------------------------------------------------------------------------

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ull;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ull;

inline std::uint64_t fnv1a(std::string_view data, std::uint64_t seed = kFnvOffset) {
    std::uint64_t h = seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= kFnvPrime;
    }
    return h;
}

inline std::string to_hex(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

inline std::string content_hash(std::string_view data) { return to_hex(fnv1a(data)); }

// ---------------------------------------------------------------------------
// Deterministic PRNG. splitmix64 keeps draws identical across platforms and
// standard-library versions, unlike <random> distributions.
// ---------------------------------------------------------------------------

class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, bound). Modulo bias is negligible for the bounds used
    // here (pool sizes, variant counts) and keeps the draw rule trivially
    // replayable by oracles.
    std::uint64_t bounded(std::uint64_t bound) { return next() % bound; }

    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

// Per-stage sub-seed: stage insertion/removal must not perturb other stages'
// randomness, so each stage mixes its own name into the root seed.
inline std::uint64_t stage_seed(std::uint64_t root_seed, std::string_view stage_name) {
    return SplitMix64(root_seed ^ fnv1a(stage_name)).next();
}

// ---------------------------------------------------------------------------
// Small string helpers.
// ---------------------------------------------------------------------------

inline std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

inline std::string rtrim(std::string_view s) {
    std::size_t e = s.size();
    while (e > 0 && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(0, e));
}

inline std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

inline bool iequals(std::string_view a, std::string_view b) {
    return to_lower(a) == to_lower(b);
}

inline std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> lines;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) {
            lines.emplace_back(text.substr(pos));
            break;
        }
        lines.emplace_back(text.substr(pos, nl - pos));
        pos = nl + 1;
    }
    return lines;
}

inline std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, std::string_view data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write file: " + path);
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
}

}  // namespace atelier
