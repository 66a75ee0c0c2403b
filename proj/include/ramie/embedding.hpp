#pragma once

// Embedder contract used by retrieval: a deterministic hashed-lexical
// embedder for offline runs, plus a client for external embedding services.

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "ramie/core.hpp"
#include "ramie/detail/hash.hpp"
#include "ramie/detail/http.hpp"

namespace ramie {

struct DimMismatchError : Error {
    using Error::Error;
};

struct RemoteError : Error {
    using Error::Error;
};

struct Vector {
    std::vector<double> values;
    std::size_t dim() const { return values.size(); }
    bool is_zero() const {
        for (double v : values)
            if (v != 0.0) return false;
        return true;
    }
};

struct EmbedderSpec {
    enum class Kind { HashedLexical, Remote };
    Kind kind = Kind::HashedLexical;
    std::size_t dim = 2048;
    // Remote only:
    std::string endpoint;  // full URL, e.g. http://host:8080/embed
    std::string model;
    std::string api_key_env;
    int timeout_ms = 30000;
    int retries = 2;
    int max_in_flight = 4;
    std::size_t batch_size = 64;
};

/// Dot product of unit (or zero) vectors. A zero operand yields 0.0.
inline double cosine(const Vector& a, const Vector& b) {
    if (a.dim() != b.dim())
        throw DimMismatchError("cosine: dim " + std::to_string(a.dim()) + " vs " +
                               std::to_string(b.dim()));
    double dot = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) dot += a.values[i] * b.values[i];
    return dot;
}

namespace detail {

// Feature stream of the hashed-lexical embedder: lowercased word unigrams
// plus character 3-grams of the normalized text. Prefixes keep the two
// feature kinds from colliding as strings.
template <typename Fn>
void for_each_lexical_feature(const std::string& normalized, Fn&& fn) {
    std::size_t start = 0;
    while (start < normalized.size()) {
        std::size_t end = normalized.find(' ', start);
        if (end == std::string::npos) end = normalized.size();
        if (end > start) fn("w:" + normalized.substr(start, end - start));
        start = end + 1;
    }
    if (normalized.size() >= 3)
        for (std::size_t i = 0; i + 3 <= normalized.size(); ++i)
            fn("c:" + normalized.substr(i, 3));
}

inline void l2_normalize(Vector& vec) {
    double norm_sq = 0.0;
    for (double v : vec.values) norm_sq += v * v;
    if (norm_sq == 0.0) return;
    const double inv = 1.0 / std::sqrt(norm_sq);
    for (double& v : vec.values) v *= inv;
}

}  // namespace detail

/// Signed feature hashing: every feature spreads its term-frequency weight
/// over four signed buckets so collisions cancel in expectation. The four
/// sub-hashes tame the heavy tails that repeated high-frequency features
/// cause; the residual cosine noise floor is ~1/sqrt(dim) (0.022 at 2048),
/// inherent to any fixed-dimension sketch. Empty text maps to the zero
/// vector. Deterministic.
inline constexpr int kHashesPerFeature = 4;

inline Vector embed_hashed(std::string_view text, std::size_t dim) {
    Vector vec;
    vec.values.assign(dim, 0.0);
    const std::string normalized = normalize_text(text);
    if (normalized.empty()) return vec;
    detail::for_each_lexical_feature(normalized, [&](const std::string& feature) {
        std::uint64_t h = detail::fnv1a64(feature);
        for (int j = 0; j < kHashesPerFeature; ++j) {
            h = detail::mix64(h + 0x9e3779b97f4a7c15ull);
            vec.values[static_cast<std::size_t>(h % dim)] += (h >> 63) ? -1.0 : 1.0;
        }
    });
    detail::l2_normalize(vec);
    return vec;
}

// ---------------------------------------------------------------------------
// Remote embedding client
//
// Protocol: POST {model, inputs: [text, ...]} -> {vectors: [[real, ...], ...]}
// Vectors are L2-normalized on receipt. Requests are idempotent and retried.

inline std::vector<Vector> embed_remote(const EmbedderSpec& spec,
                                        const std::vector<std::string>& texts) {
    if (texts.empty()) return {};
    const auto url = detail::split_url(spec.endpoint);
    const std::string api_key = detail::api_key_from_env(spec.api_key_env);

    // One request per sub-batch; up to max_in_flight requests concurrently.
    std::vector<std::pair<std::size_t, std::size_t>> batches;
    for (std::size_t start = 0; start < texts.size(); start += spec.batch_size)
        batches.emplace_back(start, std::min(texts.size(), start + spec.batch_size));

    std::vector<Vector> out(texts.size());
    std::atomic<std::size_t> next_batch{0};
    std::atomic<bool> failed{false};
    std::string first_error;
    std::mutex error_mutex;

    auto worker = [&] {
        httplib::Client client(url.base);
        client.set_connection_timeout(0, spec.timeout_ms * 1000);
        client.set_read_timeout(spec.timeout_ms / 1000, (spec.timeout_ms % 1000) * 1000);
        if (!api_key.empty()) client.set_bearer_token_auth(api_key);
        for (std::size_t b = next_batch.fetch_add(1); b < batches.size();
             b = next_batch.fetch_add(1)) {
            if (failed.load()) return;
            const auto [start, end] = batches[b];
            nlohmann::json request{{"model", spec.model}, {"inputs", nlohmann::json::array()}};
            for (std::size_t i = start; i < end; ++i) request["inputs"].push_back(texts[i]);
            const std::string body = request.dump();

            std::string error;
            bool ok = false;
            for (int attempt = 0; attempt <= spec.retries && !ok; ++attempt) {
                auto res = client.Post(url.path, body, "application/json");
                if (!res) {
                    error = "transport error: " + httplib::to_string(res.error());
                    continue;
                }
                if (res->status != 200) {
                    error = "HTTP " + std::to_string(res->status);
                    continue;
                }
                try {
                    const auto parsed = nlohmann::json::parse(res->body);
                    const auto& vectors = parsed.at("vectors");
                    if (!vectors.is_array() || vectors.size() != end - start)
                        throw RemoteError("vector count mismatch");
                    for (std::size_t i = start; i < end; ++i) {
                        Vector vec;
                        vec.values = vectors[i - start].get<std::vector<double>>();
                        if (vec.dim() != spec.dim)
                            throw RemoteError("remote dim " + std::to_string(vec.dim()) +
                                              " != configured dim " + std::to_string(spec.dim));
                        detail::l2_normalize(vec);
                        out[i] = std::move(vec);
                    }
                    ok = true;
                } catch (const std::exception& e) {
                    error = std::string("bad response: ") + e.what();
                }
            }
            if (!ok) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!failed.exchange(true)) first_error = error;
                return;
            }
        }
    };

    const std::size_t n_workers =
        std::min<std::size_t>(std::max(1, spec.max_in_flight), batches.size());
    std::vector<std::thread> workers;
    for (std::size_t i = 0; i < n_workers; ++i) workers.emplace_back(worker);
    for (auto& w : workers) w.join();
    if (failed.load()) throw RemoteError("remote embedding failed: " + first_error);
    return out;
}

inline std::vector<Vector> embed_batch(const EmbedderSpec& spec,
                                       const std::vector<std::string>& texts) {
    if (spec.kind == EmbedderSpec::Kind::HashedLexical) {
        std::vector<Vector> out(texts.size());
        if (texts.size() >= 64) {
            // embarrassingly parallel; committed in input order
            const std::size_t n_threads =
                std::min<std::size_t>(std::thread::hardware_concurrency() ?
                                          std::thread::hardware_concurrency() : 2,
                                      8);
            std::vector<std::thread> workers;
            std::atomic<std::size_t> next{0};
            for (std::size_t t = 0; t < n_threads; ++t)
                workers.emplace_back([&] {
                    for (std::size_t i = next.fetch_add(1); i < texts.size();
                         i = next.fetch_add(1))
                        out[i] = embed_hashed(texts[i], spec.dim);
                });
            for (auto& w : workers) w.join();
        } else {
            for (std::size_t i = 0; i < texts.size(); ++i)
                out[i] = embed_hashed(texts[i], spec.dim);
        }
        return out;
    }
    return embed_remote(spec, texts);
}

inline Vector embed(const EmbedderSpec& spec, const std::string& text) {
    return embed_batch(spec, {text})[0];
}

inline nlohmann::json embedder_spec_to_json(const EmbedderSpec& spec) {
    nlohmann::json obj{{"kind", spec.kind == EmbedderSpec::Kind::HashedLexical
                                    ? "hashed-lexical"
                                    : "remote"},
                       {"dim", spec.dim}};
    if (spec.kind == EmbedderSpec::Kind::Remote) {
        obj["endpoint"] = spec.endpoint;
        obj["model"] = spec.model;
        obj["api_key_env"] = spec.api_key_env;
        obj["timeout_ms"] = spec.timeout_ms;
    }
    return obj;
}

inline EmbedderSpec embedder_spec_from_json(const nlohmann::json& obj) {
    EmbedderSpec spec;
    const std::string kind = obj.value("kind", "hashed-lexical");
    if (kind == "hashed-lexical")
        spec.kind = EmbedderSpec::Kind::HashedLexical;
    else if (kind == "remote")
        spec.kind = EmbedderSpec::Kind::Remote;
    else
        throw ConfigError("unknown embedder kind: " + kind);
    spec.dim = obj.value("dim", static_cast<std::size_t>(2048));
    if (spec.dim == 0) throw ConfigError("embedder dim must be positive");
    spec.endpoint = obj.value("endpoint", "");
    spec.model = obj.value("model", "");
    spec.api_key_env = obj.value("api_key_env", "");
    spec.timeout_ms = obj.value("timeout_ms", 30000);
    spec.retries = obj.value("retries", 2);
    spec.max_in_flight = obj.value("max_in_flight", 4);
    if (spec.kind == EmbedderSpec::Kind::Remote && spec.endpoint.empty())
        throw ConfigError("remote embedder requires an endpoint");
    return spec;
}

}  // namespace ramie
