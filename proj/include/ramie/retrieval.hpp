#pragma once

// Immutable example index over a training split with task-restricted,
// optionally self-excluding top-k cosine search, plus the random-retriever
// baseline. Keys embed sentence+response; queries embed the sentence only.

#include <algorithm>
#include <array>
#include <iostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ramie/core.hpp"
#include "ramie/detail/rng.hpp"
#include "ramie/embedding.hpp"
#include "ramie/prompting.hpp"

namespace ramie {

struct BuildError : Error {
    using Error::Error;
};

struct EmptyCandidateSetError : Error {
    using Error::Error;
};

struct StaleIndexError : Error {
    using Error::Error;
};

inline constexpr std::string_view kKeySeparator = " || ";

/// Sentence side of a key or query: raw text, with the rendered relationship
/// question for RE records (what the model sees; configurable).
inline std::string retrieval_sentence(const Record& record, bool re_include_question = true) {
    if (re_include_question) return sentence_for_prompt(record);
    return record.text;
}

inline std::string example_key_text(const Record& record, bool re_include_question = true) {
    return retrieval_sentence(record, re_include_question) + std::string(kKeySeparator) +
           serialize_gold(record.gold);
}

struct ExampleKey {
    std::string record_id;
    TaskKind task = TaskKind::NER;
    std::string key_text;
    std::string sentence_norm;  // normalized sentence, for self-exclusion
    Vector key_vector;
};

struct ExampleIndex {
    EmbedderSpec embedder;
    std::string fingerprint;  // content hash of the source corpus
    std::vector<ExampleKey> entries;
    std::array<std::vector<std::size_t>, 4> by_task;
};

/// One ExampleKey per record, committed in corpus order; deterministic for a
/// given embedder and corpus.
inline ExampleIndex build_index(const std::vector<Record>& records, const EmbedderSpec& embedder,
                                std::string fingerprint = "",
                                bool re_include_question = true) {
    if (records.empty()) throw BuildError("cannot build an index over an empty corpus");
    ExampleIndex index;
    index.embedder = embedder;
    index.fingerprint = std::move(fingerprint);

    std::vector<std::string> key_texts;
    key_texts.reserve(records.size());
    for (const auto& record : records) {
        if (record.text.find(kKeySeparator) != std::string::npos)
            std::cerr << "warning: record " << record.id << " contains the key separator \""
                      << kKeySeparator << "\"\n";
        key_texts.push_back(example_key_text(record, re_include_question));
    }
    std::vector<Vector> vectors = embed_batch(embedder, key_texts);

    index.entries.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        ExampleKey key;
        key.record_id = records[i].id;
        key.task = records[i].task;
        key.key_text = std::move(key_texts[i]);
        key.sentence_norm = normalize_text(records[i].text);
        key.key_vector = std::move(vectors[i]);
        index.by_task[static_cast<std::size_t>(key.task)].push_back(i);
        index.entries.push_back(std::move(key));
    }
    return index;
}

struct RetrievalMode {
    enum class Phase { Train, Test };
    enum class Baseline { Similarity, Random };
    Phase phase = Phase::Test;
    std::size_t k = 1;
    Baseline baseline = Baseline::Similarity;
    std::uint64_t seed = 0;
    bool re_include_question = true;
};

struct RetrievalHit {
    std::string record_id;
    double similarity;
};

/// Task-restricted top-k search. Train phase excludes the query's own id and
/// any entry with the same normalized sentence. Ties break on ascending id.
/// The random baseline draws uniformly (seeded per query id) from the same
/// candidate set.
inline std::vector<RetrievalHit> retrieve(const ExampleIndex& index, const Record& query,
                                          const RetrievalMode& mode) {
    if (mode.k == 0) throw ConfigError("retrieval k must be positive");
    const auto& partition = index.by_task[static_cast<std::size_t>(query.task)];
    const std::string query_norm = normalize_text(query.text);

    std::vector<std::size_t> candidates;
    candidates.reserve(partition.size());
    for (std::size_t idx : partition) {
        const auto& entry = index.entries[idx];
        if (mode.phase == RetrievalMode::Phase::Train &&
            (entry.record_id == query.id || entry.sentence_norm == query_norm))
            continue;
        candidates.push_back(idx);
    }
    if (candidates.size() < mode.k)
        throw EmptyCandidateSetError("task " + std::string(task_name(query.task)) + ": " +
                                     std::to_string(candidates.size()) +
                                     " candidate(s) after exclusion, need " +
                                     std::to_string(mode.k));

    std::vector<RetrievalHit> hits;
    if (mode.baseline == RetrievalMode::Baseline::Random) {
        // Canonical candidate order (ascending id), then a per-query seeded draw.
        std::sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
            return index.entries[a].record_id < index.entries[b].record_id;
        });
        const std::uint64_t query_seed =
            detail::mix64(mode.seed ^ detail::fnv1a64(query.id));
        for (std::size_t pick :
             detail::sample_without_replacement(candidates.size(), mode.k, query_seed)) {
            const auto& entry = index.entries[candidates[pick]];
            hits.push_back({entry.record_id, 0.0});
        }
        return hits;
    }

    const Vector query_vec =
        embed(index.embedder, retrieval_sentence(query, mode.re_include_question));
    std::vector<std::pair<double, std::size_t>> scored;
    scored.reserve(candidates.size());
    for (std::size_t idx : candidates)
        scored.emplace_back(cosine(query_vec, index.entries[idx].key_vector), idx);
    std::sort(scored.begin(), scored.end(), [&](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return index.entries[a.second].record_id < index.entries[b.second].record_id;
    });
    hits.reserve(mode.k);
    for (std::size_t i = 0; i < mode.k; ++i)
        hits.push_back({index.entries[scored[i].second].record_id, scored[i].first});
    return hits;
}

// ---------------------------------------------------------------------------
// Persistence

inline void save_index(const ExampleIndex& index, const std::string& path) {
    std::string out;
    nlohmann::json header{{"embedder", embedder_spec_to_json(index.embedder)},
                          {"dim", index.embedder.dim},
                          {"fingerprint", index.fingerprint},
                          {"count", index.entries.size()}};
    out += header.dump();
    out += '\n';
    for (const auto& entry : index.entries) {
        auto nonzero = nlohmann::json::array();
        for (std::size_t i = 0; i < entry.key_vector.values.size(); ++i)
            if (entry.key_vector.values[i] != 0.0)
                nonzero.push_back({i, entry.key_vector.values[i]});
        nlohmann::json line{{"id", entry.record_id},
                            {"task", std::string(task_name(entry.task))},
                            {"key_text", entry.key_text},
                            {"sentence_norm", entry.sentence_norm},
                            {"vec", std::move(nonzero)}};
        out += line.dump();
        out += '\n';
    }
    detail::write_file(path, out);
}

/// Loads a persisted index; refuses one whose fingerprint does not match the
/// current source corpus (pass empty to skip the check).
inline ExampleIndex load_index(const std::string& path,
                               const std::string& expected_fingerprint = "") {
    const auto lines = detail::read_lines(path);
    if (lines.empty()) throw IoError("empty index file: " + path);
    ExampleIndex index;
    const auto header = nlohmann::json::parse(lines[0]);
    index.embedder = embedder_spec_from_json(header.at("embedder"));
    index.fingerprint = header.value("fingerprint", "");
    if (!expected_fingerprint.empty() && index.fingerprint != expected_fingerprint)
        throw StaleIndexError("index fingerprint " + index.fingerprint +
                              " does not match corpus " + expected_fingerprint);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto obj = nlohmann::json::parse(lines[i]);
        ExampleKey entry;
        entry.record_id = obj.at("id").get<std::string>();
        entry.task = parse_task(obj.at("task").get<std::string>());
        entry.key_text = obj.at("key_text").get<std::string>();
        entry.sentence_norm = obj.at("sentence_norm").get<std::string>();
        entry.key_vector.values.assign(index.embedder.dim, 0.0);
        for (const auto& pair : obj.at("vec")) {
            const std::size_t bucket = pair.at(0).get<std::size_t>();
            if (bucket >= index.embedder.dim)
                throw SchemaError(i + 1, "vec", "bucket out of range");
            entry.key_vector.values[bucket] = pair.at(1).get<double>();
        }
        index.by_task[static_cast<std::size_t>(entry.task)].push_back(index.entries.size());
        index.entries.push_back(std::move(entry));
    }
    if (index.entries.empty()) throw BuildError("index file has no entries: " + path);
    return index;
}

}  // namespace ramie
