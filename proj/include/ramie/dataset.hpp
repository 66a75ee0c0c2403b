#pragma once

// Corpus reading/validation, split checking, multi-task blending and the
// instruction-tuning / training-config exports.
//
// Corpus files are UTF-8 JSONL, one record per line:
//   {"gold": ..., "id": "...", "task": "NER", "text": "..."}
// with "re_head"/"re_tail" present exactly on RE records. Gold shapes:
//   NER  [{"surface": s, "type": t}, ...]
//   RE   "positive" | "negative" | "not_related"
//   TE   [{"head": h, "relation": r, "tail": t}, ...]
//   UC   "continue" | "discontinue" | "uncertain" | "start"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ramie/core.hpp"
#include "ramie/detail/io.hpp"
#include "ramie/detail/rng.hpp"
#include "ramie/prompting.hpp"

namespace ramie {

struct DuplicateTaskError : Error {
    using Error::Error;
};

struct Corpus {
    TaskKind task = TaskKind::NER;
    std::string split;  // train | dev | test
    std::vector<Record> records;
};

// ---------------------------------------------------------------------------
// JSON (de)serialization

namespace detail {

inline const nlohmann::json& require_field(const nlohmann::json& obj, const char* key,
                                           std::size_t line) {
    auto it = obj.find(key);
    if (it == obj.end()) throw SchemaError(line, key, "missing field");
    return *it;
}

inline std::string require_string(const nlohmann::json& obj, const char* key,
                                  std::size_t line) {
    const auto& value = require_field(obj, key, line);
    if (!value.is_string()) throw SchemaError(line, key, "expected a string");
    return value.get<std::string>();
}

}  // namespace detail

inline GoldOutput gold_from_json(TaskKind task, const nlohmann::json& gold, std::size_t line) {
    try {
        switch (task) {
            case TaskKind::NER: {
                if (!gold.is_array()) throw SchemaError(line, "gold", "NER gold must be a list");
                NerMentions mentions;
                for (const auto& item : gold) {
                    if (!item.is_object()) throw SchemaError(line, "gold", "mention must be an object");
                    mentions.push_back(make_mention(
                        detail::require_string(item, "surface", line),
                        parse_entity_type(detail::require_string(item, "type", line))));
                }
                return mentions;
            }
            case TaskKind::RE:
                if (!gold.is_string()) throw SchemaError(line, "gold", "RE gold must be a string");
                return parse_relation(gold.get<std::string>());
            case TaskKind::TE: {
                if (!gold.is_array()) throw SchemaError(line, "gold", "TE gold must be a list");
                TeTriples triples;
                for (const auto& item : gold) {
                    if (!item.is_object()) throw SchemaError(line, "gold", "triple must be an object");
                    triples.push_back(make_triple(
                        detail::require_string(item, "head", line),
                        parse_relation(detail::require_string(item, "relation", line)),
                        detail::require_string(item, "tail", line)));
                }
                return triples;
            }
            case TaskKind::UC:
                if (!gold.is_string()) throw SchemaError(line, "gold", "UC gold must be a string");
                return parse_usage(gold.get<std::string>());
        }
    } catch (const UnknownLabelError& e) {
        throw LabelError(line, e.what());
    }
    throw SchemaError(line, "task", "unreachable task kind");
}

inline nlohmann::json gold_to_json(const GoldOutput& gold) {
    switch (task_of(gold)) {
        case TaskKind::NER: {
            auto arr = nlohmann::json::array();
            for (const auto& m : std::get<NerMentions>(gold))
                arr.push_back({{"surface", m.surface}, {"type", std::string(entity_type_name(m.etype))}});
            return arr;
        }
        case TaskKind::RE:
            return std::string(relation_name(std::get<RelationType>(gold)));
        case TaskKind::TE: {
            auto arr = nlohmann::json::array();
            for (const auto& t : std::get<TeTriples>(gold))
                arr.push_back({{"head", t.head},
                               {"relation", std::string(relation_name(t.relation))},
                               {"tail", t.tail}});
            return arr;
        }
        case TaskKind::UC:
            return std::string(usage_name(std::get<UsageStatus>(gold)));
    }
    return nullptr;
}

inline Record record_from_json(const nlohmann::json& obj, std::size_t line = 0) {
    if (!obj.is_object()) throw SchemaError(line, "", "record line must be a JSON object");
    Record record;
    record.id = detail::require_string(obj, "id", line);
    try {
        record.task = parse_task(detail::require_string(obj, "task", line));
    } catch (const UnknownLabelError& e) {
        throw SchemaError(line, "task", e.what());
    }
    record.text = detail::require_string(obj, "text", line);
    if (obj.contains("re_head")) record.re_head = normalize_text(detail::require_string(obj, "re_head", line));
    if (obj.contains("re_tail")) record.re_tail = normalize_text(detail::require_string(obj, "re_tail", line));
    record.gold = gold_from_json(record.task, detail::require_field(obj, "gold", line), line);
    validate_record(record, line);
    return record;
}

inline nlohmann::json record_to_json(const Record& record) {
    nlohmann::json obj{{"id", record.id},
                       {"task", std::string(task_name(record.task))},
                       {"text", record.text},
                       {"gold", gold_to_json(record.gold)}};
    if (record.re_head) obj["re_head"] = *record.re_head;
    if (record.re_tail) obj["re_tail"] = *record.re_tail;
    return obj;
}

// ---------------------------------------------------------------------------
// Loading / saving

/// Parses and validates every line; returns records in file order.
inline Corpus load_corpus(const std::string& path, TaskKind task, const std::string& split) {
    Corpus corpus{task, split, {}};
    std::set<std::string> seen_ids;
    std::size_t line_no = 0;
    for (const auto& line : detail::read_lines(path)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw SchemaError(line_no, "", std::string("invalid JSON: ") + e.what());
        }
        Record record = record_from_json(obj, line_no);
        if (record.task != task)
            throw SchemaError(line_no, "task",
                              "expected task " + std::string(task_name(task)) + ", got " +
                                  std::string(task_name(record.task)));
        if (!seen_ids.insert(record.id).second)
            throw SchemaError(line_no, "id", "duplicate id: " + record.id);
        corpus.records.push_back(std::move(record));
    }
    return corpus;
}

inline std::string records_to_jsonl(const std::vector<Record>& records) {
    std::string out;
    for (const auto& record : records) {
        out += record_to_json(record).dump();
        out += '\n';
    }
    return out;
}

inline void save_corpus(const Corpus& corpus, const std::string& path) {
    detail::write_file(path, records_to_jsonl(corpus.records));
}

/// Mixed-task JSONL loader (blended corpora, prompt inputs).
inline std::vector<Record> load_records_any_task(const std::string& path) {
    std::vector<Record> records;
    std::set<std::string> seen_ids;
    std::size_t line_no = 0;
    for (const auto& line : detail::read_lines(path)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw SchemaError(line_no, "", std::string("invalid JSON: ") + e.what());
        }
        Record record = record_from_json(obj, line_no);
        if (!seen_ids.insert(record.id).second)
            throw SchemaError(line_no, "id", "duplicate id: " + record.id);
        records.push_back(std::move(record));
    }
    return records;
}

// ---------------------------------------------------------------------------
// Split validation

struct SplitReport {
    TaskKind task = TaskKind::NER;
    std::size_t train_size = 0, dev_size = 0, test_size = 0;
    double train_ratio = 0.0, test_ratio = 0.0;  // normalized so dev = 1
    std::vector<std::string> id_collisions;
    std::vector<std::string> duplicate_sentences;  // normalized text shared across splits
    std::vector<std::string> warnings;
    bool ratio_ok = true;
};

/// Advisory split check against the 8:1:1 convention (tolerance ±10%).
inline SplitReport validate_splits(const Corpus& train, const Corpus& dev, const Corpus& test) {
    if (train.task != dev.task || train.task != test.task)
        throw TaskMismatchError("validate_splits: corpora have different tasks");
    SplitReport report;
    report.task = train.task;
    report.train_size = train.records.size();
    report.dev_size = dev.records.size();
    report.test_size = test.records.size();

    if (report.dev_size > 0) {
        report.train_ratio = static_cast<double>(report.train_size) / report.dev_size;
        report.test_ratio = static_cast<double>(report.test_size) / report.dev_size;
        if (report.train_ratio < 8.0 * 0.9 || report.train_ratio > 8.0 * 1.1) {
            report.ratio_ok = false;
            report.warnings.push_back("train/dev ratio deviates from 8:1 by more than 10%");
        }
        if (report.test_ratio < 0.9 || report.test_ratio > 1.1) {
            report.ratio_ok = false;
            report.warnings.push_back("test/dev ratio deviates from 1:1 by more than 10%");
        }
    } else {
        report.ratio_ok = false;
        report.warnings.push_back("dev split is empty; ratios undefined");
    }

    std::map<std::string, int> id_count;
    std::map<std::string, std::set<int>> text_splits;
    const Corpus* corpora[3] = {&train, &dev, &test};
    for (int s = 0; s < 3; ++s) {
        for (const auto& record : corpora[s]->records) {
            ++id_count[record.id];
            text_splits[normalize_text(record.text)].insert(s);
        }
    }
    for (const auto& [id, count] : id_count)
        if (count > 1) report.id_collisions.push_back(id);
    for (const auto& [text, splits] : text_splits)
        if (splits.size() > 1) report.duplicate_sentences.push_back(text);
    if (!report.id_collisions.empty())
        report.warnings.push_back(std::to_string(report.id_collisions.size()) +
                                  " id(s) appear in more than one split");
    if (!report.duplicate_sentences.empty())
        report.warnings.push_back(std::to_string(report.duplicate_sentences.size()) +
                                  " sentence(s) appear in more than one split");
    return report;
}

inline nlohmann::json split_report_to_json(const SplitReport& report) {
    return {{"task", std::string(task_name(report.task))},
            {"train_size", report.train_size},
            {"dev_size", report.dev_size},
            {"test_size", report.test_size},
            {"train_ratio", report.train_ratio},
            {"test_ratio", report.test_ratio},
            {"ratio_ok", report.ratio_ok},
            {"id_collisions", report.id_collisions},
            {"duplicate_sentences", report.duplicate_sentences},
            {"warnings", report.warnings}};
}

// ---------------------------------------------------------------------------
// Blending

struct Provenance {
    TaskKind task = TaskKind::NER;
    std::string source;  // e.g. "NER/train"
    bool operator==(const Provenance&) const = default;
};

struct BlendedCorpus {
    std::vector<Record> records;
    std::map<std::string, Provenance> provenance;  // blended id -> origin
};

inline std::string blended_id(TaskKind task, const std::string& original_id) {
    return std::string(task_name(task)) + ":" + original_id;
}

/// Unifies one train corpus per task into a deterministically shuffled
/// multi-task training set. Ids become "<task>:<original id>".
inline BlendedCorpus blend(const std::vector<Corpus>& train_corpora, std::uint64_t seed) {
    if (train_corpora.size() != 4)
        throw ConfigError("blend expects exactly four train corpora, got " +
                          std::to_string(train_corpora.size()));
    std::set<TaskKind> seen;
    for (const auto& corpus : train_corpora)
        if (!seen.insert(corpus.task).second)
            throw DuplicateTaskError("two corpora share task " +
                                     std::string(task_name(corpus.task)));

    BlendedCorpus blended;
    for (const auto& corpus : train_corpora) {
        const std::string source = std::string(task_name(corpus.task)) + "/" +
                                   (corpus.split.empty() ? "train" : corpus.split);
        for (const auto& record : corpus.records) {
            Record copy = record;
            copy.id = blended_id(corpus.task, record.id);
            if (blended.provenance.count(copy.id))
                throw SchemaError(0, "id", "id collision after task prefixing: " + copy.id);
            blended.provenance[copy.id] = Provenance{corpus.task, source};
            blended.records.push_back(std::move(copy));
        }
    }
    detail::deterministic_shuffle(blended.records, seed);
    return blended;
}

inline void save_blended(const BlendedCorpus& blended, const std::string& path) {
    detail::write_file(path, records_to_jsonl(blended.records));
}

inline BlendedCorpus load_blended(const std::string& path) {
    BlendedCorpus blended;
    blended.records = load_records_any_task(path);
    for (const auto& record : blended.records) {
        const auto sep = record.id.find(':');
        if (sep == std::string::npos)
            throw SchemaError(0, "id", "blended id missing task prefix: " + record.id);
        blended.provenance[record.id] =
            Provenance{record.task, std::string(task_name(record.task)) + "/train"};
    }
    return blended;
}

// ---------------------------------------------------------------------------
// Training exports

struct TrainingExportConfig {
    int lora_rank = 64;
    int lora_alpha = 32;
    double lora_dropout = 0.1;
    double learning_rate = 1e-5;
    int max_steps = 5000;
    int eval_every = 1000;
    int per_device_batch = 4;
};

inline std::string training_config_to_text(const TrainingExportConfig& config) {
    char buf[64];
    std::string out;
    out += "lora_rank=" + std::to_string(config.lora_rank) + "\n";
    out += "lora_alpha=" + std::to_string(config.lora_alpha) + "\n";
    std::snprintf(buf, sizeof buf, "%g", config.lora_dropout);
    out += std::string("lora_dropout=") + buf + "\n";
    std::snprintf(buf, sizeof buf, "%g", config.learning_rate);
    out += std::string("learning_rate=") + buf + "\n";
    out += "max_steps=" + std::to_string(config.max_steps) + "\n";
    out += "eval_every=" + std::to_string(config.eval_every) + "\n";
    out += "per_device_batch=" + std::to_string(config.per_device_batch) + "\n";
    return out;
}

inline void write_training_config(const TrainingExportConfig& config, const std::string& path) {
    detail::write_file(path, training_config_to_text(config));
}

/// Joins prompts to blended records by id and emits the instruction-tuning
/// file: one {id, task, prompt_text, target_text} object per line, in blend
/// order. Byte-stable for identical inputs regardless of prompt order.
inline std::string export_training_file(const BlendedCorpus& blended,
                                        const std::vector<Prompt>& prompts) {
    std::map<std::string, const Prompt*> by_id;
    for (const auto& prompt : prompts) {
        if (!by_id.emplace(prompt.record_id, &prompt).second)
            throw AlignmentError("duplicate prompt for id " + prompt.record_id);
    }
    if (by_id.size() != blended.records.size())
        throw AlignmentError("prompt count " + std::to_string(by_id.size()) +
                             " does not match blended size " +
                             std::to_string(blended.records.size()));
    std::string out;
    for (const auto& record : blended.records) {
        auto it = by_id.find(record.id);
        if (it == by_id.end()) throw AlignmentError("no prompt for record id " + record.id);
        nlohmann::json obj{{"id", record.id},
                           {"task", std::string(task_name(record.task))},
                           {"prompt_text", it->second->rendered_text},
                           {"target_text", serialize_gold(record.gold)}};
        out += obj.dump();
        out += '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------
// Convenience re-splitter (never applied to pre-split corpora)

struct SplitSizes {
    std::size_t train = 8, dev = 1, test = 1;  // ratio parts
};

inline std::array<Corpus, 3> split_corpus(const Corpus& corpus, SplitSizes ratio,
                                          std::uint64_t seed) {
    const std::size_t total_parts = ratio.train + ratio.dev + ratio.test;
    if (total_parts == 0) throw ConfigError("split ratio parts sum to zero");
    std::vector<Record> shuffled = corpus.records;
    detail::deterministic_shuffle(shuffled, seed);
    const std::size_t n = shuffled.size();
    std::size_t n_train = n * ratio.train / total_parts;
    std::size_t n_dev = n * ratio.dev / total_parts;
    std::array<Corpus, 3> out{Corpus{corpus.task, "train", {}}, Corpus{corpus.task, "dev", {}},
                              Corpus{corpus.task, "test", {}}};
    for (std::size_t i = 0; i < n; ++i) {
        if (i < n_train)
            out[0].records.push_back(shuffled[i]);
        else if (i < n_train + n_dev)
            out[1].records.push_back(shuffled[i]);
        else
            out[2].records.push_back(shuffled[i]);
    }
    return out;
}

}  // namespace ramie
