#pragma once

// Config-driven pipeline: each stage consumes the previous stage's file
// artifact, writes exactly one artifact plus a manifest line, and re-running
// an unchanged stage is a verified no-op (hash match).

#include <array>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ramie/core.hpp"
#include "ramie/dataset.hpp"
#include "ramie/detail/hash.hpp"
#include "ramie/embedding.hpp"
#include "ramie/evaluation.hpp"
#include "ramie/generation.hpp"
#include "ramie/parsing.hpp"
#include "ramie/prompting.hpp"
#include "ramie/retrieval.hpp"

namespace ramie {

// ---------------------------------------------------------------------------
// Configuration

struct PipelineConfig {
    std::array<std::array<std::string, 3>, 4> corpus_paths;  // [task][train,dev,test]
    EmbedderSpec embedder;
    std::size_t retrieval_k = 1;
    enum class ExampleSource { Similarity, Random, None } example_source =
        ExampleSource::Similarity;
    bool re_include_question = true;
    std::string template_dir;  // empty: built-in templates
    ModelEndpointSpec endpoint;
    std::string eval_split = "test";  // "test" (full-set retrieval) or "train" (self-excluding)
    std::string baseline_report;      // optional report.json to compare against
    std::string out_dir;
    std::uint64_t seed = 0;
    ParserOptions parser;
    std::string config_hash;
};

inline const std::array<std::string, 3> kSplitNames = {"train", "dev", "test"};

namespace detail {

inline std::string resolve_path(const std::filesystem::path& base, const std::string& path) {
    if (path.empty()) return path;
    std::filesystem::path p(path);
    if (p.is_absolute()) return p.string();
    return (base / p).lexically_normal().string();
}

}  // namespace detail

inline PipelineConfig parse_config(const nlohmann::json& obj,
                                   const std::filesystem::path& base_dir) {
    PipelineConfig config;
    const auto& corpora = obj.at("corpora");
    for (TaskKind task : kAllTasks) {
        const auto& entry = corpora.at(std::string(task_name(task)));
        for (std::size_t s = 0; s < 3; ++s)
            config.corpus_paths[static_cast<std::size_t>(task)][s] =
                detail::resolve_path(base_dir, entry.at(kSplitNames[s]).get<std::string>());
    }
    if (obj.contains("embedder")) config.embedder = embedder_spec_from_json(obj.at("embedder"));

    if (obj.contains("retrieval")) {
        const auto& retrieval = obj.at("retrieval");
        config.retrieval_k = retrieval.value("k", static_cast<std::size_t>(1));
        const std::string source = retrieval.value("baseline", "similarity");
        if (source == "similarity")
            config.example_source = PipelineConfig::ExampleSource::Similarity;
        else if (source == "random")
            config.example_source = PipelineConfig::ExampleSource::Random;
        else if (source == "none")
            config.example_source = PipelineConfig::ExampleSource::None;
        else
            throw ConfigError("retrieval.baseline must be similarity|random|none, got " + source);
        config.re_include_question = retrieval.value("re_include_question", true);
    }
    if (config.retrieval_k == 0) throw ConfigError("retrieval.k must be positive");

    config.template_dir = detail::resolve_path(base_dir, obj.value("templates", ""));

    if (obj.contains("endpoint")) {
        const auto& endpoint = obj.at("endpoint");
        config.endpoint.base_url = endpoint.value("base_url", "mock://oracle");
        config.endpoint.model = endpoint.value("model", "");
        config.endpoint.temperature = endpoint.value("temperature", 0.0);
        config.endpoint.max_tokens = endpoint.value("max_tokens", 512);
        config.endpoint.timeout_ms = endpoint.value("timeout_ms", 30000);
        config.endpoint.retries = endpoint.value("retries", 2);
        config.endpoint.api_key_env = endpoint.value("api_key_env", "");
        config.endpoint.max_in_flight = endpoint.value("max_in_flight", 4);
    } else {
        config.endpoint.base_url = "mock://oracle";
    }

    config.eval_split = obj.value("eval_split", "test");
    if (config.eval_split != "test" && config.eval_split != "train")
        throw ConfigError("eval_split must be test or train, got " + config.eval_split);
    config.baseline_report = detail::resolve_path(base_dir, obj.value("baseline_report", ""));
    config.out_dir = detail::resolve_path(base_dir, obj.value("out_dir", "out"));
    config.seed = obj.value("seed", 0ull);

    if (obj.contains("parser")) {
        const std::string leniency = obj.at("parser").value("leniency", "full");
        if (leniency == "strict")
            config.parser.leniency = Leniency::Strict;
        else if (leniency == "quotes")
            config.parser.leniency = Leniency::Quotes;
        else if (leniency == "full")
            config.parser.leniency = Leniency::Full;
        else
            throw ConfigError("parser.leniency must be strict|quotes|full");
        config.parser.last_expression = obj.at("parser").value("last_expression", true);
    }

    config.config_hash = detail::content_hash(obj.dump());
    return config;
}

inline PipelineConfig load_config(const std::string& path) {
    nlohmann::json obj;
    try {
        obj = nlohmann::json::parse(detail::read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config " + path + ": " + e.what());
    }
    return parse_config(obj, std::filesystem::path(path).parent_path());
}

/// All referenced paths are validated before any stage runs.
inline void validate_config_paths(const PipelineConfig& config) {
    for (TaskKind task : kAllTasks)
        for (std::size_t s = 0; s < 3; ++s) {
            const auto& path = config.corpus_paths[static_cast<std::size_t>(task)][s];
            if (!std::filesystem::exists(path))
                throw ConfigError("missing corpus file: " + path);
        }
    if (!config.template_dir.empty() && !std::filesystem::is_directory(config.template_dir))
        throw ConfigError("missing template directory: " + config.template_dir);
    if (!config.baseline_report.empty() && !std::filesystem::exists(config.baseline_report))
        throw ConfigError("missing baseline report: " + config.baseline_report);
}

// ---------------------------------------------------------------------------
// Manifest

struct ManifestEntry {
    std::string stage;
    std::string artifact;  // file name relative to out_dir
    std::string content_hash;
    std::string inputs_hash;
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string timestamp;
};

class Manifest {
public:
    explicit Manifest(std::string out_dir) : out_dir_(std::move(out_dir)) {
        const std::string path = manifest_path();
        if (std::filesystem::exists(path)) {
            for (const auto& line : detail::read_lines(path)) {
                if (line.empty()) continue;
                const auto obj = nlohmann::json::parse(line);
                ManifestEntry entry;
                entry.stage = obj.at("stage").get<std::string>();
                entry.artifact = obj.at("artifact").get<std::string>();
                entry.content_hash = obj.at("content_hash").get<std::string>();
                entry.inputs_hash = obj.at("inputs_hash").get<std::string>();
                entry.config_hash = obj.at("config_hash").get<std::string>();
                entry.seed = obj.value("seed", 0ull);
                entry.timestamp = obj.value("timestamp", "");
                entries_.push_back(std::move(entry));
            }
        }
    }

    std::string manifest_path() const { return out_dir_ + "/manifest.jsonl"; }

    const ManifestEntry* last(const std::string& stage) const {
        for (auto it = entries_.rbegin(); it != entries_.rend(); ++it)
            if (it->stage == stage) return &*it;
        return nullptr;
    }

    /// True when the last run of this stage used the same inputs and config
    /// and its artifact is still bit-identical on disk.
    bool up_to_date(const std::string& stage, const std::string& inputs_hash,
                    const std::string& config_hash) const {
        const ManifestEntry* entry = last(stage);
        if (!entry) return false;
        if (entry->inputs_hash != inputs_hash || entry->config_hash != config_hash) return false;
        const std::string artifact = out_dir_ + "/" + entry->artifact;
        if (!std::filesystem::exists(artifact)) return false;
        return detail::file_hash(artifact) == entry->content_hash;
    }

    void record(const std::string& stage, const std::string& artifact,
                const std::string& inputs_hash, const std::string& config_hash,
                std::uint64_t seed) {
        ManifestEntry entry;
        entry.stage = stage;
        entry.artifact = artifact;
        entry.content_hash = detail::file_hash(out_dir_ + "/" + artifact);
        entry.inputs_hash = inputs_hash;
        entry.config_hash = config_hash;
        entry.seed = seed;
        std::time_t now = std::time(nullptr);
        char stamp[32];
        std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
        entry.timestamp = stamp;

        nlohmann::json obj{{"stage", entry.stage},
                           {"artifact", entry.artifact},
                           {"content_hash", entry.content_hash},
                           {"inputs_hash", entry.inputs_hash},
                           {"config_hash", entry.config_hash},
                           {"seed", entry.seed},
                           {"timestamp", entry.timestamp}};
        std::filesystem::create_directories(out_dir_);
        std::ofstream out(manifest_path(), std::ios::app);
        if (!out) throw IoError("cannot append to manifest: " + manifest_path());
        out << obj.dump() << '\n';
        entries_.push_back(std::move(entry));
    }

    const std::vector<ManifestEntry>& entries() const { return entries_; }

private:
    std::string out_dir_;
    std::vector<ManifestEntry> entries_;
};

namespace detail {

inline std::string combined_hash(const std::vector<std::string>& parts) {
    std::string joined;
    for (const auto& part : parts) {
        joined += part;
        joined += '\n';
    }
    return content_hash(joined);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Stage helpers

inline std::string artifact_path(const PipelineConfig& config, const std::string& name) {
    return config.out_dir + "/" + name;
}

inline std::array<PromptTemplate, 4> pipeline_templates(const PipelineConfig& config) {
    if (config.template_dir.empty()) return default_templates();
    return load_templates(config.template_dir);
}

/// Gold corpora for the configured eval split, one per task in task order.
/// For eval_split=train the gold is the blended training set itself (ids are
/// task-prefixed), grouped per task in blend order.
inline std::array<Corpus, 4> load_eval_gold(const PipelineConfig& config) {
    std::array<Corpus, 4> gold;
    if (config.eval_split == "test") {
        for (TaskKind task : kAllTasks)
            gold[static_cast<std::size_t>(task)] =
                load_corpus(config.corpus_paths[static_cast<std::size_t>(task)][2], task, "test");
    } else {
        const BlendedCorpus blended = load_blended(artifact_path(config, "blended.jsonl"));
        for (TaskKind task : kAllTasks)
            gold[static_cast<std::size_t>(task)] = Corpus{task, "train", {}};
        for (const auto& record : blended.records)
            gold[static_cast<std::size_t>(record.task)].records.push_back(record);
    }
    return gold;
}

/// Query records for the prompts stage, in deterministic order.
inline std::vector<Record> load_eval_queries(const PipelineConfig& config) {
    std::vector<Record> queries;
    if (config.eval_split == "test") {
        for (TaskKind task : kAllTasks) {
            Corpus corpus =
                load_corpus(config.corpus_paths[static_cast<std::size_t>(task)][2], task, "test");
            for (auto& record : corpus.records) queries.push_back(std::move(record));
        }
    } else {
        BlendedCorpus blended = load_blended(artifact_path(config, "blended.jsonl"));
        queries = std::move(blended.records);
    }
    return queries;
}

// ---------------------------------------------------------------------------
// Stages

struct StageOutcome {
    std::string stage;
    std::string artifact;
    bool skipped = false;
};

inline StageOutcome stage_blend(const PipelineConfig& config, Manifest& manifest) {
    std::vector<std::string> input_hashes;
    for (TaskKind task : kAllTasks)
        input_hashes.push_back(
            detail::file_hash(config.corpus_paths[static_cast<std::size_t>(task)][0]));
    const std::string inputs_hash = detail::combined_hash(input_hashes);
    if (manifest.up_to_date("blend", inputs_hash, config.config_hash))
        return {"blend", "blended.jsonl", true};

    std::vector<Corpus> trains;
    for (TaskKind task : kAllTasks)
        trains.push_back(
            load_corpus(config.corpus_paths[static_cast<std::size_t>(task)][0], task, "train"));
    const BlendedCorpus blended = blend(trains, config.seed);
    save_blended(blended, artifact_path(config, "blended.jsonl"));
    manifest.record("blend", "blended.jsonl", inputs_hash, config.config_hash, config.seed);
    return {"blend", "blended.jsonl", false};
}

inline StageOutcome stage_index(const PipelineConfig& config, Manifest& manifest) {
    const std::string blended_path = artifact_path(config, "blended.jsonl");
    if (!std::filesystem::exists(blended_path))
        throw Error("index stage requires blended.jsonl; run the blend stage first");
    const std::string corpus_hash = detail::file_hash(blended_path);
    const std::string inputs_hash = detail::combined_hash({corpus_hash});
    if (manifest.up_to_date("index", inputs_hash, config.config_hash))
        return {"index", "index.json", true};

    const BlendedCorpus blended = load_blended(blended_path);
    const ExampleIndex index =
        build_index(blended.records, config.embedder, corpus_hash, config.re_include_question);
    save_index(index, artifact_path(config, "index.json"));
    manifest.record("index", "index.json", inputs_hash, config.config_hash, config.seed);
    return {"index", "index.json", false};
}

inline StageOutcome stage_prompts(const PipelineConfig& config, Manifest& manifest) {
    const std::string index_path = artifact_path(config, "index.json");
    const bool needs_index = config.example_source != PipelineConfig::ExampleSource::None;
    if (needs_index && !std::filesystem::exists(index_path))
        throw Error("prompts stage requires index.json; run the index stage first");

    std::vector<std::string> input_hashes;
    if (needs_index) input_hashes.push_back(detail::file_hash(index_path));
    if (config.eval_split == "test") {
        for (TaskKind task : kAllTasks)
            input_hashes.push_back(
                detail::file_hash(config.corpus_paths[static_cast<std::size_t>(task)][2]));
    } else {
        input_hashes.push_back(detail::file_hash(artifact_path(config, "blended.jsonl")));
    }
    const auto templates = pipeline_templates(config);
    for (const auto& tmpl : templates)
        input_hashes.push_back(detail::content_hash(tmpl.instruction_text));
    const std::string inputs_hash = detail::combined_hash(input_hashes);
    if (manifest.up_to_date("prompts", inputs_hash, config.config_hash))
        return {"prompts", "prompts.jsonl", true};

    std::optional<ExampleIndex> index;
    std::map<std::string, const Record*> index_records;
    BlendedCorpus blended;
    if (needs_index) {
        const std::string blended_path = artifact_path(config, "blended.jsonl");
        index = load_index(index_path, std::filesystem::exists(blended_path)
                                           ? detail::file_hash(blended_path)
                                           : "");
        blended = load_blended(blended_path);
        for (const auto& record : blended.records) index_records[record.id] = &record;
    }

    RetrievalMode mode;
    mode.phase = config.eval_split == "train" ? RetrievalMode::Phase::Train
                                              : RetrievalMode::Phase::Test;
    mode.k = config.retrieval_k;
    mode.baseline = config.example_source == PipelineConfig::ExampleSource::Random
                        ? RetrievalMode::Baseline::Random
                        : RetrievalMode::Baseline::Similarity;
    mode.seed = config.seed;
    mode.re_include_question = config.re_include_question;

    std::string out;
    for (const Record& query : load_eval_queries(config)) {
        const Record* example = nullptr;
        if (needs_index) {
            const auto hits = retrieve(*index, query, mode);
            example = index_records.at(hits.front().record_id);
        }
        const Prompt prompt =
            build_prompt(templates[static_cast<std::size_t>(query.task)], example, query);
        nlohmann::json line{{"id", prompt.record_id},
                            {"task", std::string(task_name(prompt.task))},
                            {"example_id", prompt.example_id ? nlohmann::json(*prompt.example_id)
                                                             : nlohmann::json(nullptr)},
                            {"prompt", prompt.rendered_text}};
        out += line.dump();
        out += '\n';
    }
    detail::write_file(artifact_path(config, "prompts.jsonl"), out);
    manifest.record("prompts", "prompts.jsonl", inputs_hash, config.config_hash, config.seed);
    return {"prompts", "prompts.jsonl", false};
}

inline std::vector<Prompt> load_prompts(const std::string& path) {
    std::vector<Prompt> prompts;
    std::size_t line_no = 0;
    for (const auto& line : detail::read_lines(path)) {
        ++line_no;
        if (line.empty()) continue;
        const auto obj = nlohmann::json::parse(line);
        Prompt prompt;
        prompt.record_id = obj.at("id").get<std::string>();
        prompt.task = parse_task(obj.at("task").get<std::string>());
        prompt.rendered_text = obj.at("prompt").get<std::string>();
        if (obj.contains("example_id") && !obj.at("example_id").is_null())
            prompt.example_id = obj.at("example_id").get<std::string>();
        prompts.push_back(std::move(prompt));
    }
    return prompts;
}

inline StageOutcome stage_generate(const PipelineConfig& config, Manifest& manifest) {
    const std::string prompts_path = artifact_path(config, "prompts.jsonl");
    if (!std::filesystem::exists(prompts_path))
        throw Error("generate stage requires prompts.jsonl; run the prompts stage first");
    const std::string inputs_hash =
        detail::combined_hash({detail::file_hash(prompts_path)});
    if (manifest.up_to_date("generate", inputs_hash, config.config_hash))
        return {"generate", "generations.jsonl", true};

    const std::vector<Prompt> prompts = load_prompts(prompts_path);
    std::map<std::string, GoldOutput> oracle_gold;
    if (config.endpoint.base_url == "mock://oracle") {
        for (const auto& corpus : load_eval_gold(config))
            for (const auto& record : corpus.records) oracle_gold.emplace(record.id, record.gold);
    }
    const auto generations = generate(config.endpoint, prompts,
                                      oracle_gold.empty() ? nullptr : &oracle_gold);
    std::string out;
    for (const auto& rec : generations) {
        out += generation_to_json(rec).dump();
        out += '\n';
    }
    detail::write_file(artifact_path(config, "generations.jsonl"), out);
    manifest.record("generate", "generations.jsonl", inputs_hash, config.config_hash,
                    config.seed);
    return {"generate", "generations.jsonl", false};
}

inline StageOutcome stage_parse(const PipelineConfig& config, Manifest& manifest) {
    const std::string generations_path = artifact_path(config, "generations.jsonl");
    if (!std::filesystem::exists(generations_path))
        throw Error("parse stage requires generations.jsonl; run the generate stage first");
    const std::string inputs_hash =
        detail::combined_hash({detail::file_hash(generations_path)});
    if (manifest.up_to_date("parse", inputs_hash, config.config_hash))
        return {"parse", "predictions.jsonl", true};

    std::string out;
    for (const auto& line : detail::read_lines(generations_path)) {
        if (line.empty()) continue;
        const GenerationRecord rec = generation_from_json(nlohmann::json::parse(line));
        const Prediction pred =
            parse_generation(rec.task, rec.raw_generation, config.parser, rec.record_id);
        nlohmann::json obj{{"id", pred.record_id},
                           {"task", std::string(task_name(pred.task))},
                           {"value", pred.value ? gold_to_json(*pred.value)
                                                : nlohmann::json(nullptr)},
                           {"parse_status", std::string(parse_status_name(pred.status))}};
        if (!pred.reason.empty()) obj["leniency_reason"] = pred.reason;
        out += obj.dump();
        out += '\n';
    }
    detail::write_file(artifact_path(config, "predictions.jsonl"), out);
    manifest.record("parse", "predictions.jsonl", inputs_hash, config.config_hash, config.seed);
    return {"parse", "predictions.jsonl", false};
}

inline std::vector<Prediction> load_predictions(const std::string& path) {
    std::vector<Prediction> predictions;
    for (const auto& line : detail::read_lines(path)) {
        if (line.empty()) continue;
        const auto obj = nlohmann::json::parse(line);
        Prediction pred;
        pred.record_id = obj.at("id").get<std::string>();
        pred.task = parse_task(obj.at("task").get<std::string>());
        pred.status = parse_status_from_name(obj.at("parse_status").get<std::string>());
        if (pred.status != ParseStatus::Malformed)
            pred.value = gold_from_json(pred.task, obj.at("value"), 0);
        pred.reason = obj.value("leniency_reason", "");
        predictions.push_back(std::move(pred));
    }
    return predictions;
}

inline StageOutcome stage_score(const PipelineConfig& config, Manifest& manifest) {
    const std::string predictions_path = artifact_path(config, "predictions.jsonl");
    if (!std::filesystem::exists(predictions_path))
        throw Error("score stage requires predictions.jsonl; run the parse stage first");

    std::vector<std::string> input_hashes{detail::file_hash(predictions_path)};
    if (config.eval_split == "test") {
        for (TaskKind task : kAllTasks)
            input_hashes.push_back(
                detail::file_hash(config.corpus_paths[static_cast<std::size_t>(task)][2]));
    } else {
        input_hashes.push_back(detail::file_hash(artifact_path(config, "blended.jsonl")));
    }
    const std::string inputs_hash = detail::combined_hash(input_hashes);
    if (manifest.up_to_date("score", inputs_hash, config.config_hash))
        return {"score", "metrics.json", true};

    const auto gold = load_eval_gold(config);
    const auto predictions = load_predictions(predictions_path);
    std::array<std::vector<Prediction>, 4> by_task;
    for (const auto& pred : predictions)
        by_task[static_cast<std::size_t>(pred.task)].push_back(pred);

    nlohmann::json tasks = nlohmann::json::array();
    for (TaskKind task : kAllTasks) {
        const auto idx = static_cast<std::size_t>(task);
        const TaskMetrics metrics = score_task(gold[idx], by_task[idx]);
        const ErrorBreakdown errors = classify_errors(gold[idx], by_task[idx]);
        nlohmann::json entry = task_metrics_to_json(metrics);
        entry["errors"] = {{"redundant", errors.redundant},
                           {"omission", errors.omission},
                           {"incorrect", errors.incorrect},
                           {"malformed", errors.malformed}};
        nlohmann::json tags = nlohmann::json::object();
        for (const auto& [id, record_tags] : errors.record_tags) tags[id] = record_tags;
        entry["error_tags"] = std::move(tags);
        tasks.push_back(std::move(entry));
    }
    detail::write_file(artifact_path(config, "metrics.json"),
                       nlohmann::json{{"tasks", std::move(tasks)}}.dump(2) + "\n");
    manifest.record("score", "metrics.json", inputs_hash, config.config_hash, config.seed);
    return {"score", "metrics.json", false};
}

inline StageOutcome stage_report(const PipelineConfig& config, Manifest& manifest) {
    const std::string metrics_path = artifact_path(config, "metrics.json");
    if (!std::filesystem::exists(metrics_path))
        throw Error("report stage requires metrics.json; run the score stage first");
    std::vector<std::string> input_hashes{detail::file_hash(metrics_path)};
    if (!config.baseline_report.empty())
        input_hashes.push_back(detail::file_hash(config.baseline_report));
    const std::string inputs_hash = detail::combined_hash(input_hashes);
    if (manifest.up_to_date("report", inputs_hash, config.config_hash))
        return {"report", "report.json", true};

    const auto metrics_doc = nlohmann::json::parse(detail::read_file(metrics_path));
    std::vector<TaskMetrics> metrics;
    for (const auto& entry : metrics_doc.at("tasks"))
        metrics.push_back(task_metrics_from_json(entry));

    std::optional<RunReport> baseline;
    if (!config.baseline_report.empty())
        baseline = report_from_json(nlohmann::json::parse(detail::read_file(config.baseline_report)));

    const RunReport report = aggregate_report(metrics, baseline ? &*baseline : nullptr);
    detail::write_file(artifact_path(config, "report.json"), report_to_json(report).dump(2) + "\n");
    std::cout << render_report_table(report);
    manifest.record("report", "report.json", inputs_hash, config.config_hash, config.seed);
    return {"report", "report.json", false};
}

// ---------------------------------------------------------------------------
// Orchestration

inline const std::vector<std::string> kAllStages = {"blend",    "index", "prompts", "generate",
                                                    "parse",    "score", "report"};

inline std::vector<StageOutcome> run_stages(const PipelineConfig& config,
                                            const std::vector<std::string>& stages) {
    validate_config_paths(config);
    std::filesystem::create_directories(config.out_dir);
    Manifest manifest(config.out_dir);
    std::vector<StageOutcome> outcomes;
    for (const auto& stage : stages) {
        StageOutcome outcome;
        if (stage == "blend")
            outcome = stage_blend(config, manifest);
        else if (stage == "index")
            outcome = stage_index(config, manifest);
        else if (stage == "prompts")
            outcome = stage_prompts(config, manifest);
        else if (stage == "generate")
            outcome = stage_generate(config, manifest);
        else if (stage == "parse")
            outcome = stage_parse(config, manifest);
        else if (stage == "score")
            outcome = stage_score(config, manifest);
        else if (stage == "report")
            outcome = stage_report(config, manifest);
        else
            throw ConfigError("unknown stage: " + stage);
        std::cerr << "stage " << outcome.stage << ": "
                  << (outcome.skipped ? "up-to-date" : outcome.artifact) << "\n";
        outcomes.push_back(std::move(outcome));
    }
    return outcomes;
}

/// validate subcommand: split reports for all four tasks.
inline std::vector<SplitReport> run_validate(const PipelineConfig& config) {
    validate_config_paths(config);
    std::vector<SplitReport> reports;
    for (TaskKind task : kAllTasks) {
        const auto idx = static_cast<std::size_t>(task);
        const Corpus train = load_corpus(config.corpus_paths[idx][0], task, "train");
        const Corpus dev = load_corpus(config.corpus_paths[idx][1], task, "dev");
        const Corpus test = load_corpus(config.corpus_paths[idx][2], task, "test");
        reports.push_back(validate_splits(train, dev, test));
    }
    return reports;
}

// ---------------------------------------------------------------------------
// Training export (train-side prompts + instruction-tuning file + config)

inline std::vector<StageOutcome> run_export_train(const PipelineConfig& config) {
    validate_config_paths(config);
    std::filesystem::create_directories(config.out_dir);
    Manifest manifest(config.out_dir);
    std::vector<StageOutcome> outcomes;
    outcomes.push_back(stage_blend(config, manifest));
    outcomes.push_back(stage_index(config, manifest));

    const std::string blended_path = artifact_path(config, "blended.jsonl");
    const std::string index_path = artifact_path(config, "index.json");
    const std::string inputs_hash = detail::combined_hash(
        {detail::file_hash(blended_path), detail::file_hash(index_path)});

    if (!manifest.up_to_date("export_train", inputs_hash, config.config_hash)) {
        const BlendedCorpus blended = load_blended(blended_path);
        const ExampleIndex index = load_index(index_path, detail::file_hash(blended_path));
        std::map<std::string, const Record*> index_records;
        for (const auto& record : blended.records) index_records[record.id] = &record;
        const auto templates = pipeline_templates(config);

        RetrievalMode mode;
        mode.phase = RetrievalMode::Phase::Train;  // self-excluding
        mode.k = config.retrieval_k;
        mode.baseline = config.example_source == PipelineConfig::ExampleSource::Random
                            ? RetrievalMode::Baseline::Random
                            : RetrievalMode::Baseline::Similarity;
        mode.seed = config.seed;
        mode.re_include_question = config.re_include_question;

        std::vector<Prompt> prompts;
        prompts.reserve(blended.records.size());
        for (const Record& record : blended.records) {
            const Record* example = nullptr;
            if (config.example_source != PipelineConfig::ExampleSource::None) {
                const auto hits = retrieve(index, record, mode);
                example = index_records.at(hits.front().record_id);
            }
            prompts.push_back(
                build_prompt(templates[static_cast<std::size_t>(record.task)], example, record));
        }
        detail::write_file(artifact_path(config, "instruction_tuning.jsonl"),
                           export_training_file(blended, prompts));
        manifest.record("export_train", "instruction_tuning.jsonl", inputs_hash,
                        config.config_hash, config.seed);
        outcomes.push_back({"export_train", "instruction_tuning.jsonl", false});
    } else {
        outcomes.push_back({"export_train", "instruction_tuning.jsonl", true});
    }

    write_training_config(TrainingExportConfig{}, artifact_path(config, "training_config.txt"));
    manifest.record("train_config", "training_config.txt", "fnv1a:0", config.config_hash,
                    config.seed);
    outcomes.push_back({"train_config", "training_config.txt", false});
    return outcomes;
}

}  // namespace ramie
