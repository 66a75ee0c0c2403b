#pragma once

// Deterministic synthetic desk-scale corpora shaped like the real datasets
// (four tasks, 8:1:1 splits, closed label sets). Used by tests and as a
// runnable demo; regenerate with `ramie fixtures`.

#include <random>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ramie/core.hpp"
#include "ramie/dataset.hpp"
#include "ramie/detail/hash.hpp"
#include "ramie/detail/rng.hpp"
#include "ramie/prompting.hpp"

namespace ramie {

struct FixtureSpec {
    std::size_t train_per_task = 48;
    std::size_t dev_per_task = 6;
    std::size_t test_per_task = 6;
    std::uint64_t seed = 17;
};

namespace fixtures_detail {

inline const std::vector<std::string>& supplement_names() {
    static const std::vector<std::string> names = {
        "folic acid", "milk thistle", "ginger",    "chamomile", "garlic",
        "black cohosh", "ginkgo",     "lavender",  "melatonin", "cranberry",
        "ginseng",    "glucosamine",  "dandelion", "saw palmetto", "green tea"};
    return names;
}

inline const std::vector<std::string>& adverse_events() {
    static const std::vector<std::string> events = {
        "nausea",    "dizziness", "rash",     "headache",     "bleeding",
        "constipation", "insomnia", "anxiety", "vomiting",    "fatigue",
        "itching",   "dry mouth", "palpitations", "drowsiness", "night sweats"};
    return events;
}

inline const std::vector<std::string>& dose_tokens() {
    static const std::vector<std::string> doses = {"400mg", "500 units", "2 tabs", "one capsule"};
    return doses;
}

template <typename T>
const T& pick(std::mt19937_64& rng, const std::vector<T>& pool) {
    return pool[static_cast<std::size_t>(detail::uniform_below(rng, pool.size()))];
}

// Supplement surface form; sometimes extended ("ginseng tea"), type unchanged.
inline std::string ds_surface(std::mt19937_64& rng, const std::string& name) {
    switch (detail::uniform_below(rng, 4)) {
        case 0: return name + " tea";
        case 1: return name + " extract";
        default: return name;
    }
}

struct TaskGenerator {
    std::mt19937_64 rng;
    std::set<std::string> used_sentences;
    std::size_t tweak_counter = 0;

    explicit TaskGenerator(std::uint64_t seed) : rng(seed) {}

    std::string unique(std::string sentence) {
        while (!used_sentences.insert(sentence).second)
            sentence += " on day " + std::to_string(++tweak_counter);
        return sentence;
    }
};

inline Record make_ner(TaskGenerator& gen, const std::string& id) {
    auto& rng = gen.rng;
    Record record;
    record.id = id;
    record.task = TaskKind::NER;
    NerMentions mentions;
    std::string text;
    switch (detail::uniform_below(rng, 8)) {
        case 0: {  // no entities at all
            text = "denies any supplement use at this time";
            break;
        }
        case 1:
        case 2: {
            const std::string& ds = pick(rng, supplement_names());
            const std::string surface = ds_surface(rng, ds);
            const std::string& ae = pick(rng, adverse_events());
            text = "patient reports taking " + surface + " daily and noted " + ae +
                   " since last visit";
            mentions.push_back(make_mention(surface, parse_entity_type(ds)));
            mentions.push_back(make_mention(ae, EntityType::Event));
            break;
        }
        case 3:
        case 4: {
            const std::string& ds1 = pick(rng, supplement_names());
            const std::string& ds2 = pick(rng, supplement_names());
            text = ds1 + " and " + ds2 + " listed on the med rec with no issues";
            mentions.push_back(make_mention(ds1, parse_entity_type(ds1)));
            mentions.push_back(make_mention(ds2, parse_entity_type(ds2)));
            break;
        }
        case 5: {
            const std::string& ds = pick(rng, supplement_names());
            const std::string surface = ds_surface(rng, ds);
            const std::string& ae1 = pick(rng, adverse_events());
            const std::string& ae2 = pick(rng, adverse_events());
            text = "started " + surface + " for sleep but developed " + ae1 + " and " + ae2;
            mentions.push_back(make_mention(surface, parse_entity_type(ds)));
            mentions.push_back(make_mention(ae1, EntityType::Event));
            mentions.push_back(make_mention(ae2, EntityType::Event));
            break;
        }
        default: {
            const std::string& ds = pick(rng, supplement_names());
            const std::string& ae = pick(rng, adverse_events());
            text = "pt takes " + ds + " for energy and reports " + ae + " after doses";
            mentions.push_back(make_mention(ds, parse_entity_type(ds)));
            mentions.push_back(make_mention(ae, EntityType::Event));
            break;
        }
    }
    record.text = gen.unique(text);
    record.gold = std::move(mentions);
    return record;
}

inline Record make_re(TaskGenerator& gen, const std::string& id) {
    auto& rng = gen.rng;
    Record record;
    record.id = id;
    record.task = TaskKind::RE;
    const std::string head = pick(rng, supplement_names());
    const std::string tail = pick(rng, adverse_events());
    std::string text;
    RelationType relation;
    switch (detail::uniform_below(rng, 3)) {
        case 0:
            relation = RelationType::Positive;
            text = head + " has been used for " + tail + " with some relief noted";
            break;
        case 1:
            relation = RelationType::Negative;
            text = "she tried " + head + " but it worsened the " + tail;
            break;
        default:
            relation = RelationType::NotRelated;
            text = "takes " + head + " daily while the " + tail + " is attributed to an old injury";
            break;
    }
    record.text = gen.unique(text);
    record.re_head = head;
    record.re_tail = tail;
    record.gold = relation;
    return record;
}

inline Record make_te(TaskGenerator& gen, const std::string& id) {
    auto& rng = gen.rng;
    Record record;
    record.id = id;
    record.task = TaskKind::TE;
    TeTriples triples;
    std::string text;
    if (detail::uniform_below(rng, 10) == 0) {
        text = "no supplement concerns documented today";
    } else {
        const std::size_t n = 1 + detail::uniform_below(rng, 3);
        for (std::size_t i = 0; i < n; ++i) {
            const std::string& ds = pick(rng, supplement_names());
            const std::string head = ds_surface(rng, ds);
            const std::string& tail = pick(rng, adverse_events());
            std::string clause;
            RelationType relation;
            switch (detail::uniform_below(rng, 3)) {
                case 0:
                    relation = RelationType::Positive;
                    clause = head + " seems to improve the " + tail;
                    break;
                case 1:
                    relation = RelationType::Negative;
                    clause = "developed " + tail + " after increasing " + head;
                    break;
                default:
                    relation = RelationType::NotRelated;
                    clause = head + " on the med list while " + tail + " relates to prior surgery";
                    break;
            }
            triples.push_back(make_triple(head, relation, tail));
            text += (i == 0 ? "" : " and ") + clause;
        }
    }
    record.text = gen.unique(text);
    record.gold = std::move(triples);
    return record;
}

inline Record make_uc(TaskGenerator& gen, const std::string& id) {
    auto& rng = gen.rng;
    Record record;
    record.id = id;
    record.task = TaskKind::UC;
    const std::string& ds = pick(rng, supplement_names());
    std::string text;
    UsageStatus status;
    switch (detail::uniform_below(rng, 4)) {
        case 0:
            status = UsageStatus::Continue;
            text = "continue " + ds + " " + pick(rng, dose_tokens()) + " daily";
            break;
        case 1:
            status = UsageStatus::Discontinue;
            text = "note stop " + ds + " today due to side effects";
            break;
        case 2:
            status = UsageStatus::Uncertain;
            text = "suggest taking " + ds + " " + pick(rng, dose_tokens()) + " as needed";
            break;
        default:
            status = UsageStatus::Start;
            text = "start " + ds + " tonight " + pick(rng, dose_tokens());
            break;
    }
    record.text = gen.unique(text);
    record.gold = status;
    return record;
}

inline Record make_record(TaskGenerator& gen, TaskKind task, const std::string& id) {
    switch (task) {
        case TaskKind::NER: return make_ner(gen, id);
        case TaskKind::RE: return make_re(gen, id);
        case TaskKind::TE: return make_te(gen, id);
        case TaskKind::UC: return make_uc(gen, id);
    }
    throw Error("unreachable");
}

}  // namespace fixtures_detail

/// Generates the three splits of one task. Train contains a few deliberate
/// duplicate-sentence pairs (distinct ids) so self-exclusion is exercised.
inline std::array<Corpus, 3> generate_fixture_corpora(TaskKind task, const FixtureSpec& spec) {
    using namespace fixtures_detail;
    TaskGenerator gen(spec.seed ^ detail::fnv1a64(task_name(task)));
    std::string prefix(task_name(task));
    for (char& ch : prefix) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));

    auto make_split = [&](const std::string& split, std::size_t count) {
        Corpus corpus{task, split, {}};
        for (std::size_t i = 0; i < count; ++i) {
            char id[64];
            std::snprintf(id, sizeof id, "%s-%s-%03zu", prefix.c_str(), split.c_str(), i + 1);
            corpus.records.push_back(make_record(gen, task, id));
        }
        return corpus;
    };

    std::array<Corpus, 3> splits = {make_split("train", spec.train_per_task),
                                    make_split("dev", spec.dev_per_task),
                                    make_split("test", spec.test_per_task)};

    // Duplicate three train sentences under fresh ids (same text and gold).
    auto& train = splits[0].records;
    const std::size_t n_dup = std::min<std::size_t>(3, train.size());
    for (std::size_t i = 0; i < n_dup; ++i) {
        Record copy = train[i];
        char id[64];
        std::snprintf(id, sizeof id, "%s-train-dup-%03zu", prefix.c_str(), i + 1);
        copy.id = id;
        train.push_back(std::move(copy));
    }
    return splits;
}

inline std::string fixture_corpus_filename(TaskKind task, const std::string& split) {
    std::string prefix(task_name(task));
    for (char& ch : prefix) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return prefix + "_" + split + ".jsonl";
}

/// Writes corpora, templates and a ready-to-run config under `dir`.
inline void write_fixtures(const std::string& dir, const FixtureSpec& spec = {}) {
    nlohmann::json corpora;
    for (TaskKind task : kAllTasks) {
        const auto splits = generate_fixture_corpora(task, spec);
        nlohmann::json entry;
        for (const auto& corpus : splits) {
            const std::string filename = fixture_corpus_filename(task, corpus.split);
            save_corpus(corpus, dir + "/" + filename);
            entry[corpus.split] = filename;
        }
        corpora[std::string(task_name(task))] = std::move(entry);
    }
    write_default_templates(dir + "/templates");

    nlohmann::json config{
        {"corpora", std::move(corpora)},
        {"embedder", {{"kind", "hashed-lexical"}, {"dim", 2048}}},
        {"retrieval", {{"k", 1}, {"baseline", "similarity"}, {"re_include_question", true}}},
        {"templates", "templates"},
        {"endpoint", {{"base_url", "mock://oracle"}, {"model", "oracle"}}},
        {"eval_split", "test"},
        {"out_dir", "out"},
        {"seed", spec.seed}};
    detail::write_file(dir + "/config.json", config.dump(2) + "\n");
}

}  // namespace ramie
