#pragma once

// Task taxonomy, closed label vocabularies, text normalization and the
// structured gold/prediction value types shared by every other module.

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <variant>
#include <vector>

namespace ramie {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct IoError : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

/// Unknown label outside a closed vocabulary.
struct UnknownLabelError : Error {
    using Error::Error;
};

struct SchemaError : Error {
    std::size_t line = 0;
    std::string field;
    SchemaError(std::size_t line_, std::string field_, const std::string& msg)
        : Error("line " + std::to_string(line_) + ", field '" + field_ + "': " + msg),
          line(line_),
          field(std::move(field_)) {}
};

struct LabelError : Error {
    std::size_t line = 0;
    LabelError(std::size_t line_, const std::string& msg)
        : Error("line " + std::to_string(line_) + ": " + msg), line(line_) {}
};

struct TaskMismatchError : Error {
    using Error::Error;
};

struct AlignmentError : Error {
    using Error::Error;
};

enum class TaskKind : std::uint8_t { NER = 0, RE = 1, TE = 2, UC = 3 };

inline constexpr std::array<TaskKind, 4> kAllTasks = {TaskKind::NER, TaskKind::RE,
                                                      TaskKind::TE, TaskKind::UC};

inline std::string_view task_name(TaskKind task) {
    switch (task) {
        case TaskKind::NER: return "NER";
        case TaskKind::RE: return "RE";
        case TaskKind::TE: return "TE";
        case TaskKind::UC: return "UC";
    }
    return "?";
}

inline TaskKind parse_task(std::string_view name) {
    if (name == "NER" || name == "ner") return TaskKind::NER;
    if (name == "RE" || name == "re") return TaskKind::RE;
    if (name == "TE" || name == "te") return TaskKind::TE;
    if (name == "UC" || name == "uc") return TaskKind::UC;
    throw UnknownLabelError("unknown task: " + std::string(name));
}

// ---------------------------------------------------------------------------
// Text normalization

/// Lowercase, trim, and collapse internal whitespace runs to one space.
/// Total and idempotent; underscore handling belongs to label parsers only.
inline std::string normalize_text(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    bool pending_space = false;
    for (char ch : raw) {
        const unsigned char uc = static_cast<unsigned char>(ch);
        if (uc == ' ' || uc == '\t' || uc == '\n' || uc == '\r' || uc == '\f' || uc == '\v') {
            if (!out.empty()) pending_space = true;
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(uc >= 'A' && uc <= 'Z' ? static_cast<char>(uc - 'A' + 'a') : ch);
    }
    return out;
}

namespace detail {
// Label form: normalized text with underscores treated as spaces.
inline std::string normalize_label(std::string_view raw) {
    std::string tmp(raw);
    for (char& ch : tmp)
        if (ch == '_') ch = ' ';
    return normalize_text(tmp);
}
}  // namespace detail

// ---------------------------------------------------------------------------
// Closed label vocabularies

enum class EntityType : std::uint8_t {
    Event,
    FolicAcid,
    MilkThistle,
    Ginger,
    Chamomile,
    Garlic,
    BlackCohosh,
    Ginkgo,
    Lavender,
    Melatonin,
    Cranberry,
    Ginseng,
    Glucosamine,
    Dandelion,
    SawPalmetto,
    GreenTea,
};

inline constexpr std::size_t kNumEntityTypes = 16;

inline const std::array<std::string, kNumEntityTypes>& entity_type_names() {
    static const std::array<std::string, kNumEntityTypes> names = {
        "event",     "folic acid", "milk thistle", "ginger",    "chamomile",    "garlic",
        "black cohosh", "ginkgo",  "lavender",     "melatonin", "cranberry",    "ginseng",
        "glucosamine",  "dandelion", "saw palmetto", "green tea"};
    return names;
}

inline std::string_view entity_type_name(EntityType type) {
    return entity_type_names()[static_cast<std::size_t>(type)];
}

inline EntityType parse_entity_type(std::string_view name) {
    const std::string canon = detail::normalize_label(name);
    const auto& names = entity_type_names();
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == canon) return static_cast<EntityType>(i);
    throw UnknownLabelError("unknown entity type: " + std::string(name));
}

enum class RelationType : std::uint8_t { Positive, Negative, NotRelated };

inline std::string_view relation_name(RelationType rel) {
    switch (rel) {
        case RelationType::Positive: return "positive";
        case RelationType::Negative: return "negative";
        case RelationType::NotRelated: return "not_related";
    }
    return "?";
}

inline RelationType parse_relation(std::string_view name) {
    const std::string canon = detail::normalize_label(name);
    if (canon == "positive") return RelationType::Positive;
    if (canon == "negative") return RelationType::Negative;
    if (canon == "not related") return RelationType::NotRelated;
    throw UnknownLabelError("unknown relation: " + std::string(name));
}

enum class UsageStatus : std::uint8_t { Continue, Discontinue, Uncertain, Start };

inline std::string_view usage_name(UsageStatus status) {
    switch (status) {
        case UsageStatus::Continue: return "continue";
        case UsageStatus::Discontinue: return "discontinue";
        case UsageStatus::Uncertain: return "uncertain";
        case UsageStatus::Start: return "start";
    }
    return "?";
}

inline UsageStatus parse_usage(std::string_view name) {
    const std::string canon = detail::normalize_label(name);
    if (canon == "continue") return UsageStatus::Continue;
    if (canon == "discontinue") return UsageStatus::Discontinue;
    if (canon == "uncertain") return UsageStatus::Uncertain;
    if (canon == "start") return UsageStatus::Start;
    throw UnknownLabelError("unknown usage status: " + std::string(name));
}

// ---------------------------------------------------------------------------
// Gold / prediction value types

/// One extracted span with its type. Surface is stored normalized.
struct EntityMention {
    std::string surface;
    EntityType etype;
    bool operator==(const EntityMention&) const = default;
    bool operator<(const EntityMention& other) const {
        return std::tie(surface, etype) < std::tie(other.surface, other.etype);
    }
};

inline EntityMention make_mention(std::string_view surface, EntityType etype) {
    EntityMention m{normalize_text(surface), etype};
    if (m.surface.empty()) throw Error("entity mention surface empty after normalization");
    return m;
}

/// (head supplement, relation, tail adverse event), surfaces normalized.
struct Triple {
    std::string head;
    RelationType relation;
    std::string tail;
    bool operator==(const Triple&) const = default;
    bool operator<(const Triple& other) const {
        return std::tie(head, relation, tail) < std::tie(other.head, other.relation, other.tail);
    }
};

inline Triple make_triple(std::string_view head, RelationType rel, std::string_view tail) {
    Triple t{normalize_text(head), rel, normalize_text(tail)};
    if (t.head.empty() || t.tail.empty()) throw Error("triple head/tail empty after normalization");
    return t;
}

using NerMentions = std::vector<EntityMention>;
using TeTriples = std::vector<Triple>;

// Variant order matches TaskKind so the tag can be recovered from the index.
// NER/TE hold multisets (duplicates meaningful, input order preserved);
// RE/UC are always exactly one label.
using GoldOutput = std::variant<NerMentions, RelationType, TeTriples, UsageStatus>;

inline TaskKind task_of(const GoldOutput& gold) {
    return static_cast<TaskKind>(gold.index());
}

/// One annotated sentence; the unit of corpora, retrieval keys and scoring.
struct Record {
    std::string id;
    TaskKind task = TaskKind::NER;
    std::string text;
    std::optional<std::string> re_head;  // present iff task == RE
    std::optional<std::string> re_tail;  // present iff task == RE
    GoldOutput gold;
};

/// Checks the Record invariants: gold tag equals task, RE head/tail presence,
/// non-empty mention surfaces. Throws SchemaError (line 0 when unknown).
inline void validate_record(const Record& record, std::size_t line = 0) {
    if (task_of(record.gold) != record.task)
        throw SchemaError(line, "gold", "gold output tag does not match record task");
    const bool has_pair = record.re_head.has_value() && record.re_tail.has_value();
    if (record.task == TaskKind::RE && !has_pair)
        throw SchemaError(line, record.re_head ? "re_tail" : "re_head",
                          "RE record requires re_head and re_tail");
    if (record.task != TaskKind::RE && (record.re_head || record.re_tail))
        throw SchemaError(line, "re_head", "re_head/re_tail only allowed on RE records");
    if (record.id.empty()) throw SchemaError(line, "id", "record id must be non-empty");
    if (auto* mentions = std::get_if<NerMentions>(&record.gold)) {
        for (const auto& m : *mentions)
            if (m.surface.empty()) throw SchemaError(line, "gold", "empty mention surface");
    } else if (auto* triples = std::get_if<TeTriples>(&record.gold)) {
        for (const auto& t : *triples)
            if (t.head.empty() || t.tail.empty())
                throw SchemaError(line, "gold", "empty triple head/tail");
    }
}

}  // namespace ramie
