#pragma once

// Instruction prompt rendering and the canonical response grammar.
// One instruction template per task; a prompt is instruction block, optional
// retrieved-example block, then the input block with an empty response cue.

#include <array>
#include <cctype>
#include <optional>
#include <string>
#include <vector>

#include "ramie/core.hpp"
#include "ramie/detail/io.hpp"

namespace ramie {

struct PromptTemplate {
    TaskKind task = TaskKind::NER;
    std::string instruction_text;
};

struct Prompt {
    std::string record_id;
    TaskKind task = TaskKind::NER;
    std::string rendered_text;
    std::optional<std::string> example_id;  // none in no-RAG mode
};

// ---------------------------------------------------------------------------
// Response grammar

namespace detail {
inline std::string quote(std::string_view text) {
    std::string out;
    out.reserve(text.size() + 2);
    out.push_back('\'');
    for (char ch : text) {
        if (ch == '\\' || ch == '\'') out.push_back('\\');
        out.push_back(ch);
    }
    out.push_back('\'');
    return out;
}
}  // namespace detail

/// Canonical response serialization: bracketed lists, single-quoted strings,
/// one space after commas and colons. Deterministic and injective per task.
inline std::string serialize_gold(const GoldOutput& gold) {
    using detail::quote;
    std::string out = "[";
    switch (task_of(gold)) {
        case TaskKind::NER: {
            const auto& mentions = std::get<NerMentions>(gold);
            for (std::size_t i = 0; i < mentions.size(); ++i) {
                if (i > 0) out += ", ";
                out += "{" + quote(mentions[i].surface) + ": " +
                       quote(entity_type_name(mentions[i].etype)) + "}";
            }
            break;
        }
        case TaskKind::RE:
            out += quote(relation_name(std::get<RelationType>(gold)));
            break;
        case TaskKind::TE: {
            const auto& triples = std::get<TeTriples>(gold);
            for (std::size_t i = 0; i < triples.size(); ++i) {
                if (i > 0) out += ", ";
                out += "{'head entity': " + quote(triples[i].head) +
                       ", 'relation': " + quote(relation_name(triples[i].relation)) +
                       ", 'tail entity': " + quote(triples[i].tail) + "}";
            }
            break;
        }
        case TaskKind::UC:
            out += quote(usage_name(std::get<UsageStatus>(gold)));
            break;
    }
    out += "]";
    return out;
}

// ---------------------------------------------------------------------------
// Templates

/// The closed label set a task's instruction must enumerate.
inline std::vector<std::string> task_label_vocabulary(TaskKind task) {
    std::vector<std::string> vocab;
    switch (task) {
        case TaskKind::NER:
            for (const auto& name : entity_type_names()) vocab.push_back(name);
            break;
        case TaskKind::RE:
        case TaskKind::TE:
            vocab = {"negative", "not_related", "positive"};
            break;
        case TaskKind::UC:
            vocab = {"continue", "discontinue", "uncertain", "start"};
            break;
    }
    return vocab;
}

inline const std::array<PromptTemplate, 4>& default_templates() {
    static const std::array<PromptTemplate, 4> templates = {
        PromptTemplate{TaskKind::NER,
                       "Task: named entity recognition. Extract dietary supplements and adverse "
                       "events from a given sentence and recognize their entity types.\n"
                       "The entity types are: 'event', 'folic acid', 'milk thistle', 'ginger', "
                       "'chamomile', 'garlic', 'black cohosh', 'ginkgo', 'lavender', 'melatonin', "
                       "'cranberry', 'ginseng', 'glucosamine', 'dandelion', 'saw palmetto', "
                       "'green tea'.\n"
                       "Respond with a list of entities with their corresponding types, for "
                       "example: [{'entity_name1': 'entity_type1'}, {'entity_name2': "
                       "'entity_type2'}]. Respond with [] if there are no entities."},
        PromptTemplate{TaskKind::RE,
                       "Task: relation extraction. Predict the relationship between a given head "
                       "entity and tail entity within the provided sentence.\n"
                       "The relation must be one of: 'negative', 'not_related', 'positive'.\n"
                       "Respond with a single-item list containing the relation, such as "
                       "['relation_type']."},
        PromptTemplate{TaskKind::TE,
                       "Task: triple extraction. Extract triples consisting of a head entity, "
                       "relation, and tail entity from the sentence.\n"
                       "Head entities are dietary supplements and tail entities are adverse "
                       "events. The relation must be one of: 'negative', 'not_related', "
                       "'positive'.\n"
                       "Respond with a list of dictionaries, where each dictionary represents a "
                       "triple, such as [{'head entity': 'entity_name', 'relation': "
                       "'relation_type', 'tail entity': 'entity_name'}]. Respond with [] if "
                       "there are no triples."},
        PromptTemplate{TaskKind::UC,
                       "Task: usage classification. Predict the dietary supplement usage within "
                       "the sentence.\n"
                       "The usage status must be one of: 'continue', 'discontinue', 'uncertain', "
                       "'start'.\n"
                       "Respond with a single-item list containing the usage status, such as "
                       "['usage_type']."},
    };
    return templates;
}

/// Each vocabulary label must appear exactly once, quoted, in the instruction.
inline void validate_template(const PromptTemplate& tmpl) {
    for (const auto& label : task_label_vocabulary(tmpl.task)) {
        const std::string quoted = "'" + label + "'";
        std::size_t count = 0;
        for (std::size_t pos = tmpl.instruction_text.find(quoted); pos != std::string::npos;
             pos = tmpl.instruction_text.find(quoted, pos + 1))
            ++count;
        if (count != 1)
            throw ConfigError("template for " + std::string(task_name(tmpl.task)) +
                              ": label " + quoted + " must appear exactly once, found " +
                              std::to_string(count));
    }
}

inline std::string template_filename(TaskKind task) {
    std::string name(task_name(task));
    for (char& ch : name) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return name + ".txt";
}

inline PromptTemplate load_template(const std::string& dir, TaskKind task) {
    std::string text = detail::read_file(dir + "/" + template_filename(task));
    while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
    PromptTemplate tmpl{task, std::move(text)};
    validate_template(tmpl);
    return tmpl;
}

inline std::array<PromptTemplate, 4> load_templates(const std::string& dir) {
    return {load_template(dir, TaskKind::NER), load_template(dir, TaskKind::RE),
            load_template(dir, TaskKind::TE), load_template(dir, TaskKind::UC)};
}

inline void write_default_templates(const std::string& dir) {
    for (const auto& tmpl : default_templates())
        detail::write_file(dir + "/" + template_filename(tmpl.task),
                           tmpl.instruction_text + "\n");
}

// ---------------------------------------------------------------------------
// Rendering

inline std::string re_question(const std::string& head, const std::string& tail) {
    return "The relationship between " + head + " and " + tail + " is?";
}

/// Sentence as the model sees it: raw text, plus the rendered relationship
/// question for RE records.
inline std::string sentence_for_prompt(const Record& record) {
    if (record.task == TaskKind::RE && record.re_head && record.re_tail)
        return record.text + " " + re_question(*record.re_head, *record.re_tail);
    return record.text;
}

/// Renders instruction + optional example block + input block. Byte-stable:
/// equal inputs yield identical prompts.
inline Prompt build_prompt(const PromptTemplate& tmpl, const Record* example,
                           const Record& input) {
    if (tmpl.task != input.task)
        throw TaskMismatchError("template task " + std::string(task_name(tmpl.task)) +
                                " does not match input task " +
                                std::string(task_name(input.task)));
    if (example && example->task != input.task)
        throw TaskMismatchError("example task " + std::string(task_name(example->task)) +
                                " does not match input task " +
                                std::string(task_name(input.task)));
    std::string text = tmpl.instruction_text;
    text += "\n\n";
    if (example) {
        text += "Example:\n";
        text += sentence_for_prompt(*example);
        text += "\nResponse: ";
        text += serialize_gold(example->gold);
        text += "\n\n";
    }
    text += "Input:\n";
    text += sentence_for_prompt(input);
    text += "\nResponse:";

    Prompt prompt;
    prompt.record_id = input.id;
    prompt.task = input.task;
    prompt.rendered_text = std::move(text);
    if (example) prompt.example_id = example->id;
    return prompt;
}

}  // namespace ramie
