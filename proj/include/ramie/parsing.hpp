#pragma once

// Parses raw model generations into structured predictions. Total: every
// input string yields a Prediction; failures surface as parse_status =
// malformed with a reason code, never as an exception.
//
// Leniency tiers, each explicit in the result:
//   strict  - one bracketed expression, single-quoted strings, no trailing
//             commas (whitespace is always free)
//   quotes  - also double-quoted strings, bare tokens, trailing commas
//   full    - also strips surrounding prose down to a bracketed expression;
//             with several bracketed expressions the last one is taken

#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ramie/core.hpp"

namespace ramie {

enum class ParseStatus { Ok, Recovered, Malformed };

inline std::string_view parse_status_name(ParseStatus status) {
    switch (status) {
        case ParseStatus::Ok: return "ok";
        case ParseStatus::Recovered: return "recovered";
        case ParseStatus::Malformed: return "malformed";
    }
    return "?";
}

inline ParseStatus parse_status_from_name(std::string_view name) {
    if (name == "ok") return ParseStatus::Ok;
    if (name == "recovered") return ParseStatus::Recovered;
    if (name == "malformed") return ParseStatus::Malformed;
    throw UnknownLabelError("unknown parse status: " + std::string(name));
}

enum class Leniency { Strict, Quotes, Full };

struct ParserOptions {
    Leniency leniency = Leniency::Full;
    bool last_expression = true;  // when prose holds several bracket expressions
};

struct Prediction {
    std::string record_id;
    TaskKind task = TaskKind::NER;
    std::optional<GoldOutput> value;  // present iff status != Malformed
    ParseStatus status = ParseStatus::Malformed;
    std::string reason;  // leniency applied (recovered) or failure code (malformed)
};

namespace detail {

struct ParseFail {
    std::string reason;
};

struct GenLexer {
    std::string_view src;
    std::size_t pos = 0;
    bool saw_double_quote = false;
    bool saw_bare_token = false;
    bool saw_trailing_comma = false;

    void skip_ws() {
        while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
    }
    bool eof() {
        skip_ws();
        return pos >= src.size();
    }
    char peek() {
        skip_ws();
        return pos < src.size() ? src[pos] : '\0';
    }
    void expect(char ch) {
        if (peek() != ch) throw ParseFail{"structure"};
        ++pos;
    }

    std::string parse_quoted(char quote) {
        ++pos;  // opening quote
        std::string out;
        while (pos < src.size()) {
            char ch = src[pos++];
            if (ch == '\\' && pos < src.size()) {
                out.push_back(src[pos++]);
                continue;
            }
            if (ch == quote) return out;
            out.push_back(ch);
        }
        throw ParseFail{"unterminated_string"};
    }

    // String value: quoted, or a bare token running to the next delimiter.
    std::string parse_string() {
        const char ch = peek();
        if (ch == '\'') return parse_quoted('\'');
        if (ch == '"') {
            saw_double_quote = true;
            return parse_quoted('"');
        }
        const std::size_t start = pos;
        while (pos < src.size() && src[pos] != ',' && src[pos] != ':' && src[pos] != ']' &&
               src[pos] != '}' && src[pos] != '[' && src[pos] != '{')
            ++pos;
        std::string_view token = src.substr(start, pos - start);
        while (!token.empty() && std::isspace(static_cast<unsigned char>(token.back())))
            token.remove_suffix(1);
        if (token.empty()) throw ParseFail{"structure"};
        saw_bare_token = true;
        return std::string(token);
    }
};

struct ParsedItem {
    bool is_dict = false;
    std::string scalar;                                       // when !is_dict
    std::vector<std::pair<std::string, std::string>> pairs;   // when is_dict
};

inline std::vector<std::pair<std::string, std::string>> parse_dict(GenLexer& lex) {
    lex.expect('{');
    std::vector<std::pair<std::string, std::string>> pairs;
    if (lex.peek() == '}') {
        ++lex.pos;
        return pairs;
    }
    while (true) {
        std::string key = lex.parse_string();
        lex.expect(':');
        std::string value = lex.parse_string();
        pairs.emplace_back(std::move(key), std::move(value));
        const char next = lex.peek();
        if (next == ',') {
            ++lex.pos;
            if (lex.peek() == '}') {
                lex.saw_trailing_comma = true;
                ++lex.pos;
                return pairs;
            }
            continue;
        }
        if (next == '}') {
            ++lex.pos;
            return pairs;
        }
        throw ParseFail{"structure"};
    }
}

inline std::vector<ParsedItem> parse_bracket_list(GenLexer& lex) {
    lex.expect('[');
    std::vector<ParsedItem> items;
    if (lex.peek() == ']') {
        ++lex.pos;
        return items;
    }
    while (true) {
        ParsedItem item;
        if (lex.peek() == '{') {
            item.is_dict = true;
            item.pairs = parse_dict(lex);
        } else if (lex.peek() == '[') {
            throw ParseFail{"structure"};  // nested lists are not part of any grammar
        } else {
            item.scalar = lex.parse_string();
        }
        items.push_back(std::move(item));
        const char next = lex.peek();
        if (next == ',') {
            ++lex.pos;
            if (lex.peek() == ']') {
                lex.saw_trailing_comma = true;
                ++lex.pos;
                return items;
            }
            continue;
        }
        if (next == ']') {
            ++lex.pos;
            return items;
        }
        throw ParseFail{"structure"};
    }
}

// Quote-aware scan for top-level balanced [...] spans.
inline std::vector<std::pair<std::size_t, std::size_t>> bracket_spans(std::string_view text) {
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    int depth = 0;
    std::size_t open_pos = 0;
    char in_string = '\0';
    bool escaped = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char ch = text[i];
        if (in_string != '\0') {
            if (escaped)
                escaped = false;
            else if (ch == '\\')
                escaped = true;
            else if (ch == in_string)
                in_string = '\0';
            continue;
        }
        if (depth > 0 && (ch == '\'' || ch == '"')) {
            in_string = ch;
            continue;
        }
        if (ch == '[') {
            if (depth == 0) open_pos = i;
            ++depth;
        } else if (ch == ']') {
            if (depth > 0 && --depth == 0) spans.emplace_back(open_pos, i + 1);
        }
    }
    return spans;
}

}  // namespace detail

/// Never throws; scoring treats malformed predictions as empty/wrong output.
inline Prediction parse_generation(TaskKind task, std::string_view raw,
                                   const ParserOptions& options = {},
                                   std::string record_id = "") {
    Prediction pred;
    pred.record_id = std::move(record_id);
    pred.task = task;
    pred.status = ParseStatus::Malformed;

    // Locate the bracketed expression.
    std::string_view trimmed = raw;
    while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.front())))
        trimmed.remove_prefix(1);
    while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.back())))
        trimmed.remove_suffix(1);

    const auto spans = detail::bracket_spans(trimmed);
    if (spans.empty()) {
        pred.reason = "no_bracket_expression";
        return pred;
    }
    const auto [span_begin, span_end] =
        options.last_expression ? spans.back() : spans.front();
    const bool prose_stripped = !(spans.size() == 1 && span_begin == 0 && span_end == trimmed.size());
    if (prose_stripped && options.leniency != Leniency::Full) {
        pred.reason = "prose";
        return pred;
    }

    detail::GenLexer lex{trimmed.substr(span_begin, span_end - span_begin)};
    std::vector<detail::ParsedItem> items;
    try {
        items = detail::parse_bracket_list(lex);
        if (!lex.eof()) throw detail::ParseFail{"structure"};
    } catch (const detail::ParseFail& fail) {
        pred.reason = fail.reason;
        return pred;
    }

    bool multi_pair_dict = false;
    try {
        switch (task) {
            case TaskKind::NER: {
                NerMentions mentions;
                for (const auto& item : items) {
                    if (!item.is_dict) throw detail::ParseFail{"structure"};
                    if (item.pairs.empty()) throw detail::ParseFail{"structure"};
                    if (item.pairs.size() > 1) multi_pair_dict = true;
                    for (const auto& [surface, type] : item.pairs)
                        mentions.push_back(make_mention(surface, parse_entity_type(type)));
                }
                pred.value = std::move(mentions);
                break;
            }
            case TaskKind::RE: {
                if (items.size() != 1) throw detail::ParseFail{"item_count"};
                if (items[0].is_dict) throw detail::ParseFail{"structure"};
                pred.value = parse_relation(items[0].scalar);
                break;
            }
            case TaskKind::TE: {
                TeTriples triples;
                for (const auto& item : items) {
                    if (!item.is_dict) throw detail::ParseFail{"structure"};
                    std::optional<std::string> head, tail;
                    std::optional<RelationType> relation;
                    for (const auto& [raw_key, value] : item.pairs) {
                        const std::string key = detail::normalize_label(raw_key);
                        if (key == "head entity" && !head)
                            head = value;
                        else if (key == "relation" && !relation)
                            relation = parse_relation(value);
                        else if (key == "tail entity" && !tail)
                            tail = value;
                        else
                            throw detail::ParseFail{"structure"};
                    }
                    if (!head || !relation || !tail) throw detail::ParseFail{"structure"};
                    triples.push_back(make_triple(*head, *relation, *tail));
                }
                pred.value = std::move(triples);
                break;
            }
            case TaskKind::UC: {
                if (items.size() != 1) throw detail::ParseFail{"item_count"};
                if (items[0].is_dict) throw detail::ParseFail{"structure"};
                pred.value = parse_usage(items[0].scalar);
                break;
            }
        }
    } catch (const detail::ParseFail& fail) {
        pred.value.reset();
        pred.reason = fail.reason;
        return pred;
    } catch (const UnknownLabelError&) {
        pred.value.reset();
        pred.reason = "unknown_label";
        return pred;
    } catch (const Error&) {
        pred.value.reset();
        pred.reason = "empty_surface";
        return pred;
    }

    const bool quote_leniency =
        lex.saw_double_quote || lex.saw_bare_token || lex.saw_trailing_comma || multi_pair_dict;
    if (options.leniency == Leniency::Strict && (quote_leniency || prose_stripped)) {
        pred.value.reset();
        pred.reason = prose_stripped ? "prose" : "quoting";
        return pred;
    }
    if (prose_stripped || quote_leniency) {
        pred.status = ParseStatus::Recovered;
        std::string reason;
        if (prose_stripped) reason = "prose";
        if (quote_leniency) reason += reason.empty() ? "quoting" : ",quoting";
        pred.reason = reason;
    } else {
        pred.status = ParseStatus::Ok;
    }
    return pred;
}

}  // namespace ramie
