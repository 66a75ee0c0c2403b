#pragma once

// Exact-match micro precision/recall/F1 per task, the three-way error
// taxonomy, and the derived report statistics (average F1, relative
// performance drop against a baseline report).

#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ramie/core.hpp"
#include "ramie/dataset.hpp"
#include "ramie/parsing.hpp"

namespace ramie {

struct MissingTaskError : Error {
    using Error::Error;
};

struct TaskMetrics {
    TaskKind task = TaskKind::NER;
    std::uint64_t tp = 0, fp = 0, fn = 0;
    double precision = 0.0, recall = 0.0, f1 = 0.0;  // fractions in [0, 1]
    std::size_t n_records = 0;
    std::size_t n_malformed = 0;
    std::size_t n_exact = 0;  // whole-output exact matches (strict accuracy)
    double exact_accuracy = 0.0;
    std::vector<std::string> warnings;
};

namespace detail {

// Items match only on full exact equality of all fields; the intersection is
// over multisets, so duplicate mentions/triples count separately.
template <typename Item>
std::size_t multiset_intersection_size(const std::vector<Item>& gold,
                                       const std::vector<Item>& predicted) {
    std::map<Item, std::size_t> remaining;
    for (const auto& item : gold) ++remaining[item];
    std::size_t matched = 0;
    for (const auto& item : predicted) {
        auto it = remaining.find(item);
        if (it != remaining.end() && it->second > 0) {
            --it->second;
            ++matched;
        }
    }
    return matched;
}

inline const Prediction& aligned_prediction(const std::map<std::string, const Prediction*>& by_id,
                                            const Record& record) {
    auto it = by_id.find(record.id);
    if (it == by_id.end()) throw AlignmentError("no prediction for record id " + record.id);
    return *it->second;
}

inline std::map<std::string, const Prediction*> index_predictions(
    const std::vector<Prediction>& predictions) {
    std::map<std::string, const Prediction*> by_id;
    for (const auto& pred : predictions)
        if (!by_id.emplace(pred.record_id, &pred).second)
            throw AlignmentError("duplicate prediction for record id " + pred.record_id);
    return by_id;
}

}  // namespace detail

inline void finalize_metrics(TaskMetrics& metrics) {
    if (metrics.tp + metrics.fp == 0 && metrics.tp + metrics.fn == 0) {
        // Degenerate but total: nothing to find and nothing predicted.
        metrics.precision = metrics.recall = metrics.f1 = 1.0;
        metrics.warnings.push_back("no gold or predicted items; metrics defined as 1.0");
    } else {
        metrics.precision =
            metrics.tp + metrics.fp == 0 ? 0.0
                                         : static_cast<double>(metrics.tp) / (metrics.tp + metrics.fp);
        metrics.recall =
            metrics.tp + metrics.fn == 0 ? 0.0
                                         : static_cast<double>(metrics.tp) / (metrics.tp + metrics.fn);
        // 2PR/(P+R) in the count form; bit-exact equal to P and R when
        // fp == fn, which the single-label tasks guarantee per record.
        metrics.f1 = metrics.precision + metrics.recall == 0.0
                         ? 0.0
                         : 2.0 * static_cast<double>(metrics.tp) /
                               (2.0 * metrics.tp + metrics.fp + metrics.fn);
    }
    metrics.exact_accuracy =
        metrics.n_records == 0 ? 0.0
                               : static_cast<double>(metrics.n_exact) / metrics.n_records;
}

/// Micro scoring. NER/TE pool item-level counts over per-record exact multiset
/// intersections; RE/UC contribute one label per record, so precision =
/// recall = F1 = accuracy. Malformed predictions contribute zero predicted
/// items (NER/TE) or a guaranteed-wrong label (RE/UC).
inline TaskMetrics score_task(const Corpus& gold, const std::vector<Prediction>& predictions) {
    auto by_id = detail::index_predictions(predictions);
    if (by_id.size() != gold.records.size())
        throw AlignmentError("prediction count " + std::to_string(by_id.size()) +
                             " does not match gold count " +
                             std::to_string(gold.records.size()));

    TaskMetrics metrics;
    metrics.task = gold.task;
    metrics.n_records = gold.records.size();

    for (const auto& record : gold.records) {
        const Prediction& pred = detail::aligned_prediction(by_id, record);
        if (pred.task != gold.task)
            throw TaskMismatchError("prediction task does not match corpus task for id " +
                                    record.id);
        const bool malformed = pred.status == ParseStatus::Malformed;
        if (malformed) ++metrics.n_malformed;

        if (gold.task == TaskKind::NER || gold.task == TaskKind::TE) {
            std::size_t gold_n = 0, pred_n = 0, matched = 0;
            if (gold.task == TaskKind::NER) {
                const auto& gold_items = std::get<NerMentions>(record.gold);
                static const NerMentions empty;
                const auto& pred_items =
                    malformed ? empty : std::get<NerMentions>(*pred.value);
                gold_n = gold_items.size();
                pred_n = pred_items.size();
                matched = detail::multiset_intersection_size(gold_items, pred_items);
            } else {
                const auto& gold_items = std::get<TeTriples>(record.gold);
                static const TeTriples empty;
                const auto& pred_items = malformed ? empty : std::get<TeTriples>(*pred.value);
                gold_n = gold_items.size();
                pred_n = pred_items.size();
                matched = detail::multiset_intersection_size(gold_items, pred_items);
            }
            metrics.tp += matched;
            metrics.fp += pred_n - matched;
            metrics.fn += gold_n - matched;
            if (!malformed && *pred.value == record.gold) ++metrics.n_exact;
        } else {
            // Single-label tasks: each record contributes one gold and one
            // predicted label.
            const bool correct = !malformed && *pred.value == record.gold;
            if (correct) {
                ++metrics.tp;
                ++metrics.n_exact;
            } else {
                ++metrics.fp;
                ++metrics.fn;
            }
        }
    }
    finalize_metrics(metrics);
    return metrics;
}

// ---------------------------------------------------------------------------
// Error taxonomy

struct ErrorBreakdown {
    std::size_t redundant = 0, omission = 0, incorrect = 0, malformed = 0;
    // record id -> tags, present only for imperfect records
    std::map<std::string, std::vector<std::string>> record_tags;
};

namespace detail {

inline bool strictly_contains(const std::string& outer, const std::string& inner) {
    return outer.size() > inner.size() && outer.find(inner) != std::string::npos;
}

// Unmatched predicted items / gold items per record, multiset-aware.
template <typename Item>
void split_unmatched(const std::vector<Item>& gold, const std::vector<Item>& predicted,
                     std::vector<Item>& unmatched_pred, std::size_t& matched) {
    std::map<Item, std::size_t> remaining;
    for (const auto& item : gold) ++remaining[item];
    matched = 0;
    for (const auto& item : predicted) {
        auto it = remaining.find(item);
        if (it != remaining.end() && it->second > 0) {
            --it->second;
            ++matched;
        } else {
            unmatched_pred.push_back(item);
        }
    }
}

}  // namespace detail

/// Tags every imperfect record with at least one of {redundant, omission,
/// incorrect, malformed}. Redundant: superset-surface extraction or extra
/// predictions beyond all gold matches. Omission: matched some but not all
/// gold items, or produced fewer items than gold. Incorrect: an unmatched
/// prediction that is not redundant (wrong type/relation, non-entity).
inline ErrorBreakdown classify_errors(const Corpus& gold,
                                      const std::vector<Prediction>& predictions) {
    auto by_id = detail::index_predictions(predictions);
    ErrorBreakdown breakdown;

    for (const auto& record : gold.records) {
        const Prediction& pred = detail::aligned_prediction(by_id, record);
        std::vector<std::string> tags;
        if (pred.status == ParseStatus::Malformed) {
            tags.push_back("malformed");
        } else if (gold.task == TaskKind::RE || gold.task == TaskKind::UC) {
            if (*pred.value != record.gold) tags.push_back("incorrect");
        } else if (gold.task == TaskKind::NER) {
            const auto& gold_items = std::get<NerMentions>(record.gold);
            const auto& pred_items = std::get<NerMentions>(*pred.value);
            NerMentions unmatched_pred;
            std::size_t matched = 0;
            detail::split_unmatched(gold_items, pred_items, unmatched_pred, matched);
            const bool all_gold_matched = matched == gold_items.size();
            bool redundant = false, incorrect = false;
            for (const auto& item : unmatched_pred) {
                bool superset = false;
                for (const auto& g : gold_items)
                    if (item.etype == g.etype && detail::strictly_contains(item.surface, g.surface)) {
                        superset = true;
                        break;
                    }
                if (superset || all_gold_matched)
                    redundant = true;
                else
                    incorrect = true;
            }
            const bool omission = (matched >= 1 && matched < gold_items.size()) ||
                                  (pred_items.empty() && !gold_items.empty());
            if (redundant) tags.push_back("redundant");
            if (omission) tags.push_back("omission");
            if (incorrect) tags.push_back("incorrect");
        } else {  // TE
            const auto& gold_items = std::get<TeTriples>(record.gold);
            const auto& pred_items = std::get<TeTriples>(*pred.value);
            TeTriples unmatched_pred;
            std::size_t matched = 0;
            detail::split_unmatched(gold_items, pred_items, unmatched_pred, matched);
            const bool all_gold_matched = matched == gold_items.size();
            bool redundant = false, incorrect = false;
            for (const auto& item : unmatched_pred) {
                bool superset = false;
                for (const auto& g : gold_items) {
                    const bool head_ok = item.head == g.head ||
                                         detail::strictly_contains(item.head, g.head);
                    const bool tail_ok = item.tail == g.tail ||
                                         detail::strictly_contains(item.tail, g.tail);
                    if (item.relation == g.relation && head_ok && tail_ok &&
                        (item.head != g.head || item.tail != g.tail)) {
                        superset = true;
                        break;
                    }
                }
                if (superset || all_gold_matched)
                    redundant = true;
                else
                    incorrect = true;
            }
            const bool omission = pred_items.size() < gold_items.size();
            if (redundant) tags.push_back("redundant");
            if (omission) tags.push_back("omission");
            if (incorrect) tags.push_back("incorrect");
        }

        if (tags.empty()) continue;
        for (const auto& tag : tags) {
            if (tag == "redundant") ++breakdown.redundant;
            else if (tag == "omission") ++breakdown.omission;
            else if (tag == "incorrect") ++breakdown.incorrect;
            else ++breakdown.malformed;
        }
        breakdown.record_tags[record.id] = std::move(tags);
    }
    return breakdown;
}

// ---------------------------------------------------------------------------
// Run reports

struct RunReport {
    std::array<TaskMetrics, 4> tasks;  // indexed by TaskKind
    double average_f1 = 0.0;           // arithmetic mean of the four task F1s
    bool has_baseline = false;
    std::array<double, 4> task_drop_pct{};     // (baseline - f1)/baseline, percent
    double avg_drop_mean_of_tasks = 0.0;       // mean of the four per-task drops
    double avg_drop_of_average_f1 = 0.0;       // drop of the (rounded) average F1s
};

inline double relative_drop_pct(double baseline_f1, double f1) {
    if (baseline_f1 == 0.0) return 0.0;
    return (baseline_f1 - f1) / baseline_f1 * 100.0;
}

namespace detail {
// Report cells are two-decimal percentages; the average-drop statistic is
// taken over averages at that display precision.
inline double round2(double pct) { return std::round(pct * 100.0) / 100.0; }
}  // namespace detail

/// Average F1 plus, when a baseline is given, per-task relative drops
/// (positive = degradation) and both average-drop variants.
inline RunReport aggregate_report(const std::vector<TaskMetrics>& metrics,
                                  const RunReport* baseline = nullptr) {
    RunReport report;
    std::array<bool, 4> seen{};
    for (const auto& m : metrics) {
        const auto idx = static_cast<std::size_t>(m.task);
        if (seen[idx])
            throw MissingTaskError("duplicate metrics for task " +
                                   std::string(task_name(m.task)));
        seen[idx] = true;
        report.tasks[idx] = m;
    }
    for (std::size_t i = 0; i < 4; ++i)
        if (!seen[i])
            throw MissingTaskError("missing metrics for task " +
                                   std::string(task_name(static_cast<TaskKind>(i))));

    double sum = 0.0;
    for (const auto& m : report.tasks) sum += m.f1;
    report.average_f1 = sum / 4.0;

    if (baseline) {
        report.has_baseline = true;
        double drop_sum = 0.0;
        for (std::size_t i = 0; i < 4; ++i) {
            report.task_drop_pct[i] =
                relative_drop_pct(baseline->tasks[i].f1 * 100.0, report.tasks[i].f1 * 100.0);
            drop_sum += report.task_drop_pct[i];
        }
        report.avg_drop_mean_of_tasks = drop_sum / 4.0;
        report.avg_drop_of_average_f1 =
            relative_drop_pct(detail::round2(baseline->average_f1 * 100.0),
                              detail::round2(report.average_f1 * 100.0));
    }
    return report;
}

// ---------------------------------------------------------------------------
// Rendering / serialization

inline nlohmann::json task_metrics_to_json(const TaskMetrics& m) {
    return {{"task", std::string(task_name(m.task))},
            {"tp", m.tp},
            {"fp", m.fp},
            {"fn", m.fn},
            {"precision", m.precision},
            {"recall", m.recall},
            {"f1", m.f1},
            {"n_records", m.n_records},
            {"n_malformed", m.n_malformed},
            {"n_exact", m.n_exact},
            {"exact_accuracy", m.exact_accuracy},
            {"warnings", m.warnings}};
}

inline TaskMetrics task_metrics_from_json(const nlohmann::json& obj) {
    TaskMetrics m;
    m.task = parse_task(obj.at("task").get<std::string>());
    m.tp = obj.value("tp", 0ull);
    m.fp = obj.value("fp", 0ull);
    m.fn = obj.value("fn", 0ull);
    m.precision = obj.value("precision", 0.0);
    m.recall = obj.value("recall", 0.0);
    m.f1 = obj.at("f1").get<double>();
    m.n_records = obj.value("n_records", 0ull);
    m.n_malformed = obj.value("n_malformed", 0ull);
    m.n_exact = obj.value("n_exact", 0ull);
    m.exact_accuracy = obj.value("exact_accuracy", 0.0);
    return m;
}

inline nlohmann::json report_to_json(const RunReport& report) {
    nlohmann::json tasks = nlohmann::json::array();
    for (const auto& m : report.tasks) tasks.push_back(task_metrics_to_json(m));
    nlohmann::json obj{{"tasks", std::move(tasks)}, {"average_f1", report.average_f1}};
    if (report.has_baseline) {
        nlohmann::json drops;
        for (std::size_t i = 0; i < 4; ++i)
            drops[std::string(task_name(static_cast<TaskKind>(i)))] = report.task_drop_pct[i];
        drops["mean_of_task_drops"] = report.avg_drop_mean_of_tasks;
        drops["drop_of_average_f1"] = report.avg_drop_of_average_f1;
        obj["perf_drop_pct"] = std::move(drops);
    }
    return obj;
}

inline RunReport report_from_json(const nlohmann::json& obj) {
    RunReport report;
    for (const auto& entry : obj.at("tasks")) {
        const TaskMetrics m = task_metrics_from_json(entry);
        report.tasks[static_cast<std::size_t>(m.task)] = m;
    }
    report.average_f1 = obj.at("average_f1").get<double>();
    return report;
}

/// Plain-text table mirroring the usual layout: P/R/F1 per task, Avg F1, and
/// Perf. Drop columns when a baseline was supplied.
inline std::string render_report_table(const RunReport& report) {
    char buf[160];
    std::string out;
    out += report.has_baseline
               ? "Task   Precision   Recall       F1   Perf. Drop\n"
               : "Task   Precision   Recall       F1\n";
    for (std::size_t i = 0; i < 4; ++i) {
        const auto& m = report.tasks[i];
        if (report.has_baseline) {
            std::snprintf(buf, sizeof buf, "%-4s   %9.2f   %6.2f   %6.2f   %9.2f%%\n",
                          std::string(task_name(m.task)).c_str(), m.precision * 100.0,
                          m.recall * 100.0, m.f1 * 100.0, report.task_drop_pct[i]);
        } else {
            std::snprintf(buf, sizeof buf, "%-4s   %9.2f   %6.2f   %6.2f\n",
                          std::string(task_name(m.task)).c_str(), m.precision * 100.0,
                          m.recall * 100.0, m.f1 * 100.0);
        }
        out += buf;
    }
    std::snprintf(buf, sizeof buf, "Avg F1 %9.2f\n", report.average_f1 * 100.0);
    out += buf;
    if (report.has_baseline) {
        std::snprintf(buf, sizeof buf,
                      "Avg drop %6.2f%% (drop of avg F1)  %6.2f%% (mean of task drops)\n",
                      report.avg_drop_of_average_f1, report.avg_drop_mean_of_tasks);
        out += buf;
    }
    return out;
}

}  // namespace ramie
