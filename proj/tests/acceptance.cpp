// Acceptance suite. Runs every acceptance criterion at its stated tolerance
// and prints exactly one [PASS]/[FAIL] line per criterion. Exit code is the
// number of failed criteria (0 = all green).

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ramie/evaluation.hpp"
#include "ramie/fixtures.hpp"
#include "ramie/pipeline.hpp"
#include "ramie/retrieval.hpp"

using namespace ramie;

namespace {

#ifndef RAMIE_CLI_PATH
#define RAMIE_CLI_PATH "ramie"
#endif
#ifndef RAMIE_DATA_DIR
#define RAMIE_DATA_DIR "tests/data"
#endif

struct CheckFailure {
    std::string message;
};

void require(bool condition, const std::string& message) {
    if (!condition) throw CheckFailure{message};
}

int run_cli(const std::string& args, const std::string& log_path) {
    const std::string command =
        std::string(RAMIE_CLI_PATH) + " " + args + " > " + log_path + " 2>&1";
    const int status = std::system(command.c_str());
    if (status == -1) return -1;
    if (WIFEXITED(status)) return WEXITSTATUS(status);
    return -2;
}

struct Scratch {
    std::filesystem::path path;
    explicit Scratch(const std::string& name) {
        path = std::filesystem::temp_directory_path() /
               ("ramie_acceptance_" + std::to_string(::getpid())) / name;
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    std::string str() const { return path.string(); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

// --------------------------------------------------------------------------
// Shared generators and reference implementations (independent of the
// library paths they check).

GoldOutput random_gold(std::mt19937_64& rng, TaskKind task) {
    auto word = [&rng]() {
        std::string w;
        const std::size_t len = 2 + detail::uniform_below(rng, 4);
        for (std::size_t i = 0; i < len; ++i)
            w.push_back(static_cast<char>('a' + detail::uniform_below(rng, 8)));
        return w;
    };
    switch (task) {
        case TaskKind::NER: {
            NerMentions mentions;
            const std::size_t n = detail::uniform_below(rng, 5);
            for (std::size_t i = 0; i < n; ++i)
                mentions.push_back(make_mention(
                    word(), static_cast<EntityType>(detail::uniform_below(rng, 16))));
            return mentions;
        }
        case TaskKind::RE:
            return static_cast<RelationType>(detail::uniform_below(rng, 3));
        case TaskKind::TE: {
            TeTriples triples;
            const std::size_t n = detail::uniform_below(rng, 4);
            for (std::size_t i = 0; i < n; ++i)
                triples.push_back(
                    make_triple(word(), static_cast<RelationType>(detail::uniform_below(rng, 3)),
                                word()));
            return triples;
        }
        case TaskKind::UC:
            return static_cast<UsageStatus>(detail::uniform_below(rng, 4));
    }
    throw Error("unreachable");
}

// Exhaustive per-record multiset matcher via sorted two-pointer walk.
template <typename Item>
std::size_t sorted_intersection(std::vector<Item> gold, std::vector<Item> predicted) {
    std::sort(gold.begin(), gold.end());
    std::sort(predicted.begin(), predicted.end());
    std::size_t i = 0, j = 0, matched = 0;
    while (i < gold.size() && j < predicted.size()) {
        if (gold[i] == predicted[j]) ++matched, ++i, ++j;
        else if (gold[i] < predicted[j]) ++i;
        else ++j;
    }
    return matched;
}

void reference_counts(const Corpus& gold, const std::vector<Prediction>& predictions,
                      std::uint64_t& tp, std::uint64_t& fp, std::uint64_t& fn) {
    std::map<std::string, const Prediction*> by_id;
    for (const auto& pred : predictions) by_id[pred.record_id] = &pred;
    tp = fp = fn = 0;
    for (const auto& record : gold.records) {
        const Prediction& pred = *by_id.at(record.id);
        const bool malformed = pred.status == ParseStatus::Malformed;
        if (gold.task == TaskKind::NER) {
            const auto& g = std::get<NerMentions>(record.gold);
            const NerMentions p = malformed ? NerMentions{} : std::get<NerMentions>(*pred.value);
            const std::size_t m = sorted_intersection(g, p);
            tp += m, fp += p.size() - m, fn += g.size() - m;
        } else if (gold.task == TaskKind::TE) {
            const auto& g = std::get<TeTriples>(record.gold);
            const TeTriples p = malformed ? TeTriples{} : std::get<TeTriples>(*pred.value);
            const std::size_t m = sorted_intersection(g, p);
            tp += m, fp += p.size() - m, fn += g.size() - m;
        } else {
            const bool correct = !malformed && *pred.value == record.gold;
            if (correct) ++tp;
            else ++fp, ++fn;
        }
    }
}

// Exact sparse-feature cosine (no hashing), the embedding oracle.
std::map<std::string, double> sparse_features(const std::string& text) {
    std::map<std::string, double> features;
    const std::string normalized = normalize_text(text);
    if (normalized.empty()) return features;
    detail::for_each_lexical_feature(normalized,
                                     [&](const std::string& f) { features[f] += 1.0; });
    return features;
}

double sparse_cosine(const std::string& a, const std::string& b) {
    const auto fa = sparse_features(a);
    const auto fb = sparse_features(b);
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (const auto& [f, tf] : fa) {
        na += tf * tf;
        const auto it = fb.find(f);
        if (it != fb.end()) dot += tf * it->second;
    }
    for (const auto& [f, tf] : fb) nb += tf * tf;
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

RunReport report_from_file(const std::string& path) {
    return report_from_json(nlohmann::json::parse(detail::read_file(path)));
}

constexpr double kCellTolerance = 0.005 + 1e-9;

// --------------------------------------------------------------------------
// Criteria

std::string criterion_metric_oracle() {
    const auto started = std::chrono::steady_clock::now();
    std::mt19937_64 rng(4242);
    std::size_t corpora_checked = 0;
    for (TaskKind task : kAllTasks) {
        for (int round = 0; round < 200; ++round) {
            const std::size_t n = 1 + detail::uniform_below(rng, 500);
            Corpus gold{task, "test", {}};
            std::vector<Prediction> preds;
            for (std::size_t i = 0; i < n; ++i) {
                const std::string id = "r" + std::to_string(i);
                Record record;
                record.id = id;
                record.task = task;
                record.text = "s" + std::to_string(i);
                if (task == TaskKind::RE) {
                    record.re_head = "h";
                    record.re_tail = "t";
                }
                record.gold = random_gold(rng, task);
                gold.records.push_back(std::move(record));

                Prediction pred;
                pred.record_id = id;
                pred.task = task;
                const auto roll = detail::uniform_below(rng, 10);
                if (roll == 0) {
                    pred.status = ParseStatus::Malformed;
                } else {
                    pred.status = ParseStatus::Ok;
                    pred.value = roll < 4 ? gold.records.back().gold : random_gold(rng, task);
                }
                preds.push_back(std::move(pred));
            }
            const TaskMetrics metrics = score_task(gold, preds);
            std::uint64_t tp, fp, fn;
            reference_counts(gold, preds, tp, fp, fn);
            require(metrics.tp == tp && metrics.fp == fp && metrics.fn == fn,
                    "count mismatch on task " + std::string(task_name(task)) + " round " +
                        std::to_string(round));
            ++corpora_checked;
        }
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    require(seconds < 10.0, "runtime " + std::to_string(seconds) + "s exceeds 10s");
    std::ostringstream detail_msg;
    detail_msg << corpora_checked << " randomized corpora, exact integer-count equality, "
               << std::fixed << std::setprecision(2) << seconds << "s";
    return detail_msg.str();
}

std::string criterion_derived_statistics() {
    const auto doc = nlohmann::json::parse(
        detail::read_file(std::string(RAMIE_DATA_DIR) + "/reference_scores.json"));
    std::size_t cells = 0;

    auto metrics_of = [](const nlohmann::json& f1_cells) {
        std::vector<TaskMetrics> metrics;
        for (TaskKind task : kAllTasks) {
            TaskMetrics m;
            m.task = task;
            m.f1 = f1_cells.at(std::string(task_name(task))).get<double>() / 100.0;
            metrics.push_back(m);
        }
        return metrics;
    };

    for (const auto& row : doc.at("single_task")) {
        const RunReport report = aggregate_report(metrics_of(row.at("f1")));
        const double expected = row.at("avg_f1").get<double>();
        require(std::abs(report.average_f1 * 100.0 - expected) <= kCellTolerance,
                row.at("model").get<std::string>() + ": avg F1 " +
                    std::to_string(report.average_f1 * 100.0) + " vs cell " +
                    std::to_string(expected));
        ++cells;
    }
    for (const auto& row : doc.at("multi_task")) {
        const RunReport baseline = aggregate_report(metrics_of(row.at("baseline_f1")));
        const RunReport report = aggregate_report(metrics_of(row.at("f1")), &baseline);
        const std::string model = row.at("model").get<std::string>();

        const double expected_avg = row.at("avg_f1").get<double>();
        require(std::abs(report.average_f1 * 100.0 - expected_avg) <= kCellTolerance,
                model + ": avg F1 vs cell " + std::to_string(expected_avg));
        ++cells;
        for (TaskKind task : kAllTasks) {
            const double expected_drop =
                row.at("drop_pct").at(std::string(task_name(task))).get<double>();
            const double actual = report.task_drop_pct[static_cast<std::size_t>(task)];
            require(std::abs(actual - expected_drop) <= kCellTolerance,
                    model + " " + std::string(task_name(task)) + ": drop " +
                        std::to_string(actual) + " vs cell " + std::to_string(expected_drop));
            ++cells;
        }
        const double expected_avg_drop = row.at("avg_drop_pct").get<double>();
        require(std::abs(report.avg_drop_of_average_f1 - expected_avg_drop) <= kCellTolerance,
                model + ": average drop " + std::to_string(report.avg_drop_of_average_f1) +
                    " vs cell " + std::to_string(expected_avg_drop));
        ++cells;
    }
    return std::to_string(cells) + " published cells reproduced within ±0.005";
}

std::string criterion_retrieval_invariants() {
    const auto started = std::chrono::steady_clock::now();

    // 1000-record synthetic blend: 4 tasks x (247 + 3 duplicate sentences).
    FixtureSpec spec;
    spec.train_per_task = 247;
    spec.seed = 99;
    std::vector<Corpus> trains;
    for (TaskKind task : kAllTasks) trains.push_back(generate_fixture_corpora(task, spec)[0]);
    const BlendedCorpus blended = blend(trains, 1234);
    require(blended.records.size() == 1000, "blend size != 1000");

    EmbedderSpec embedder;  // hashed-lexical, dim 2048
    const ExampleIndex index = build_index(blended.records, embedder, "fp");
    std::map<std::string, const Record*> by_id;
    for (const auto& record : blended.records) by_id[record.id] = &record;

    RetrievalMode train_mode;
    train_mode.phase = RetrievalMode::Phase::Train;

    std::size_t checked = 0;
    for (const auto& query : blended.records) {
        const auto hits = retrieve(index, query, train_mode);
        require(hits.size() == 1, "k=1 retrieval returned " + std::to_string(hits.size()));
        const Record& hit_record = *by_id.at(hits[0].record_id);

        require(hit_record.task == query.task, "task purity violated for " + query.id);
        require(hits[0].record_id != query.id, "self id returned for " + query.id);
        require(normalize_text(hit_record.text) != normalize_text(query.text),
                "same-sentence entry returned for " + query.id);

        // Brute-force argmax with the documented tie-break.
        const Vector qv = embed(embedder, retrieval_sentence(query));
        std::string best_id;
        double best_sim = -2.0;
        for (const auto& entry : index.entries) {
            if (entry.task != query.task) continue;
            if (entry.record_id == query.id ||
                entry.sentence_norm == normalize_text(query.text))
                continue;
            const double sim = cosine(qv, entry.key_vector);
            if (sim > best_sim || (sim == best_sim && entry.record_id < best_id)) {
                best_sim = sim;
                best_id = entry.record_id;
            }
        }
        require(hits[0].record_id == best_id,
                "top-1 mismatch vs brute force for " + query.id);
        require(hits[0].similarity == best_sim, "similarity mismatch for " + query.id);
        ++checked;
    }

    // Random baseline reproduces exactly under a fixed seed.
    RetrievalMode random_mode = train_mode;
    random_mode.baseline = RetrievalMode::Baseline::Random;
    random_mode.seed = 7;
    for (std::size_t i = 0; i < blended.records.size(); i += 25) {
        const auto a = retrieve(index, blended.records[i], random_mode);
        const auto b = retrieve(index, blended.records[i], random_mode);
        require(a[0].record_id == b[0].record_id, "random baseline not reproducible");
        const Record& hit_record = *by_id.at(a[0].record_id);
        require(hit_record.task == blended.records[i].task, "random baseline task purity");
        require(a[0].record_id != blended.records[i].id, "random baseline self-exclusion");
    }

    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    require(seconds < 30.0, "runtime " + std::to_string(seconds) + "s exceeds 30s");
    std::ostringstream detail_msg;
    detail_msg << checked << "/1000 train-mode retrievals self-excluding, task-pure and "
               << "brute-force-exact; random baseline reproducible; " << std::fixed
               << std::setprecision(2) << seconds << "s";
    return detail_msg.str();
}

std::string criterion_round_trip() {
    std::size_t checked = 0;
    for (TaskKind task : kAllTasks) {
        const auto splits = generate_fixture_corpora(task, FixtureSpec{});
        for (const auto& corpus : splits) {
            for (const auto& record : corpus.records) {
                const Prediction pred =
                    parse_generation(task, serialize_gold(record.gold), {}, record.id);
                require(pred.status == ParseStatus::Ok,
                        "round-trip parse not ok for " + record.id);
                require(*pred.value == record.gold, "round-trip value mismatch for " + record.id);
                ++checked;
            }
        }
    }
    return std::to_string(checked) + " fixture gold outputs, zero failures";
}

std::string criterion_end_to_end() {
    Scratch dir("e2e");
    require(run_cli("fixtures --out " + dir.str() + " --seed 17",
                    dir.file("fixtures.log")) == 0,
            "fixtures subcommand failed");
    require(run_cli("validate --config " + dir.file("config.json"),
                    dir.file("validate.log")) == 0,
            "validate subcommand failed");
    require(run_cli("run --config " + dir.file("config.json"), dir.file("run.log")) == 0,
            "oracle run failed");

    const RunReport oracle = report_from_file(dir.file("out/report.json"));
    for (const auto& m : oracle.tasks)
        require(m.precision == 1.0 && m.recall == 1.0 && m.f1 == 1.0,
                std::string(task_name(m.task)) + " not perfect under the oracle endpoint");

    auto config = nlohmann::json::parse(detail::read_file(dir.file("config.json")));
    config["endpoint"] = {{"base_url", "mock://copy"}, {"model", "copy"}};
    config["eval_split"] = "train";
    config["out_dir"] = "out_copy";
    detail::write_file(dir.file("config_copy.json"), config.dump());
    require(run_cli("run --config " + dir.file("config_copy.json"),
                    dir.file("run_copy.log")) == 0,
            "copy run failed");

    const RunReport copy = report_from_file(dir.file("out_copy/report.json"));
    bool any_below = false;
    std::ostringstream copy_f1;
    for (const auto& m : copy.tasks) {
        if (m.f1 < 1.0) any_below = true;
        copy_f1 << " " << task_name(m.task) << "=" << std::fixed << std::setprecision(2)
                << m.f1 * 100.0;
    }
    require(any_below, "copy endpoint scored 1.0 everywhere; shortcut not detectable");
    return "oracle run all-1.0; copy-shortcut run degraded (F1:" + copy_f1.str() + ")";
}

std::string criterion_single_label_identity() {
    std::mt19937_64 rng(7);
    std::size_t runs = 0;
    for (TaskKind task : {TaskKind::RE, TaskKind::UC}) {
        for (int round = 0; round < 50; ++round) {
            const std::size_t n = 1 + detail::uniform_below(rng, 200);
            Corpus gold{task, "test", {}};
            std::vector<Prediction> preds;
            for (std::size_t i = 0; i < n; ++i) {
                const std::string id = "r" + std::to_string(i);
                Record record;
                record.id = id;
                record.task = task;
                record.text = "s";
                if (task == TaskKind::RE) {
                    record.re_head = "h";
                    record.re_tail = "t";
                }
                record.gold = random_gold(rng, task);
                gold.records.push_back(std::move(record));
                Prediction pred;
                pred.record_id = id;
                pred.task = task;
                if (detail::uniform_below(rng, 8) == 0) {
                    pred.status = ParseStatus::Malformed;
                } else {
                    pred.status = ParseStatus::Ok;
                    pred.value = random_gold(rng, task);
                }
                preds.push_back(std::move(pred));
            }
            const TaskMetrics m = score_task(gold, preds);
            require(m.precision == m.recall && m.recall == m.f1,
                    "identity violated: P=" + std::to_string(m.precision) +
                        " R=" + std::to_string(m.recall) + " F1=" + std::to_string(m.f1));
            ++runs;
        }
    }
    return std::to_string(runs) + " randomized RE/UC runs with P = R = F1 exactly";
}

std::string criterion_embedding_sanity() {
    std::mt19937_64 rng(31337);
    const std::vector<std::string> pool = {
        "ginger",  "ginseng",  "melatonin", "lavender", "nausea",   "dizziness",
        "rash",    "bleeding", "patient",   "reports",  "daily",    "started",
        "stopped", "dose",     "tea",       "extract",  "vitamin",  "warfarin",
        "aspirin", "sleep",    "anxiety",   "notes",    "continue", "since"};
    // The 0.05 agreement bound is statistical: a dim-2048 signed sketch has a
    // ~1/sqrt(2048) = 0.022 collision-noise floor, so the bound is checked as
    // a quantile over the sample, not as a max.
    const int n_pairs = 1000;
    int within_bound = 0;
    double sum_sq = 0.0;
    for (int i = 0; i < n_pairs; ++i) {
        std::string a, b;
        const std::size_t na = 3 + detail::uniform_below(rng, 10);
        const std::size_t nb = 3 + detail::uniform_below(rng, 10);
        for (std::size_t w = 0; w < na; ++w)
            a += (w ? " " : "") + pool[detail::uniform_below(rng, pool.size())];
        for (std::size_t w = 0; w < nb; ++w)
            b += (w ? " " : "") + pool[detail::uniform_below(rng, pool.size())];
        const double hashed = cosine(embed_hashed(a, 2048), embed_hashed(b, 2048));
        const double err = std::abs(hashed - sparse_cosine(a, b));
        if (err <= 0.05) ++within_bound;
        sum_sq += err * err;
    }
    const double rms = std::sqrt(sum_sq / n_pairs);
    require(within_bound >= n_pairs * 95 / 100,
            "only " + std::to_string(within_bound) + "/" + std::to_string(n_pairs) +
                " pairs within 0.05");
    require(rms <= 0.025, "rms error " + std::to_string(rms) + " exceeds the noise bound");

    std::size_t self_checked = 0;
    for (TaskKind task : kAllTasks) {
        for (const auto& corpus : generate_fixture_corpora(task, FixtureSpec{})) {
            for (const auto& record : corpus.records) {
                if (normalize_text(record.text).empty()) continue;
                const Vector v = embed_hashed(record.text, 2048);
                require(std::abs(cosine(v, v) - 1.0) <= 1e-9,
                        "cosine(x,x) off unit for " + record.id);
                ++self_checked;
            }
        }
    }
    std::ostringstream detail_msg;
    detail_msg << within_bound << "/" << n_pairs << " random pairs within 0.05 of the exact "
               << "oracle (rms " << std::setprecision(3) << rms << "); cosine(x,x)=1±1e-9 on "
               << self_checked << " fixture sentences";
    return detail_msg.str();
}

std::string criterion_determinism() {
    Scratch dir("determinism");
    require(run_cli("fixtures --out " + dir.str() + " --seed 23", dir.file("fx.log")) == 0,
            "fixtures subcommand failed");

    auto config = nlohmann::json::parse(detail::read_file(dir.file("config.json")));
    config["out_dir"] = "out_x";
    detail::write_file(dir.file("config_x.json"), config.dump());
    config["out_dir"] = "out_y";
    detail::write_file(dir.file("config_y.json"), config.dump());

    require(run_cli("run --config " + dir.file("config_x.json"), dir.file("x.log")) == 0,
            "first run failed");
    require(run_cli("run --config " + dir.file("config_y.json"), dir.file("y.log")) == 0,
            "second run failed");

    for (const std::string name :
         {"blended.jsonl", "index.json", "prompts.jsonl", "generations.jsonl",
          "predictions.jsonl", "metrics.json", "report.json"}) {
        require(detail::read_file(dir.file("out_x/" + name)) ==
                    detail::read_file(dir.file("out_y/" + name)),
                name + " differs between identically-configured runs");
    }
    Manifest mx(dir.file("out_x"));
    Manifest my(dir.file("out_y"));
    require(mx.entries().size() == my.entries().size(), "manifest length mismatch");
    for (std::size_t i = 0; i < mx.entries().size(); ++i) {
        require(mx.entries()[i].stage == my.entries()[i].stage, "manifest stage order differs");
        require(mx.entries()[i].content_hash == my.entries()[i].content_hash,
                "manifest hash mismatch at stage " + mx.entries()[i].stage);
    }
    return "two seeded runs byte-identical across all artifacts; manifest hashes equal";
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<std::string()>>> criteria = {
        {"metric-oracle-equivalence", criterion_metric_oracle},
        {"derived-statistics-reproduction", criterion_derived_statistics},
        {"retrieval-invariants", criterion_retrieval_invariants},
        {"round-trip-closure", criterion_round_trip},
        {"end-to-end-oracle-run", criterion_end_to_end},
        {"single-label-identity", criterion_single_label_identity},
        {"embedding-sanity", criterion_embedding_sanity},
        {"determinism", criterion_determinism},
    };

    int failures = 0;
    for (const auto& [name, run] : criteria) {
        try {
            const std::string detail_msg = run();
            std::cout << "[PASS] " << name << " — " << detail_msg << "\n";
        } catch (const CheckFailure& failure) {
            std::cout << "[FAIL] " << name << " — " << failure.message << "\n";
            ++failures;
        } catch (const std::exception& e) {
            std::cout << "[FAIL] " << name << " — unexpected error: " << e.what() << "\n";
            ++failures;
        }
    }
    return failures == 0 ? 0 : 1;
}
