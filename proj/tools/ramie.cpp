// Command-line front end for the pipeline: fixtures, split validation,
// stage runner, and the training-side exports.

#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ramie/fixtures.hpp"
#include "ramie/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPipelineError = 1;
constexpr int kExitConfigError = 2;

int run_guarded(const std::function<int()>& body) {
    try {
        return body();
    } catch (const ramie::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
    } catch (const ramie::SchemaError& e) {
        std::cerr << "schema error: " << e.what() << "\n";
    } catch (const ramie::LabelError& e) {
        std::cerr << "label error: " << e.what() << "\n";
    } catch (const ramie::UnknownLabelError& e) {
        std::cerr << "label error: " << e.what() << "\n";
    } catch (const ramie::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
    } catch (const ramie::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitPipelineError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitPipelineError;
    }
    return kExitConfigError;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"RAMIE: retrieval-augmented multi-task information extraction pipeline"};
    app.require_subcommand(1);

    // fixtures
    auto* fixtures = app.add_subcommand("fixtures", "generate the synthetic desk-scale corpus");
    std::string fixtures_out = "fixtures";
    ramie::FixtureSpec fixture_spec;
    fixtures->add_option("--out", fixtures_out, "output directory")->capture_default_str();
    fixtures->add_option("--seed", fixture_spec.seed, "generator seed")->capture_default_str();
    fixtures->add_option("--train", fixture_spec.train_per_task, "train records per task")
        ->capture_default_str();
    fixtures->add_option("--dev", fixture_spec.dev_per_task, "dev records per task")
        ->capture_default_str();
    fixtures->add_option("--test", fixture_spec.test_per_task, "test records per task")
        ->capture_default_str();

    // validate
    auto* validate = app.add_subcommand("validate", "validate corpora and split ratios");
    std::string validate_config;
    validate->add_option("--config", validate_config, "pipeline config file")->required();

    // run
    auto* run = app.add_subcommand("run", "run pipeline stages");
    std::string run_config;
    std::vector<std::string> run_stage_names;
    run->add_option("--config", run_config, "pipeline config file")->required();
    run->add_option("--stages", run_stage_names,
                    "subset of blend,index,prompts,generate,parse,score,report")
        ->delimiter(',');

    // export-train
    auto* export_train =
        app.add_subcommand("export-train", "export the instruction-tuning file and trainer config");
    std::string export_config;
    export_train->add_option("--config", export_config, "pipeline config file")->required();

    // train-config
    auto* train_config = app.add_subcommand("train-config", "write the fine-tuning defaults");
    std::string train_config_out = "training_config.txt";
    train_config->add_option("--out", train_config_out, "output file")->capture_default_str();

    // split
    auto* split = app.add_subcommand("split", "re-split a single corpus file (convenience; "
                                              "never applied to pre-split corpora)");
    std::string split_input, split_task, split_out = ".";
    std::uint64_t split_seed = 0;
    split->add_option("--input", split_input, "corpus file")->required();
    split->add_option("--task", split_task, "task of the corpus (NER|RE|TE|UC)")->required();
    split->add_option("--out-dir", split_out, "output directory")->capture_default_str();
    split->add_option("--seed", split_seed, "shuffle seed")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    if (fixtures->parsed()) {
        return run_guarded([&] {
            ramie::write_fixtures(fixtures_out, fixture_spec);
            std::cout << "fixtures written to " << fixtures_out << "\n";
            return kExitOk;
        });
    }

    if (validate->parsed()) {
        return run_guarded([&] {
            const auto config = ramie::load_config(validate_config);
            for (const auto& report : ramie::run_validate(config)) {
                std::cout << ramie::split_report_to_json(report).dump() << "\n";
                for (const auto& warning : report.warnings)
                    std::cerr << "warning [" << ramie::task_name(report.task) << "] " << warning
                              << "\n";
            }
            return kExitOk;
        });
    }

    if (run->parsed()) {
        return run_guarded([&] {
            const auto config = ramie::load_config(run_config);
            const auto& stages =
                run_stage_names.empty() ? ramie::kAllStages : run_stage_names;
            ramie::run_stages(config, stages);
            return kExitOk;
        });
    }

    if (export_train->parsed()) {
        return run_guarded([&] {
            const auto config = ramie::load_config(export_config);
            ramie::run_export_train(config);
            return kExitOk;
        });
    }

    if (train_config->parsed()) {
        return run_guarded([&] {
            ramie::write_training_config(ramie::TrainingExportConfig{}, train_config_out);
            return kExitOk;
        });
    }

    if (split->parsed()) {
        return run_guarded([&] {
            const ramie::TaskKind task = ramie::parse_task(split_task);
            const ramie::Corpus corpus = ramie::load_corpus(split_input, task, "all");
            const auto splits = ramie::split_corpus(corpus, {}, split_seed);
            for (const auto& part : splits) {
                const std::string path =
                    split_out + "/" + ramie::fixture_corpus_filename(task, part.split);
                ramie::save_corpus(part, path);
                std::cout << part.split << ": " << part.records.size() << " records -> " << path
                          << "\n";
            }
            return kExitOk;
        });
    }

    return kExitOk;
}
