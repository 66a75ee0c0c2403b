#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "ramie/prompting.hpp"
#include "test_util.hpp"

using namespace ramie;
using ramie_test::TempDir;

TEST_CASE("serialize_gold emits the canonical response grammar") {
    CHECK(serialize_gold(UsageStatus::Continue) == "['continue']");
    CHECK(serialize_gold(RelationType::Negative) == "['negative']");
    CHECK(serialize_gold(RelationType::NotRelated) == "['not_related']");
    CHECK(serialize_gold(NerMentions{}) == "[]");
    CHECK(serialize_gold(TeTriples{}) == "[]");

    CHECK(serialize_gold(NerMentions{make_mention("ginger", EntityType::Ginger),
                                     make_mention("bleeding", EntityType::Event)}) ==
          "[{'ginger': 'ginger'}, {'bleeding': 'event'}]");

    CHECK(serialize_gold(TeTriples{make_triple("ginseng tea", RelationType::Positive,
                                               "constipation")}) ==
          "[{'head entity': 'ginseng tea', 'relation': 'positive', 'tail entity': "
          "'constipation'}]");
}

TEST_CASE("serialize_gold escapes quotes and stays injective") {
    const std::string serialized =
        serialize_gold(NerMentions{make_mention("o'brien tea", EntityType::GreenTea)});
    CHECK(serialized == "[{'o\\'brien tea': 'green tea'}]");

    std::mt19937_64 rng(41);
    for (TaskKind task : kAllTasks) {
        std::set<std::string> texts;
        std::vector<GoldOutput> golds;
        for (int i = 0; i < 200; ++i) golds.push_back(ramie_test::random_gold(rng, task));
        for (const auto& g : golds) texts.insert(serialize_gold(g));
        std::set<GoldOutput> distinct;
        for (const auto& g : golds) distinct.insert(g);
        CHECK(texts.size() == distinct.size());
    }
}

TEST_CASE("default templates enumerate each label exactly once") {
    for (const auto& tmpl : default_templates()) {
        CHECK_NOTHROW(validate_template(tmpl));
        for (const auto& label : task_label_vocabulary(tmpl.task))
            CHECK(tmpl.instruction_text.find("'" + label + "'") != std::string::npos);
    }
    PromptTemplate corrupted = default_templates()[1];
    corrupted.instruction_text += " pick 'negative' if unsure.";
    CHECK_THROWS_AS(validate_template(corrupted), ConfigError);
}

TEST_CASE("templates round-trip through the template directory") {
    TempDir dir;
    write_default_templates(dir.str());
    const auto loaded = load_templates(dir.str());
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(loaded[i].task == default_templates()[i].task);
        CHECK(loaded[i].instruction_text == default_templates()[i].instruction_text);
    }
    CHECK_THROWS_AS(load_template(dir.str() + "/missing", TaskKind::NER), IoError);
}

TEST_CASE("build_prompt renders instruction, example and input blocks") {
    const Record example = ramie_test::make_record(
        "uc-train-007", TaskKind::UC, "note stop b6 b12 folic acid today",
        UsageStatus::Discontinue);
    const Record input = ramie_test::make_record(
        "uc-test-001", TaskKind::UC, "continue Vitamin E selenium discharge",
        UsageStatus::Continue);
    const PromptTemplate& tmpl = default_templates()[static_cast<std::size_t>(TaskKind::UC)];

    const Prompt prompt = build_prompt(tmpl, &example, input);
    CHECK(prompt.record_id == "uc-test-001");
    CHECK(prompt.example_id == "uc-train-007");
    CHECK(prompt.rendered_text.rfind(tmpl.instruction_text, 0) == 0);
    CHECK(prompt.rendered_text.find("Example:\nnote stop b6 b12 folic acid today\n"
                                    "Response: ['discontinue']") != std::string::npos);
    CHECK(prompt.rendered_text.find("Input:\ncontinue Vitamin E selenium discharge") !=
          std::string::npos);
    CHECK(prompt.rendered_text.rfind("\nResponse:") == prompt.rendered_text.size() - 10);

    SECTION("byte-stable across calls") {
        const Prompt again = build_prompt(tmpl, &example, input);
        CHECK(again.rendered_text == prompt.rendered_text);
    }
    SECTION("no-RAG mode elides the example block") {
        const Prompt bare = build_prompt(tmpl, nullptr, input);
        CHECK_FALSE(bare.example_id.has_value());
        CHECK(bare.rendered_text.find("Example:") == std::string::npos);
        CHECK(bare.rendered_text.find("Input:\ncontinue Vitamin E selenium discharge") !=
              std::string::npos);
    }
}

TEST_CASE("RE prompts render the relationship question") {
    Record input = ramie_test::make_record(
        "re-test-001", TaskKind::RE, "she has tried melatonin but it is increased the morning "
                                     "dizziness .",
        RelationType::Negative);
    input.re_head = "melatonin";
    input.re_tail = "dizziness";
    const PromptTemplate& tmpl = default_templates()[static_cast<std::size_t>(TaskKind::RE)];
    const Prompt prompt = build_prompt(tmpl, nullptr, input);

    CHECK(prompt.rendered_text.find(
              "The relationship between melatonin and dizziness is?\nResponse:") !=
          std::string::npos);

    SECTION("the example sentence carries its own question") {
        Record example = ramie_test::make_record("re-train-002", TaskKind::RE,
                                                 "ginkgo studied for tinnitus",
                                                 RelationType::Positive);
        example.re_head = "ginkgo";
        example.re_tail = "tinnitus";
        const Prompt with_example = build_prompt(tmpl, &example, input);
        CHECK(with_example.rendered_text.find(
                  "ginkgo studied for tinnitus The relationship between ginkgo and tinnitus "
                  "is?\nResponse: ['positive']") != std::string::npos);
    }
}

TEST_CASE("build_prompt rejects task mismatches") {
    const Record uc = ramie_test::make_record("uc-1", TaskKind::UC, "continue ginger",
                                              UsageStatus::Continue);
    const Record ner = ramie_test::make_record(
        "ner-1", TaskKind::NER, "ginger noted",
        NerMentions{make_mention("ginger", EntityType::Ginger)});
    const auto& templates = default_templates();
    CHECK_THROWS_AS(build_prompt(templates[3], &ner, uc), TaskMismatchError);
    CHECK_THROWS_AS(build_prompt(templates[0], nullptr, uc), TaskMismatchError);
}

TEST_CASE("rendered prompts contain the task vocabulary once in the instruction") {
    const Record example = ramie_test::make_record(
        "ner-train-001", TaskKind::NER, "ginger and bleeding noted",
        NerMentions{make_mention("ginger", EntityType::Ginger),
                    make_mention("bleeding", EntityType::Event)});
    const Record input = ramie_test::make_record(
        "ner-test-001", TaskKind::NER, "green tea started",
        NerMentions{make_mention("green tea", EntityType::GreenTea)});
    const auto& tmpl = default_templates()[0];
    const Prompt prompt = build_prompt(tmpl, &example, input);

    // The instruction block (everything before the first slot) lists every
    // label exactly once even though example/input text repeats surfaces.
    const std::string instruction =
        prompt.rendered_text.substr(0, tmpl.instruction_text.size());
    for (const auto& label : task_label_vocabulary(TaskKind::NER)) {
        const std::string quoted = "'" + label + "'";
        std::size_t count = 0;
        for (auto pos = instruction.find(quoted); pos != std::string::npos;
             pos = instruction.find(quoted, pos + 1))
            ++count;
        CHECK(count == 1);
    }
}
