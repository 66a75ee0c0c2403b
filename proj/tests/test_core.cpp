#include <catch2/catch_amalgamated.hpp>

#include "ramie/core.hpp"
#include "test_util.hpp"

using namespace ramie;

TEST_CASE("normalize_text canonicalizes case and whitespace") {
    CHECK(normalize_text("  Green   Tea ") == "green tea");
    CHECK(normalize_text("melatonin") == "melatonin");
    CHECK(normalize_text("Folic Acid\t400mg") == "folic acid 400mg");
    CHECK(normalize_text("") == "");
    CHECK(normalize_text(" \t\r\n ") == "");
    CHECK(normalize_text("a\nb\r\nc") == "a b c");
}

TEST_CASE("normalize_text is idempotent") {
    std::mt19937_64 rng(101);
    for (int i = 0; i < 500; ++i) {
        const std::string raw = ramie_test::random_garbage(rng, 80);
        const std::string once = normalize_text(raw);
        CHECK(normalize_text(once) == once);
    }
}

TEST_CASE("entity type parser accepts the closed set modulo normalization") {
    CHECK(parse_entity_type("folic_acid") == EntityType::FolicAcid);
    CHECK(entity_type_name(parse_entity_type("folic_acid")) == "folic acid");
    CHECK(parse_entity_type("EVENT") == EntityType::Event);
    CHECK(parse_entity_type("  Saw   Palmetto ") == EntityType::SawPalmetto);
    CHECK(parse_entity_type("ginseng") == EntityType::Ginseng);
    CHECK_THROWS_AS(parse_entity_type("turmeric"), UnknownLabelError);
    CHECK_THROWS_AS(parse_entity_type(""), UnknownLabelError);

    CHECK(entity_type_names().size() == kNumEntityTypes);
    for (const auto& name : entity_type_names()) {
        CHECK(entity_type_name(parse_entity_type(name)) == name);
        std::string underscored = name;
        for (char& ch : underscored)
            if (ch == ' ') ch = '_';
        CHECK(entity_type_name(parse_entity_type(underscored)) == name);
    }
}

TEST_CASE("relation parser accepts exactly three values") {
    CHECK(parse_relation("positive") == RelationType::Positive);
    CHECK(parse_relation("NEGATIVE") == RelationType::Negative);
    CHECK(parse_relation("not_related") == RelationType::NotRelated);
    CHECK(parse_relation("not related") == RelationType::NotRelated);
    CHECK(relation_name(RelationType::NotRelated) == "not_related");
    CHECK_THROWS_AS(parse_relation("neutral"), UnknownLabelError);
}

TEST_CASE("usage parser accepts exactly four values") {
    CHECK(parse_usage("continue") == UsageStatus::Continue);
    CHECK(parse_usage("Discontinue") == UsageStatus::Discontinue);
    CHECK(parse_usage("uncertain") == UsageStatus::Uncertain);
    CHECK(parse_usage("start") == UsageStatus::Start);
    CHECK_THROWS_AS(parse_usage("restart"), UnknownLabelError);
    CHECK_THROWS_AS(parse_usage("stopped"), UnknownLabelError);
}

TEST_CASE("mention and triple constructors reject empty surfaces") {
    CHECK(make_mention(" Ginger  Tea ", EntityType::Ginger).surface == "ginger tea");
    CHECK_THROWS_AS(make_mention("  ", EntityType::Event), Error);
    CHECK_THROWS_AS(make_triple("", RelationType::Positive, "rash"), Error);
    CHECK_THROWS_AS(make_triple("ginger", RelationType::Positive, " \t"), Error);
}

TEST_CASE("gold output variant tag tracks the task") {
    CHECK(task_of(GoldOutput{NerMentions{}}) == TaskKind::NER);
    CHECK(task_of(GoldOutput{RelationType::Positive}) == TaskKind::RE);
    CHECK(task_of(GoldOutput{TeTriples{}}) == TaskKind::TE);
    CHECK(task_of(GoldOutput{UsageStatus::Start}) == TaskKind::UC);
}

TEST_CASE("record validation enforces the invariants") {
    Record ok = ramie_test::make_record("re-1", TaskKind::RE, "some sentence",
                                        RelationType::Negative);
    CHECK_NOTHROW(validate_record(ok));

    SECTION("gold tag must match the task") {
        Record bad = ok;
        bad.gold = UsageStatus::Start;
        CHECK_THROWS_AS(validate_record(bad), SchemaError);
    }
    SECTION("RE records need head and tail") {
        Record bad = ok;
        bad.re_tail.reset();
        CHECK_THROWS_AS(validate_record(bad), SchemaError);
    }
    SECTION("non-RE records must not carry head/tail") {
        Record bad = ramie_test::make_record("uc-1", TaskKind::UC, "text",
                                             UsageStatus::Continue);
        bad.re_head = "x";
        CHECK_THROWS_AS(validate_record(bad), SchemaError);
    }
    SECTION("ids must be non-empty") {
        Record bad = ok;
        bad.id.clear();
        CHECK_THROWS_AS(validate_record(bad), SchemaError);
    }
}

TEST_CASE("task names round-trip") {
    for (TaskKind task : kAllTasks) CHECK(parse_task(task_name(task)) == task);
    CHECK_THROWS_AS(parse_task("NERR"), UnknownLabelError);
}
