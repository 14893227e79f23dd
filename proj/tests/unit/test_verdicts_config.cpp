#include <doctest.h>

#include "core/config.hpp"
#include "core/error.hpp"
#include "core/util.hpp"
#include "core/verdicts.hpp"
#include "support/tmpdir.hpp"

using namespace mloc;

TEST_CASE("verdicts append and load round-trip") {
    testsupport::TmpDir tmp("verdicts");
    auto path = tmp.file("v.jsonl");

    verdicts::VerdictRecord r1{"LA;", 1, std::nullopt, "accepted", "looks right", ""};
    verdicts::VerdictRecord r2{"LA;", 1, std::string(".method public a()V"), "rejected",
                               "wrong method", ""};
    verdicts::append_verdict(path, r1);
    verdicts::append_verdict(path, r2);

    auto records = verdicts::load_verdicts(path);
    REQUIRE(records.size() == 2);
    CHECK(records[0].class_name == "LA;");
    CHECK_FALSE(records[0].method_signature.has_value());
    CHECK(records[1].method_signature == ".method public a()V");
    CHECK(records[0].decision == "accepted");
    CHECK_FALSE(records[0].timestamp.empty());
}

TEST_CASE("missing verdict file is an empty set") {
    CHECK(verdicts::load_verdicts("/nonexistent/v.jsonl").empty());
}

TEST_CASE("corrupt verdict lines are rejected") {
    testsupport::TmpDir tmp("verdicts2");
    auto path = tmp.file("v.jsonl");
    write_file(path, "{\"class\": \"LA;\", \"behavior_id\": 1, \"decision\": \"accepted\"}\n"
                     "this is not json\n");
    try {
        verdicts::load_verdicts(path);
        FAIL("expected CorruptVerdictFile");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::CorruptVerdictFile);
    }

    write_file(path, "{\"class\": \"LA;\", \"behavior_id\": 1, \"decision\": \"perhaps\"}\n");
    CHECK_THROWS_AS(verdicts::load_verdicts(path), Error);
}

TEST_CASE("effective verdicts keep the last record per key") {
    std::vector<verdicts::VerdictRecord> records = {
        {"LA;", 1, std::nullopt, "rejected", "", "t1"},
        {"LA;", 1, std::nullopt, "accepted", "", "t2"},
        {"LA;", 2, std::nullopt, "rejected", "", "t3"},
    };
    auto effective = verdicts::effective_verdicts(records);
    CHECK(effective.size() == 2);
    CHECK(effective.at(verdicts::verdict_key("LA;", 1, std::nullopt)).decision == "accepted");
}

TEST_CASE("config defaults and setters") {
    config::RunConfig c;
    CHECK(c.model == "gpt-4.1");
    CHECK(c.temperature == 0.0);
    CHECK(c.max_in_flight == 4);
    CHECK(c.token_budget == 100000);
    CHECK(c.backend.empty());

    config::set_config_value(c, "backend", "mock");
    config::set_config_value(c, "temperature", "0.7");
    config::set_config_value(c, "max_in_flight", "16");
    config::set_config_value(c, "filter", "Lcom/a/");
    config::set_config_value(c, "filter", "Lcom/b/");
    CHECK(c.backend == "mock");
    CHECK(c.temperature == doctest::Approx(0.7));
    CHECK(c.max_in_flight == 16);
    CHECK(c.filter == std::vector<std::string>{"Lcom/a/", "Lcom/b/"});
    CHECK(config::get_config_value(c, "max_in_flight") == "16");
}

TEST_CASE("config rejects unknown keys and out-of-range values") {
    config::RunConfig c;
    CHECK_THROWS_AS(config::set_config_value(c, "no_such_key", "1"), Error);
    CHECK_THROWS_AS(config::set_config_value(c, "temperature", "-1"), Error);
    CHECK_THROWS_AS(config::set_config_value(c, "temperature", "abc"), Error);
    CHECK_THROWS_AS(config::set_config_value(c, "max_in_flight", "0"), Error);
    CHECK_THROWS_AS(config::set_config_value(c, "gate_threshold", "101"), Error);
    CHECK_THROWS_AS(config::set_config_value(c, "backend", "telepathy"), Error);
    CHECK_THROWS_AS(config::set_config_value(c, "unknown_family_policy", "maybe"), Error);
}

TEST_CASE("config file parsing with nested retry and filter") {
    testsupport::TmpDir tmp("config");
    auto path = tmp.file("mloc.json");
    write_file(path, R"({
        "backend": "mock",
        "model": "phi-4",
        "temperature": 0.2,
        "retry": {"max_attempts": 5, "base_delay_ms": 10, "jitter_ms": 0},
        "filter": ["Lcom/demo/"],
        "gate_threshold": 50
    })");
    config::RunConfig c = config::load_config(path);
    CHECK(c.backend == "mock");
    CHECK(c.model == "phi-4");
    CHECK(c.retry.max_attempts == 5);
    CHECK(c.retry.base_delay_ms == 10);
    CHECK(c.filter == std::vector<std::string>{"Lcom/demo/"});
    CHECK(c.gate_threshold == 50);

    write_file(path, R"({"unknown_key": 1})");
    CHECK_THROWS_AS(config::load_config(path), Error);

    write_file(path, R"({"taxonomy_path": "/does/not/exist.txt"})");
    CHECK_THROWS_AS(config::load_config(path), Error);
}
