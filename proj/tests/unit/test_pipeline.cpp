#include <doctest.h>

#include <set>

#include "core/behavior_kb.hpp"
#include "core/error.hpp"
#include "core/evaluation.hpp"
#include "core/gateway.hpp"
#include "core/pipeline.hpp"
#include "core/prompt.hpp"
#include "core/report.hpp"
#include "core/smali.hpp"
#include "core/util.hpp"

using namespace mloc;
using namespace mloc::pipeline;
using mloc::response::Phase1Verdict;

namespace {

// three-class in-memory corpus: A and B and C, one method name each per
// the hand-enumerated mock scenario, plus a benign D
smali::Corpus abc_corpus() {
    auto make = [](const std::string& name, const std::vector<std::string>& methods) {
        std::string text = ".class public L" + name + ";\n.super Ljava/lang/Object;\n";
        for (const std::string& m : methods) {
            text += ".method public " + m + "()V\n    return-void\n.end method\n";
        }
        return text;
    };
    smali::Corpus corpus;
    corpus.apk_id = "abc";
    std::vector<std::pair<std::string, std::vector<std::string>>> defs = {
        {"A", {"m1", "m2"}}, {"B", {"m3", "m4"}}, {"C", {"m5"}}, {"D", {"m6"}}};
    for (const auto& [name, methods] : defs) {
        corpus.classes.push_back(smali::parse_smali_file(make(name, methods), name + ".smali"));
    }
    corpus.class_count = 4;
    corpus.method_count = 6;
    return corpus;
}

gateway::Gateway mock_gateway(const std::string& rules_json, int max_in_flight = 4) {
    return gateway::Gateway(gateway::make_mock_backend(gateway::parse_mock_rules(rules_json)),
                            gateway::RetryPolicy{1, 0, 0}, max_in_flight, std::nullopt,
                            std::nullopt);
}

// phase1 yes for A, B, C on behavior 1; phase2 names A.m1, A.m2, B.m3;
// everything else benign
const char* kAbcRules = R"([
    {"contains": ["Input - First Phase Explanation", "LA;"],
     "response": "METHOD: .method public m1()V\nROLE: r1\nCONFIDENCE: 90\nMETHOD: .method public m2()V\nROLE: r2\nCONFIDENCE: 80\n"},
    {"contains": ["Input - First Phase Explanation", "LB;"],
     "response": "METHOD: .method public m3()V\nROLE: r3\nCONFIDENCE: 70\n"},
    {"contains": ["Input - First Phase Explanation", "LC;"],
     "response": ""},
    {"contains": ["LA;", "Privacy Stealing"],
     "response": "IS_MALICIOUS: yes\nCONFIDENCE: 95\nEXPLANATION: a exfiltrates"},
    {"contains": ["LB;", "Privacy Stealing"],
     "response": "IS_MALICIOUS: yes\nCONFIDENCE: 85\nEXPLANATION: b exfiltrates"},
    {"contains": ["LC;", "Privacy Stealing"],
     "response": "IS_MALICIOUS: yes\nCONFIDENCE: 75\nEXPLANATION: c exfiltrates"},
    {"contains": [], "response": "IS_MALICIOUS: no\nCONFIDENCE: 90\nEXPLANATION: benign"}
])";

}  // namespace

TEST_CASE("merge_chunk_verdicts follows the OR/max rules") {
    CHECK(merge_chunk_verdicts({{false, 90, "fine"}}) == Phase1Verdict{false, 90, "fine"});

    Phase1Verdict mixed = merge_chunk_verdicts({{false, 95, "fine"}, {true, 60, "bad part"}});
    CHECK(mixed.is_malicious);
    CHECK(mixed.confidence == 60);  // max over malicious chunks only
    CHECK(mixed.explanation.find("bad part") != std::string::npos);
    CHECK(mixed.explanation.find("fine") == std::string::npos);

    Phase1Verdict both = merge_chunk_verdicts({{true, 40, "first"}, {true, 80, "second"}});
    CHECK(both.is_malicious);
    CHECK(both.confidence == 80);
    CHECK(both.explanation.find("first") != std::string::npos);
    CHECK(both.explanation.find("second") != std::string::npos);
    CHECK(both.explanation.find("[chunk 1/2]") != std::string::npos);

    CHECK_THROWS_AS(merge_chunk_verdicts({}), Error);
}

TEST_CASE("run_malloc on the hand-enumerated mock scenario") {
    smali::Corpus corpus = abc_corpus();
    kb::Taxonomy taxonomy = kb::builtin_taxonomy();
    gateway::Gateway gw = mock_gateway(kAbcRules);
    prompt::PromptEngine engine;
    RunOptions options;
    options.model = "mock";

    report::AnalysisReport report = run_malloc(corpus, taxonomy, {1}, engine, gw, options);

    REQUIRE(report.findings.size() == 3);
    CHECK(report.findings[0].class_name == "LA;");
    CHECK(report.findings[1].class_name == "LB;");
    CHECK(report.findings[2].class_name == "LC;");
    CHECK(report.findings[0].methods.size() == 2);
    CHECK(report.findings[1].methods.size() == 1);
    CHECK(report.findings[2].methods.empty());  // phase2 legally named none
    CHECK(report.flagged_method_count == 3);    // m1, m2, m3
    CHECK(report.flagged_class_count == 3);
    CHECK(report.total_method_count == 6);
    CHECK(report.failures.empty());
    CHECK(report.workload_reduction == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("all-benign corpus yields zero findings and full workload reduction") {
    smali::Corpus corpus = abc_corpus();
    kb::Taxonomy taxonomy = kb::builtin_taxonomy();
    gateway::Gateway gw = mock_gateway(
        R"([{"contains": [], "response": "IS_MALICIOUS: no\nCONFIDENCE: 99\nEXPLANATION: ok"}])");
    prompt::PromptEngine engine;
    report::AnalysisReport report = run_malloc(corpus, taxonomy, {1, 9}, engine, gw, RunOptions{});
    CHECK(report.findings.empty());
    CHECK(report.flagged_method_count == 0);
    CHECK(report.workload_reduction == 1.0);
}

TEST_CASE("workload reduction arithmetic matches the published shape") {
    double wr = evaluation::workload_reduction(22, 165);
    CHECK(wr == doctest::Approx(1.0 - 22.0 / 165.0).epsilon(1e-15));
    CHECK(round4(wr) == doctest::Approx(0.8667).epsilon(1e-9));
    CHECK(format_percent(wr) == "87%");
}

TEST_CASE("gate threshold suppresses low-confidence phase-1 verdicts") {
    smali::Corpus corpus = abc_corpus();
    kb::Taxonomy taxonomy = kb::builtin_taxonomy();
    prompt::PromptEngine engine;
    RunOptions options;
    options.gate_threshold = 80;  // C fired at 75, stays out

    gateway::Gateway gw = mock_gateway(kAbcRules);
    report::AnalysisReport report = run_malloc(corpus, taxonomy, {1}, engine, gw, options);
    REQUIRE(report.findings.size() == 2);
    for (const auto& f : report.findings) {
        CHECK(f.class_confidence >= 80);
    }
}

TEST_CASE("empty behavior set is rejected") {
    smali::Corpus corpus = abc_corpus();
    kb::Taxonomy taxonomy = kb::builtin_taxonomy();
    prompt::PromptEngine engine;
    gateway::Gateway gw = mock_gateway(kAbcRules);
    try {
        run_malloc(corpus, taxonomy, {}, engine, gw, RunOptions{});
        FAIL("expected EmptyBehaviorSet");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::EmptyBehaviorSet);
    }
}

TEST_CASE("per-item failures never abort the run") {
    smali::Corpus corpus = abc_corpus();
    kb::Taxonomy taxonomy = kb::builtin_taxonomy();
    prompt::PromptEngine engine;
    // A answers garbage in phase1; everything else benign
    gateway::Gateway gw = mock_gateway(R"([
        {"contains": ["LA;", "Privacy Stealing"], "response": "total nonsense"},
        {"contains": [], "response": "IS_MALICIOUS: no\nCONFIDENCE: 90\nEXPLANATION: ok"}
    ])");
    report::AnalysisReport report = run_malloc(corpus, taxonomy, {1}, engine, gw, RunOptions{});
    CHECK(report.findings.empty());
    REQUIRE(report.failures.size() == 1);
    CHECK(report.failures[0].class_name == "LA;");
    CHECK(report.failures[0].stage == "phase1-parse");
}

TEST_CASE("parse failure budget aborts with ParseBudgetExceeded") {
    smali::Corpus corpus = abc_corpus();
    kb::Taxonomy taxonomy = kb::builtin_taxonomy();
    prompt::PromptEngine engine;
    gateway::Gateway gw = mock_gateway(R"([
        {"contains": ["LA;", "Privacy Stealing"], "response": "total nonsense"},
        {"contains": [], "response": "IS_MALICIOUS: no\nCONFIDENCE: 90\nEXPLANATION: ok"}
    ])");
    RunOptions options;
    options.parse_failure_budget = 0;
    try {
        run_malloc(corpus, taxonomy, {1}, engine, gw, options);
        FAIL("expected ParseBudgetExceeded");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ParseBudgetExceeded);
    }
}

TEST_CASE("parse retry issues a second gateway call") {
    smali::Corpus corpus = abc_corpus();
    kb::Taxonomy taxonomy = kb::builtin_taxonomy();
    prompt::PromptEngine engine;
    gateway::Gateway gw = mock_gateway(R"([
        {"contains": ["LA;", "Privacy Stealing"], "response": "garbage"},
        {"contains": [], "response": "IS_MALICIOUS: no\nCONFIDENCE: 90\nEXPLANATION: ok"}
    ])");
    run_malloc(corpus, taxonomy, {1}, engine, gw, RunOptions{});
    // 4 classes x 1 behavior + 1 parse retry for LA;
    CHECK(gw.stats().mock_calls == 5);
}

TEST_CASE("schedule independence: reports identical across fan-out widths") {
    smali::Corpus corpus = abc_corpus();
    kb::Taxonomy taxonomy = kb::builtin_taxonomy();
    prompt::PromptEngine engine;
    std::string reference;
    for (int width : {1, 4, 16}) {
        gateway::Gateway gw = mock_gateway(kAbcRules, width);
        RunOptions options;
        options.max_in_flight = width;
        report::AnalysisReport report =
            run_malloc(corpus, taxonomy, {1, 9}, engine, gw, options);
        std::string serialized = report::serialize_report(report);
        if (reference.empty()) {
            reference = serialized;
        } else {
            CHECK(serialized == reference);
        }
    }
}

TEST_CASE("gating soundness: no finding without a malicious phase-1 verdict") {
    smali::Corpus corpus = abc_corpus();
    kb::Taxonomy taxonomy = kb::builtin_taxonomy();
    prompt::PromptEngine engine;
    gateway::Gateway gw = mock_gateway(kAbcRules);
    report::AnalysisReport report = run_malloc(corpus, taxonomy, {1, 9}, engine, gw, RunOptions{});
    std::set<std::pair<std::string, int>> flagged;
    for (const auto& f : report.findings) flagged.emplace(f.class_name, f.behavior_id);
    // behavior 9 never fires in the script, D never fires at all
    for (const auto& [cls, id] : flagged) {
        CHECK(id == 1);
        CHECK(cls != "LD;");
    }
}

TEST_CASE("baseline expansion: one verdict with two behaviors becomes two findings") {
    smali::Corpus corpus = abc_corpus();
    kb::Taxonomy taxonomy = kb::builtin_taxonomy();
    prompt::PromptEngine engine;
    gateway::Gateway gw = mock_gateway(R"([
        {"contains": ["LA;", "Possible Malicious Behaviors"],
         "response": "IS_MALICIOUS: yes\nCONFIDENCE: 70\nEXPLANATION: two-sided\nBEHAVIOR: Privacy Stealing, Tricky Behavior\nMETHOD: .method public m1()V\nROLE: does it\n"},
        {"contains": [], "response": "IS_MALICIOUS: no\nCONFIDENCE: 90\nEXPLANATION: ok"}
    ])");
    report::AnalysisReport report = run_baseline(corpus, taxonomy, engine, gw, RunOptions{});
    REQUIRE(report.findings.size() == 2);
    CHECK(report.findings[0].behavior_id == 1);
    CHECK(report.findings[1].behavior_id == 11);
    CHECK(report.findings[0].methods.size() == 1);
    CHECK(report.findings[1].methods.size() == 1);
    CHECK(report.flagged_method_count == 1);  // the union counts m1 once
    CHECK(report.mode == report::RunMode::Baseline);
}

TEST_CASE("baseline unparseable blob lands in failures and the run completes") {
    smali::Corpus corpus = abc_corpus();
    kb::Taxonomy taxonomy = kb::builtin_taxonomy();
    prompt::PromptEngine engine;
    gateway::Gateway gw = mock_gateway(R"([
        {"contains": ["LB;", "Possible Malicious Behaviors"], "response": "cannot help with that"},
        {"contains": [], "response": "IS_MALICIOUS: no\nCONFIDENCE: 90\nEXPLANATION: ok"}
    ])");
    report::AnalysisReport report = run_baseline(corpus, taxonomy, engine, gw, RunOptions{});
    CHECK(report.findings.empty());
    REQUIRE(report.failures.size() == 1);
    CHECK(report.failures[0].class_name == "LB;");
    CHECK(report.failures[0].stage == "baseline-parse");
}

TEST_CASE("developer-code filter keeps library classes out of the run") {
    smali::Corpus corpus = abc_corpus();
    corpus.filter = {"LA;"};
    corpus.classes[0].is_developer_code = true;
    for (size_t i = 1; i < corpus.classes.size(); ++i) {
        corpus.classes[i].is_developer_code = false;
    }
    corpus.method_count = 2;

    kb::Taxonomy taxonomy = kb::builtin_taxonomy();
    prompt::PromptEngine engine;
    gateway::Gateway gw = mock_gateway(kAbcRules);
    report::AnalysisReport report = run_malloc(corpus, taxonomy, {1}, engine, gw, RunOptions{});
    REQUIRE(report.findings.size() == 1);
    CHECK(report.findings[0].class_name == "LA;");
    CHECK(report.total_class_count == 1);
    CHECK(report.total_method_count == 2);
    // 1 phase1 + 1 phase2: only the developer class is probed
    CHECK(gw.stats().mock_calls == 2);
}
