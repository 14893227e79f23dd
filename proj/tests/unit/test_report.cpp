#include <doctest.h>

#include "core/error.hpp"
#include "core/report.hpp"
#include "core/util.hpp"
#include "support/tmpdir.hpp"

using namespace mloc;
using namespace mloc::report;

namespace {

AnalysisReport sample_report() {
    AnalysisReport r;
    r.apk_id = "demo";
    r.mode = RunMode::Malloc;
    r.model = "mock";

    Finding f;
    f.class_name = "Lb;";
    f.behavior_id = 1;
    f.behavior_name = "Privacy Stealing";
    f.class_confidence = 92;
    f.explanation = "enumerates contacts";
    response::MethodFinding m;
    m.reported_method_line =
        ".method public static f(Landroid/content/Context;)Ljava/util/ArrayList;";
    m.role = "reads the contact list";
    m.confidence = 95;
    m.resolution = response::Resolution::Exact;
    m.resolved_signature = m.reported_method_line;
    f.methods.push_back(m);

    response::MethodFinding ghost;
    ghost.reported_method_line = "void ghost()";
    ghost.role = "made up";
    ghost.confidence = 10;
    f.methods.push_back(ghost);

    Finding f2;
    f2.class_name = "La;";
    f2.behavior_id = 3;
    f2.behavior_name = "Remote Control";
    f2.class_confidence = 60;
    f2.explanation = "polls a server";

    r.findings = {f, f2};
    r.failures.push_back({"Lc;", 2, "phase1-parse", "CONFIDENCE: missing"});
    r.finalize(10, 40);
    return r;
}

}  // namespace

TEST_CASE("finalize sorts findings and computes the flagged counts") {
    AnalysisReport r = sample_report();
    CHECK(r.findings[0].class_name == "La;");  // sorted
    CHECK(r.findings[1].class_name == "Lb;");
    CHECK(r.flagged_class_count == 2);
    CHECK(r.flagged_method_count == 1);  // the unmatched ghost does not count
    CHECK(r.workload_reduction == 0.975);
}

TEST_CASE("serialization is canonical and round-trips byte-identically") {
    AnalysisReport r = sample_report();
    std::string a = serialize_report(r);
    std::string b = serialize_report(r);
    CHECK(a == b);
    CHECK(a.back() == '\n');

    AnalysisReport loaded = parse_report(a);
    CHECK(serialize_report(loaded) == a);
    CHECK(loaded.findings.size() == 2);
    CHECK(loaded.findings[1].methods.size() == 2);
    CHECK(loaded.findings[1].methods[0].resolution == response::Resolution::Exact);
    CHECK_FALSE(loaded.findings[1].methods[1].resolved_signature.has_value());
    CHECK(loaded.failures.size() == 1);
}

TEST_CASE("save and load through files") {
    testsupport::TmpDir tmp("report");
    AnalysisReport r = sample_report();
    save_report(r, tmp.file("r.json"));
    AnalysisReport loaded = load_report(tmp.file("r.json"));
    CHECK(serialize_report(loaded) == serialize_report(r));
}

TEST_CASE("bad report files are rejected") {
    CHECK_THROWS_AS(parse_report("not json"), Error);
    CHECK_THROWS_AS(parse_report("{\"schema\": \"other/9\"}"), Error);
}

TEST_CASE("digest mirrors class, behavior and per-method role lines") {
    AnalysisReport r = sample_report();
    std::string digest = render_digest(r);
    CHECK(digest.find("Class: Lb;") != std::string::npos);
    CHECK(digest.find("Behavior: Privacy Stealing") != std::string::npos);
    CHECK(digest.find("Method: .method public static f(Landroid/content/Context;)"
                      "Ljava/util/ArrayList;") != std::string::npos);
    CHECK(digest.find("Role Explanation: reads the contact list") != std::string::npos);
    CHECK(digest.find("unmatched") != std::string::npos);
    CHECK(digest.find("workload reduction: 98%") != std::string::npos);
    CHECK(digest.find("Failures:") != std::string::npos);
}
