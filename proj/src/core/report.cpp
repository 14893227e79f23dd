#include "core/report.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "core/error.hpp"
#include "core/evaluation.hpp"
#include "core/util.hpp"

namespace mloc::report {

using ordered_json = nlohmann::ordered_json;

const char* run_mode_name(RunMode mode) {
    return mode == RunMode::Malloc ? "malloc" : "baseline";
}

void AnalysisReport::finalize(int total_classes, int total_methods) {
    std::sort(findings.begin(), findings.end(), [](const Finding& a, const Finding& b) {
        return std::tie(a.class_name, a.behavior_id) < std::tie(b.class_name, b.behavior_id);
    });
    std::sort(failures.begin(), failures.end(),
              [](const FailureRecord& a, const FailureRecord& b) {
                  return std::tie(a.class_name, a.behavior_id, a.stage, a.error) <
                         std::tie(b.class_name, b.behavior_id, b.stage, b.error);
              });

    std::set<std::string> classes;
    std::set<std::pair<std::string, std::string>> methods;
    for (const Finding& f : findings) {
        classes.insert(f.class_name);
        for (const response::MethodFinding& m : f.methods) {
            if (m.resolved_signature) {
                methods.emplace(f.class_name, *m.resolved_signature);
            }
        }
    }
    flagged_class_count = static_cast<int>(classes.size());
    flagged_method_count = static_cast<int>(methods.size());
    total_class_count = total_classes;
    total_method_count = total_methods;
    workload_reduction =
        round4(evaluation::workload_reduction(flagged_method_count, total_method_count));
}

std::string serialize_report(const AnalysisReport& report) {
    ordered_json j;
    j["schema"] = "mloc-report/1";
    j["apk_id"] = report.apk_id;
    j["mode"] = run_mode_name(report.mode);
    j["model"] = report.model;
    j["total_class_count"] = report.total_class_count;
    j["total_method_count"] = report.total_method_count;
    j["flagged_class_count"] = report.flagged_class_count;
    j["flagged_method_count"] = report.flagged_method_count;
    j["workload_reduction"] = report.workload_reduction;

    ordered_json findings = ordered_json::array();
    for (const Finding& f : report.findings) {
        ordered_json jf;
        jf["class"] = f.class_name;
        jf["behavior_id"] = f.behavior_id;
        jf["behavior"] = f.behavior_name;
        jf["confidence"] = f.class_confidence;
        jf["explanation"] = f.explanation;
        jf["phase1_chunks"] = f.phase1_chunks;
        ordered_json methods = ordered_json::array();
        for (const response::MethodFinding& m : f.methods) {
            ordered_json jm;
            jm["reported"] = m.reported_method_line;
            jm["role"] = m.role;
            jm["confidence"] = m.confidence;
            jm["confidence_missing"] = m.confidence_missing;
            jm["resolution"] = response::resolution_name(m.resolution);
            if (m.resolved_signature) {
                jm["signature"] = *m.resolved_signature;
            } else {
                jm["signature"] = nullptr;
            }
            jm["ambiguous"] = m.ambiguous;
            methods.push_back(std::move(jm));
        }
        jf["methods"] = std::move(methods);
        findings.push_back(std::move(jf));
    }
    j["findings"] = std::move(findings);

    ordered_json failures = ordered_json::array();
    for (const FailureRecord& f : report.failures) {
        ordered_json jf;
        jf["class"] = f.class_name;
        jf["behavior_id"] = f.behavior_id;
        jf["stage"] = f.stage;
        jf["error"] = f.error;
        failures.push_back(std::move(jf));
    }
    j["failures"] = std::move(failures);
    return j.dump(2) + "\n";
}

AnalysisReport parse_report(std::string_view json_text) {
    ordered_json j = ordered_json::parse(json_text, nullptr, false);
    if (j.is_discarded() || !j.is_object() || j.value("schema", "") != "mloc-report/1") {
        throw Error(ErrorCode::BadFormat, "not a mloc-report/1 file");
    }
    AnalysisReport r;
    r.apk_id = j.value("apk_id", "");
    std::string mode = j.value("mode", "malloc");
    if (mode == "malloc") {
        r.mode = RunMode::Malloc;
    } else if (mode == "baseline") {
        r.mode = RunMode::Baseline;
    } else {
        throw Error(ErrorCode::BadFormat, "unknown report mode '" + mode + "'");
    }
    r.model = j.value("model", "");
    r.total_class_count = j.value("total_class_count", 0);
    r.total_method_count = j.value("total_method_count", 0);
    r.flagged_class_count = j.value("flagged_class_count", 0);
    r.flagged_method_count = j.value("flagged_method_count", 0);
    r.workload_reduction = j.value("workload_reduction", 0.0);

    for (const auto& jf : j.value("findings", ordered_json::array())) {
        Finding f;
        f.class_name = jf.at("class").get<std::string>();
        f.behavior_id = jf.at("behavior_id").get<int>();
        f.behavior_name = jf.value("behavior", "");
        f.class_confidence = jf.value("confidence", 0);
        f.explanation = jf.value("explanation", "");
        f.phase1_chunks = jf.value("phase1_chunks", 1);
        for (const auto& jm : jf.value("methods", ordered_json::array())) {
            response::MethodFinding m;
            m.reported_method_line = jm.at("reported").get<std::string>();
            m.role = jm.value("role", "");
            m.confidence = jm.value("confidence", 0);
            m.confidence_missing = jm.value("confidence_missing", false);
            auto res = response::resolution_from_name(jm.value("resolution", "unmatched"));
            if (!res) throw Error(ErrorCode::BadFormat, "unknown method resolution");
            m.resolution = *res;
            if (jm.contains("signature") && !jm["signature"].is_null()) {
                m.resolved_signature = jm["signature"].get<std::string>();
            }
            m.ambiguous = jm.value("ambiguous", false);
            f.methods.push_back(std::move(m));
        }
        r.findings.push_back(std::move(f));
    }
    for (const auto& jf : j.value("failures", ordered_json::array())) {
        FailureRecord f;
        f.class_name = jf.at("class").get<std::string>();
        f.behavior_id = jf.value("behavior_id", 0);
        f.stage = jf.value("stage", "");
        f.error = jf.value("error", "");
        r.failures.push_back(std::move(f));
    }
    return r;
}

void save_report(const AnalysisReport& report, const std::filesystem::path& path) {
    write_file_atomic(path, serialize_report(report));
}

AnalysisReport load_report(const std::filesystem::path& path) {
    return parse_report(read_file(path));
}

std::string render_digest(const AnalysisReport& report) {
    std::ostringstream out;
    out << "apk: " << report.apk_id << "\n";
    out << "mode: " << run_mode_name(report.mode) << "\n";
    out << "model: " << report.model << "\n";
    out << "flagged classes: " << report.flagged_class_count << " / "
        << report.total_class_count << "\n";
    out << "flagged methods: " << report.flagged_method_count << " / "
        << report.total_method_count << "\n";
    out << "workload reduction: " << format_percent(report.workload_reduction) << "\n";

    for (const Finding& f : report.findings) {
        out << "\n";
        out << "Class: " << f.class_name << "\n";
        out << "Behavior: " << f.behavior_name << "\n";
        out << "Confidence: " << f.class_confidence << "\n";
        out << "Explanation: " << f.explanation << "\n";
        for (const response::MethodFinding& m : f.methods) {
            out << "\n";
            if (m.resolved_signature) {
                out << "Method: " << *m.resolved_signature << "\n";
                if (m.resolution != response::Resolution::Exact) {
                    out << "Matched: " << response::resolution_name(m.resolution)
                        << " (reported: " << m.reported_method_line << ")\n";
                }
            } else {
                out << "Method (unmatched" << (m.ambiguous ? ", ambiguous" : "")
                    << "): " << m.reported_method_line << "\n";
            }
            out << "Role Explanation: " << m.role << "\n";
            out << "Confidence: " << m.confidence << (m.confidence_missing ? " (missing)" : "")
                << "\n";
        }
    }

    if (!report.failures.empty()) {
        out << "\nFailures:\n";
        for (const FailureRecord& f : report.failures) {
            out << "- " << f.class_name << " behavior=" << f.behavior_id << " stage=" << f.stage
                << ": " << f.error << "\n";
        }
    }
    return out.str();
}

}  // namespace mloc::report
