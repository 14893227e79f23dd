#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "core/response.hpp"

namespace mloc::report {

struct Finding {
    std::string class_name;
    int behavior_id = 0;
    std::string behavior_name;
    int class_confidence = 0;
    std::string explanation;
    std::vector<response::MethodFinding> methods;  // deduplicated per resolved method
    int phase1_chunks = 1;
};

// behavior_id 0 marks failures not tied to a taxonomy behavior
// (e.g. an unrecognized behavior name from the baseline grammar).
struct FailureRecord {
    std::string class_name;
    int behavior_id = 0;
    std::string stage;  // phase1 | phase1-parse | phase2 | phase2-parse | baseline | baseline-parse | behavior-map
    std::string error;
};

enum class RunMode { Malloc, Baseline };

const char* run_mode_name(RunMode mode);

struct AnalysisReport {
    std::string apk_id;
    RunMode mode = RunMode::Malloc;
    std::string model;
    std::vector<Finding> findings;        // sorted by (class_name, behavior_id)
    std::vector<FailureRecord> failures;  // sorted by (class_name, behavior_id, stage, error)
    int flagged_class_count = 0;
    int flagged_method_count = 0;  // distinct resolved methods; unmatched excluded
    int total_class_count = 0;     // developer-code classes covered by the run
    int total_method_count = 0;
    double workload_reduction = 0.0;  // stored rounded to 4 decimals

    // Sorts findings/failures and recomputes the flagged/workload fields
    // from the finding set.
    void finalize(int total_classes, int total_methods);
};

// Canonical JSON: fixed key order, UTF-8, LF, trailing newline. Two runs
// over identical inputs serialize byte-identically.
std::string serialize_report(const AnalysisReport& report);
AnalysisReport parse_report(std::string_view json_text);
void save_report(const AnalysisReport& report, const std::filesystem::path& path);
AnalysisReport load_report(const std::filesystem::path& path);

// Analyst-facing digest: per finding a class/behavior/explanation header
// followed by each method with its role explanation.
std::string render_digest(const AnalysisReport& report);

}  // namespace mloc::report
