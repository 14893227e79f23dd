#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>

#include "core/behavior_kb.hpp"
#include "core/report.hpp"
#include "core/verdicts.hpp"

namespace mloc::evaluation {

struct GroundTruth {
    std::string apk_id;
    std::map<std::string, std::set<int>> class_labels;
    std::map<std::pair<std::string, std::string>, std::set<int>> method_labels;
};

// Line grammar: `apk <id>`, `class <name> <ids>`, `method <name> <ids>
// <signature line...>`; ids comma-separated. Validates ids against the
// taxonomy and the class-superset invariant.
GroundTruth parse_ground_truth(std::string_view text, const kb::Taxonomy& taxonomy);
GroundTruth load_ground_truth(const std::filesystem::path& path, const kb::Taxonomy& taxonomy);

// Counting unit for TP/FP/FN: (component, behavior) pairs by default, or
// bare components ignoring the behavior label.
enum class CountUnit { Pair, Component };

struct MetricsRow {
    std::string level;  // "class" | "method"
    long tp = 0;
    long fp = 0;
    long fn = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    bool precision_only = false;  // verdict-based scoring: fn undefined
};

// Applies the zero-denominator conventions: precision/recall are 0 on an
// empty denominator and f1 is 0 when precision+recall is 0.
MetricsRow make_metrics_row(std::string level, long tp, long fp, long fn);

std::pair<MetricsRow, MetricsRow> score(const report::AnalysisReport& report,
                                        const GroundTruth& truth,
                                        CountUnit unit = CountUnit::Pair);

// Analyst verdicts: accepted -> TP, rejected -> FP, unsure ignored.
// Recall/F1 are undefined without ground truth and stay flagged off.
std::pair<MetricsRow, MetricsRow> score_from_verdicts(
    const report::AnalysisReport& report, const std::vector<verdicts::VerdictRecord>& records);

// 1 - flagged/total, 0 when total is 0.
double workload_reduction(long flagged_methods, long total_methods);

std::string render_metrics_table(std::string_view mode, std::string_view model,
                                 const MetricsRow& class_row, const MetricsRow& method_row);
std::string metrics_json(const MetricsRow& class_row, const MetricsRow& method_row,
                         CountUnit unit);

}  // namespace mloc::evaluation
