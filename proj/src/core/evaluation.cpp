#include "core/evaluation.hpp"

#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "core/error.hpp"
#include "core/util.hpp"

namespace mloc::evaluation {

using ordered_json = nlohmann::ordered_json;

namespace {

std::set<int> parse_id_list(const std::string& piece, const kb::Taxonomy& taxonomy,
                            int line_no) {
    std::set<int> ids;
    std::istringstream iss(piece);
    std::string tok;
    while (std::getline(iss, tok, ',')) {
        if (trim(tok).empty()) continue;
        auto id = parse_int(tok);
        if (!id) {
            throw Error(ErrorCode::BadGroundTruth,
                        "line " + std::to_string(line_no) + ": bad behavior id '" + trim(tok) +
                            "'");
        }
        taxonomy.by_id(static_cast<int>(*id));  // throws UnknownBehaviorId
        ids.insert(static_cast<int>(*id));
    }
    if (ids.empty()) {
        throw Error(ErrorCode::BadGroundTruth,
                    "line " + std::to_string(line_no) + ": empty behavior id list");
    }
    return ids;
}

}  // namespace

GroundTruth parse_ground_truth(std::string_view text, const kb::Taxonomy& taxonomy) {
    GroundTruth truth;
    int line_no = 0;
    for (const std::string& raw : split_lines_keep_ends(text)) {
        ++line_no;
        std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;

        std::istringstream iss(line);
        std::string word;
        iss >> word;
        if (word == "apk") {
            std::string id;
            iss >> id;
            truth.apk_id = id;
        } else if (word == "class") {
            std::string name, ids;
            iss >> name >> ids;
            if (name.empty() || ids.empty()) {
                throw Error(ErrorCode::BadGroundTruth,
                            "line " + std::to_string(line_no) + ": expected `class <name> <ids>`");
            }
            truth.class_labels[name] = parse_id_list(ids, taxonomy, line_no);
        } else if (word == "method") {
            std::string name, ids;
            iss >> name >> ids;
            std::string signature;
            std::getline(iss, signature);
            signature = trim(signature);
            if (name.empty() || ids.empty() || signature.empty()) {
                throw Error(ErrorCode::BadGroundTruth,
                            "line " + std::to_string(line_no) +
                                ": expected `method <name> <ids> <signature line>`");
            }
            truth.method_labels[{name, signature}] = parse_id_list(ids, taxonomy, line_no);
        } else {
            throw Error(ErrorCode::BadGroundTruth,
                        "line " + std::to_string(line_no) + ": unknown record '" + word + "'");
        }
    }

    // every labeled method's class must be labeled with a superset
    for (const auto& [key, ids] : truth.method_labels) {
        auto cls = truth.class_labels.find(key.first);
        if (cls == truth.class_labels.end()) {
            throw Error(ErrorCode::BadGroundTruth,
                        "method labels reference unlabeled class " + key.first);
        }
        for (int id : ids) {
            if (!cls->second.count(id)) {
                throw Error(ErrorCode::BadGroundTruth,
                            "class " + key.first + " lacks behavior " + std::to_string(id) +
                                " carried by one of its methods");
            }
        }
    }
    return truth;
}

GroundTruth load_ground_truth(const std::filesystem::path& path, const kb::Taxonomy& taxonomy) {
    return parse_ground_truth(read_file(path), taxonomy);
}

MetricsRow make_metrics_row(std::string level, long tp, long fp, long fn) {
    MetricsRow row;
    row.level = std::move(level);
    row.tp = tp;
    row.fp = fp;
    row.fn = fn;
    row.precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
    row.recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
    row.f1 = row.precision + row.recall == 0.0
                 ? 0.0
                 : 2.0 * row.precision * row.recall / (row.precision + row.recall);
    return row;
}

std::pair<MetricsRow, MetricsRow> score(const report::AnalysisReport& report,
                                        const GroundTruth& truth, CountUnit unit) {
    if (report.apk_id != truth.apk_id) {
        throw Error(ErrorCode::ApkMismatch, "report is for '" + report.apk_id +
                                                "' but truth is for '" + truth.apk_id + "'");
    }

    // class level
    std::set<std::pair<std::string, int>> pred_class_pairs;
    std::set<std::pair<std::pair<std::string, std::string>, int>> pred_method_pairs;
    std::set<std::tuple<std::string, int, std::string>> unmatched;
    for (const report::Finding& f : report.findings) {
        pred_class_pairs.emplace(f.class_name, f.behavior_id);
        for (const response::MethodFinding& m : f.methods) {
            if (m.resolved_signature) {
                pred_method_pairs.insert({{f.class_name, *m.resolved_signature}, f.behavior_id});
            } else {
                unmatched.insert({f.class_name, f.behavior_id, m.reported_method_line});
            }
        }
    }
    std::set<std::pair<std::string, int>> truth_class_pairs;
    for (const auto& [name, ids] : truth.class_labels) {
        for (int id : ids) truth_class_pairs.emplace(name, id);
    }
    std::set<std::pair<std::pair<std::string, std::string>, int>> truth_method_pairs;
    for (const auto& [key, ids] : truth.method_labels) {
        for (int id : ids) truth_method_pairs.insert({key, id});
    }

    long ctp = 0, cfp = 0, cfn = 0;
    long mtp = 0, mfp = 0, mfn = 0;

    if (unit == CountUnit::Pair) {
        for (const auto& p : pred_class_pairs) {
            truth_class_pairs.count(p) ? ++ctp : ++cfp;
        }
        for (const auto& t : truth_class_pairs) {
            if (!pred_class_pairs.count(t)) ++cfn;
        }
        for (const auto& p : pred_method_pairs) {
            truth_method_pairs.count(p) ? ++mtp : ++mfp;
        }
        for (const auto& t : truth_method_pairs) {
            if (!pred_method_pairs.count(t)) ++mfn;
        }
        mfp += static_cast<long>(unmatched.size());
    } else {
        std::set<std::string> pred_classes, truth_classes;
        for (const auto& p : pred_class_pairs) pred_classes.insert(p.first);
        for (const auto& t : truth_class_pairs) truth_classes.insert(t.first);
        std::set<std::pair<std::string, std::string>> pred_methods, truth_methods;
        for (const auto& p : pred_method_pairs) pred_methods.insert(p.first);
        for (const auto& t : truth_method_pairs) truth_methods.insert(t.first);

        for (const auto& p : pred_classes) truth_classes.count(p) ? ++ctp : ++cfp;
        for (const auto& t : truth_classes) {
            if (!pred_classes.count(t)) ++cfn;
        }
        for (const auto& p : pred_methods) truth_methods.count(p) ? ++mtp : ++mfp;
        for (const auto& t : truth_methods) {
            if (!pred_methods.count(t)) ++mfn;
        }
        std::set<std::pair<std::string, std::string>> unmatched_components;
        for (const auto& [cls, id, reported] : unmatched) {
            (void)id;
            unmatched_components.emplace(cls, reported);
        }
        mfp += static_cast<long>(unmatched_components.size());
    }

    return {make_metrics_row("class", ctp, cfp, cfn), make_metrics_row("method", mtp, mfp, mfn)};
}

std::pair<MetricsRow, MetricsRow> score_from_verdicts(
    const report::AnalysisReport& report, const std::vector<verdicts::VerdictRecord>& records) {
    // keys present in the report, at both levels
    std::set<std::string> class_keys, method_keys;
    for (const report::Finding& f : report.findings) {
        class_keys.insert(verdicts::verdict_key(f.class_name, f.behavior_id, std::nullopt));
        for (const response::MethodFinding& m : f.methods) {
            std::string sig = m.resolved_signature ? *m.resolved_signature
                                                   : m.reported_method_line;
            method_keys.insert(verdicts::verdict_key(f.class_name, f.behavior_id, sig));
        }
    }

    long ctp = 0, cfp = 0, mtp = 0, mfp = 0;
    for (const auto& [key, record] : verdicts::effective_verdicts(records)) {
        bool is_class = !record.method_signature.has_value();
        if (is_class ? !class_keys.count(key) : !method_keys.count(key)) {
            throw Error(ErrorCode::DanglingVerdict,
                        "verdict references a finding not in the report: " + record.class_name +
                            " behavior=" + std::to_string(record.behavior_id) +
                            (record.method_signature ? " method=" + *record.method_signature
                                                     : ""));
        }
        if (record.decision == "unsure") continue;
        bool accepted = record.decision == "accepted";
        if (is_class) {
            accepted ? ++ctp : ++cfp;
        } else {
            accepted ? ++mtp : ++mfp;
        }
    }

    MetricsRow class_row = make_metrics_row("class", ctp, cfp, 0);
    MetricsRow method_row = make_metrics_row("method", mtp, mfp, 0);
    class_row.precision_only = true;
    method_row.precision_only = true;
    class_row.recall = class_row.f1 = 0.0;
    method_row.recall = method_row.f1 = 0.0;
    return {class_row, method_row};
}

double workload_reduction(long flagged_methods, long total_methods) {
    if (total_methods <= 0) return 0.0;
    return 1.0 - static_cast<double>(flagged_methods) / static_cast<double>(total_methods);
}

namespace {

std::string fmt2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

}  // namespace

std::string render_metrics_table(std::string_view mode, std::string_view model,
                                 const MetricsRow& class_row, const MetricsRow& method_row) {
    const bool po = class_row.precision_only;
    std::ostringstream out;
    auto cell = [&](const std::string& s, size_t width) {
        out << s;
        for (size_t i = s.size(); i < width; ++i) out << ' ';
    };
    cell("Method", 10);
    cell("Model", 12);
    cell("C-Prec", 8);
    cell("C-Rec", 8);
    cell("C-F1", 8);
    cell("M-Prec", 8);
    cell("M-Rec", 8);
    out << "M-F1\n";
    cell(std::string(mode), 10);
    cell(std::string(model), 12);
    cell(fmt2(class_row.precision), 8);
    cell(po ? "-" : fmt2(class_row.recall), 8);
    cell(po ? "-" : fmt2(class_row.f1), 8);
    cell(fmt2(method_row.precision), 8);
    cell(po ? "-" : fmt2(method_row.recall), 8);
    out << (po ? "-" : fmt2(method_row.f1)) << "\n";
    out << "\n";
    out << "class:  tp=" << class_row.tp << " fp=" << class_row.fp
        << " fn=" << (po ? "-" : std::to_string(class_row.fn)) << "\n";
    out << "method: tp=" << method_row.tp << " fp=" << method_row.fp
        << " fn=" << (po ? "-" : std::to_string(method_row.fn)) << "\n";
    return out.str();
}

std::string metrics_json(const MetricsRow& class_row, const MetricsRow& method_row,
                         CountUnit unit) {
    auto row = [](const MetricsRow& r) {
        ordered_json j;
        j["tp"] = r.tp;
        j["fp"] = r.fp;
        if (r.precision_only) {
            j["fn"] = nullptr;
        } else {
            j["fn"] = r.fn;
        }
        j["precision"] = r.precision;
        if (r.precision_only) {
            j["recall"] = nullptr;
            j["f1"] = nullptr;
        } else {
            j["recall"] = r.recall;
            j["f1"] = r.f1;
        }
        return j;
    };
    ordered_json j;
    j["count_unit"] = unit == CountUnit::Pair ? "pair" : "component";
    j["precision_only"] = class_row.precision_only;
    j["class"] = row(class_row);
    j["method"] = row(method_row);
    return j.dump(2) + "\n";
}

}  // namespace mloc::evaluation
