#include "core/verdicts.hpp"

#include <json.hpp>

#include "core/error.hpp"
#include "core/util.hpp"

namespace mloc::verdicts {

using ordered_json = nlohmann::ordered_json;

bool is_valid_decision(const std::string& decision) {
    return decision == "accepted" || decision == "rejected" || decision == "unsure";
}

std::vector<VerdictRecord> load_verdicts(const std::filesystem::path& path) {
    std::vector<VerdictRecord> records;
    if (!std::filesystem::exists(path)) return records;
    std::string text = read_file(path);
    int line_no = 0;
    for (const std::string& raw : split_lines_keep_ends(text)) {
        ++line_no;
        std::string line = trim(raw);
        if (line.empty()) continue;
        ordered_json j = ordered_json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            throw Error(ErrorCode::CorruptVerdictFile,
                        path.string() + ":" + std::to_string(line_no) + ": not a JSON object");
        }
        VerdictRecord r;
        try {
            r.class_name = j.at("class").get<std::string>();
            r.behavior_id = j.at("behavior_id").get<int>();
            if (j.contains("method") && !j["method"].is_null()) {
                r.method_signature = j["method"].get<std::string>();
            }
            r.decision = j.at("decision").get<std::string>();
            r.note = j.value("note", "");
            r.timestamp = j.value("ts", "");
        } catch (const ordered_json::exception& e) {
            throw Error(ErrorCode::CorruptVerdictFile,
                        path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
        if (!is_valid_decision(r.decision)) {
            throw Error(ErrorCode::CorruptVerdictFile,
                        path.string() + ":" + std::to_string(line_no) + ": bad decision '" +
                            r.decision + "'");
        }
        records.push_back(std::move(r));
    }
    return records;
}

void append_verdict(const std::filesystem::path& path, const VerdictRecord& record) {
    if (!is_valid_decision(record.decision)) {
        throw Error(ErrorCode::InvalidArgument, "bad decision '" + record.decision + "'");
    }
    ordered_json j;
    j["ts"] = record.timestamp.empty() ? iso8601_utc_now() : record.timestamp;
    j["class"] = record.class_name;
    j["behavior_id"] = record.behavior_id;
    if (record.method_signature) {
        j["method"] = *record.method_signature;
    } else {
        j["method"] = nullptr;
    }
    j["decision"] = record.decision;
    j["note"] = record.note;
    append_line(path, j.dump());
}

std::string verdict_key(const std::string& class_name, int behavior_id,
                        const std::optional<std::string>& method_signature) {
    std::string key = class_name + "\x1f" + std::to_string(behavior_id);
    if (method_signature) key += "\x1f" + *method_signature;
    return key;
}

std::map<std::string, VerdictRecord> effective_verdicts(
    const std::vector<VerdictRecord>& records) {
    std::map<std::string, VerdictRecord> out;
    for (const VerdictRecord& r : records) {
        out[verdict_key(r.class_name, r.behavior_id, r.method_signature)] = r;
    }
    return out;
}

}  // namespace mloc::verdicts
