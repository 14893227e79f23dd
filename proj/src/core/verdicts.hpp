#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mloc::verdicts {

struct VerdictRecord {
    std::string class_name;
    int behavior_id = 0;
    std::optional<std::string> method_signature;  // absent = class-level finding
    std::string decision;                         // accepted | rejected | unsure
    std::string note;
    std::string timestamp;
};

bool is_valid_decision(const std::string& decision);

// Verdict files are JSON lines, appended one record per decision so an
// abnormal exit never loses recorded work. A missing file is an empty set.
std::vector<VerdictRecord> load_verdicts(const std::filesystem::path& path);
void append_verdict(const std::filesystem::path& path, const VerdictRecord& record);

std::string verdict_key(const std::string& class_name, int behavior_id,
                        const std::optional<std::string>& method_signature);

// Last write wins per finding key.
std::map<std::string, VerdictRecord> effective_verdicts(const std::vector<VerdictRecord>& records);

}  // namespace mloc::verdicts
