#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "core/behavior_kb.hpp"
#include "core/smali.hpp"

namespace mloc::response {

struct Phase1Verdict {
    bool is_malicious = false;
    int confidence = 0;  // 0..100
    std::string explanation;

    bool operator==(const Phase1Verdict&) const = default;
};

enum class Resolution { Exact, Normalized, Fuzzy, Unmatched };

const char* resolution_name(Resolution r);
std::optional<Resolution> resolution_from_name(std::string_view name);

// One METHOD/ROLE/CONFIDENCE triple as reported by the model, before any
// matching against real methods.
struct MethodTriple {
    std::string reported_line;
    std::string role;
    int confidence = 0;
    bool confidence_missing = false;
};

struct MethodFinding {
    std::string reported_method_line;
    std::string role;
    int confidence = 0;
    bool confidence_missing = false;
    Resolution resolution = Resolution::Unmatched;
    std::optional<std::string> resolved_signature;
    bool ambiguous = false;  // fuzzy matched two or more methods
};

struct BaselineVerdict {
    bool is_malicious = false;
    int confidence = 0;
    std::string explanation;
    std::vector<int> behavior_ids;                     // mapped, sorted, deduplicated
    std::vector<std::string> unrecognized_behaviors;   // kept, flagged
    std::vector<MethodTriple> methods;
};

// All three parsers tolerate code fences, key-case variation, markdown
// key decoration and surrounding prose; semantic violations raise
// Error(ParseError) whose message starts with the offending field name.
Phase1Verdict parse_phase1(std::string_view raw);
std::vector<MethodTriple> parse_phase2(std::string_view raw);
BaselineVerdict parse_baseline(std::string_view raw, const kb::Taxonomy& taxonomy);

// Canonical re-serialization of a Phase-1 verdict (parse round-trips).
std::string canonical_phase1_text(const Phase1Verdict& v);

// Resolution ladder: exact trimmed match, whitespace-normalized match
// (also forgiving a dropped `.method` token), unique name+descriptor
// substring, else unmatched. Two or more fuzzy candidates are recorded
// ambiguous and treated as unmatched.
MethodFinding resolve_method(const MethodTriple& triple, const smali::SmaliClass& cls);

// Findings for the same resolved method merge: max confidence, roles
// concatenated, strongest resolution kept. Unmatched findings merge only
// when their reported lines are identical.
std::vector<MethodFinding> merge_method_findings(std::vector<MethodFinding> findings);

}  // namespace mloc::response
