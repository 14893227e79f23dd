#pragma once

// Expectations for the completion fixtures under tests/fixtures/completions/.
// Shared by the unit suite and the acceptance runner.

#include <optional>
#include <string>
#include <vector>

namespace testsupport {

enum class Grammar { Phase1, Phase2, Baseline };

struct CompletionCase {
    const char* file;
    Grammar grammar;
    // expected_error empty = must parse; otherwise the ParseError message
    // must start with this field name.
    const char* expected_error;
    // phase1/baseline expectations (ignored for phase2)
    bool is_malicious = false;
    int confidence = 0;
    // phase2/baseline expectations
    int method_count = 0;
    // baseline: expected mapped behavior ids / unrecognized names
    std::vector<int> behavior_ids = {};
    int unrecognized_count = 0;
};

inline const std::vector<CompletionCase>& completion_cases() {
    static const std::vector<CompletionCase> cases = {
        {"p1_01_clean.txt", Grammar::Phase1, "", true, 85},
        {"p1_02_fenced.txt", Grammar::Phase1, "", true, 85},
        {"p1_03_case_shuffled.txt", Grammar::Phase1, "", false, 70},
        {"p1_04_prose_padded.txt", Grammar::Phase1, "", true, 64},
        {"p1_05_markdown_bold.txt", Grammar::Phase1, "", true, 77},
        {"p1_06_maybe.txt", Grammar::Phase1, "IS_MALICIOUS"},
        {"p1_07_conf_nonnumeric.txt", Grammar::Phase1, "CONFIDENCE"},
        {"p1_08_conf_range.txt", Grammar::Phase1, "CONFIDENCE"},
        {"p1_09_no_explanation.txt", Grammar::Phase1, "EXPLANATION"},
        {"p1_10_multiline_explanation.txt", Grammar::Phase1, "", true, 66},
        {"p1_11_percent_confidence.txt", Grammar::Phase1, "", false, 95},
        {"p1_12_empty.txt", Grammar::Phase1, "IS_MALICIOUS"},
        {"p1_13_yes_trailing_period.txt", Grammar::Phase1, "", true, 59},
        {"p2_01_two_triples.txt", Grammar::Phase2, "", false, 0, 2},
        {"p2_02_role_first.txt", Grammar::Phase2, "ROLE"},
        {"p2_03_missing_confidence.txt", Grammar::Phase2, "", false, 0, 2},
        {"p2_04_no_methods.txt", Grammar::Phase2, "", false, 0, 0},
        {"p2_05_fenced.txt", Grammar::Phase2, "", false, 0, 1},
        {"p2_06_multiline_role.txt", Grammar::Phase2, "", false, 0, 1},
        {"bl_01_two_behaviors.txt", Grammar::Baseline, "", true, 82, 1, {1, 11}, 0},
        {"bl_02_behavior_none.txt", Grammar::Baseline, "", false, 91, 0, {}, 0},
        {"bl_03_unknown_behavior.txt", Grammar::Baseline, "", true, 67, 0, {10}, 1},
        {"bl_04_methods_no_conf.txt", Grammar::Baseline, "", true, 58, 2, {9}, 0},
        {"bl_05_malicious_no_behavior.txt", Grammar::Baseline, "BEHAVIOR"},
        {"bl_06_garbage.txt", Grammar::Baseline, "IS_MALICIOUS"},
    };
    return cases;
}

}  // namespace testsupport
