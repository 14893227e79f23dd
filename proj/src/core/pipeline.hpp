#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "core/behavior_kb.hpp"
#include "core/gateway.hpp"
#include "core/prompt.hpp"
#include "core/report.hpp"
#include "core/response.hpp"
#include "core/smali.hpp"

namespace mloc::pipeline {

struct RunOptions {
    std::string model = "gpt-4.1";
    double temperature = 0.0;
    int max_output_tokens = 4096;
    int token_budget = 100000;
    int gate_threshold = 0;       // phase-1 confidence gate; yes-verdicts at or above proceed
    int max_in_flight = 4;        // worker fan-out over (class, behavior) pairs
    int parse_failure_budget = -1;  // < 0 = unlimited
    std::function<void(const std::string&)> progress;  // stderr-bound, unordered
};

// Chunk verdicts OR-combine: any malicious chunk marks the class
// malicious, confidence is the max over malicious chunks (max overall when
// all benign), malicious explanations are concatenated with chunk labels.
response::Phase1Verdict merge_chunk_verdicts(const std::vector<response::Phase1Verdict>& verdicts);

// Two-phase analysis over every (developer-code class, behavior) pair.
// Phase-1 benign verdicts terminate the pair; malicious ones forward the
// explanation into Phase 2 for method localization. Per-item errors become
// report failure records, never run aborts.
report::AnalysisReport run_malloc(const smali::Corpus& corpus, const kb::Taxonomy& taxonomy,
                                  const std::vector<int>& behavior_ids,
                                  const prompt::PromptEngine& engine, gateway::Gateway& gateway,
                                  const RunOptions& options);

// Single-prompt baseline: one call per developer-code class; a verdict
// naming k behaviors expands into k findings sharing the method list.
report::AnalysisReport run_baseline(const smali::Corpus& corpus, const kb::Taxonomy& taxonomy,
                                    const prompt::PromptEngine& engine, gateway::Gateway& gateway,
                                    const RunOptions& options);

// Writes every prompt the given mode would issue (no gateway involved).
// Returns the number of files written.
int dump_prompts(const smali::Corpus& corpus, const kb::Taxonomy& taxonomy,
                 const std::vector<int>& behavior_ids, const prompt::PromptEngine& engine,
                 report::RunMode mode, int token_budget, const std::filesystem::path& out_dir);

}  // namespace mloc::pipeline
