#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "core/gateway.hpp"

namespace mloc::config {

// Flat run configuration. Precedence is flag > config file > default;
// callers apply file values first and flag overrides after.
struct RunConfig {
    std::string backend;  // "http" | "replay" | "mock"; empty = unconfigured
    std::string model = "gpt-4.1";
    std::string base_url = "https://api.openai.com/v1";
    std::string api_key_env = "MLOC_API_KEY";  // empty = send no auth header
    double temperature = 0.0;
    int max_output_tokens = 4096;
    int max_in_flight = 4;
    gateway::RetryPolicy retry;
    int gate_threshold = 0;
    int token_budget = 100000;
    int parse_failure_budget = -1;
    std::string taxonomy_path;   // empty = built-in
    std::string families_path;   // empty = built-in
    std::string template_baseline_path;
    std::string template_phase1_path;
    std::string template_phase2_path;
    std::string cache_dir;
    std::string log_path;
    std::string mock_script_path;
    std::vector<std::string> filter;
    std::string unknown_family_policy = "all";  // all | error
    std::string decompile_cmd;
};

// JSON object with the keys above; unknown keys are rejected so typos
// surface instead of silently using defaults.
RunConfig parse_config(std::string_view json_text);
RunConfig load_config(const std::filesystem::path& path);
void apply_config_file(RunConfig& config, const std::filesystem::path& path);

// String-based single-key setter (flag plumbing and the C API).
// `filter` appends; everything else assigns. Throws BadConfig on unknown
// keys or out-of-range values.
void set_config_value(RunConfig& config, std::string_view key, std::string_view value);
std::string get_config_value(const RunConfig& config, std::string_view key);

void validate_config(const RunConfig& config);

}  // namespace mloc::config
