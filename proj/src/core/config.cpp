#include "core/config.hpp"

#include <cstdio>

#include <json.hpp>

#include "core/error.hpp"
#include "core/util.hpp"

namespace mloc::config {

using json = nlohmann::json;

namespace {

long require_long(std::string_view key, std::string_view value, long lo, long hi) {
    auto n = parse_int(value);
    if (!n || *n < lo || *n > hi) {
        throw Error(ErrorCode::BadConfig,
                    std::string(key) + " must be an integer in [" + std::to_string(lo) + ", " +
                        std::to_string(hi) + "], got '" + std::string(value) + "'");
    }
    return *n;
}

double require_double(std::string_view key, std::string_view value, double lo, double hi) {
    try {
        size_t used = 0;
        double v = std::stod(std::string(value), &used);
        if (used != trim(value).size() && used != std::string(value).size()) {
            throw std::invalid_argument("trailing garbage");
        }
        if (v < lo || v > hi) throw std::out_of_range("range");
        return v;
    } catch (const std::exception&) {
        throw Error(ErrorCode::BadConfig,
                    std::string(key) + " must be a number in [" + std::to_string(lo) + ", " +
                        std::to_string(hi) + "], got '" + std::string(value) + "'");
    }
}

}  // namespace

void set_config_value(RunConfig& c, std::string_view key, std::string_view value) {
    std::string v(value);
    if (key == "backend") {
        if (v != "http" && v != "replay" && v != "mock" && !v.empty()) {
            throw Error(ErrorCode::BadConfig, "backend must be http, replay or mock");
        }
        c.backend = v;
    } else if (key == "model") {
        c.model = v;
    } else if (key == "base_url") {
        c.base_url = v;
    } else if (key == "api_key_env") {
        c.api_key_env = v;
    } else if (key == "temperature") {
        c.temperature = require_double(key, v, 0.0, 2.0);
    } else if (key == "max_output_tokens") {
        c.max_output_tokens = static_cast<int>(require_long(key, v, 1, 1000000));
    } else if (key == "max_in_flight") {
        c.max_in_flight = static_cast<int>(require_long(key, v, 1, 256));
    } else if (key == "retry_max_attempts") {
        c.retry.max_attempts = static_cast<int>(require_long(key, v, 1, 10));
    } else if (key == "retry_base_delay_ms") {
        c.retry.base_delay_ms = static_cast<int>(require_long(key, v, 0, 60000));
    } else if (key == "retry_jitter_ms") {
        c.retry.jitter_ms = static_cast<int>(require_long(key, v, 0, 60000));
    } else if (key == "gate_threshold") {
        c.gate_threshold = static_cast<int>(require_long(key, v, 0, 100));
    } else if (key == "token_budget") {
        c.token_budget = static_cast<int>(require_long(key, v, 1, 100000000));
    } else if (key == "parse_failure_budget") {
        c.parse_failure_budget = static_cast<int>(require_long(key, v, -1, 1000000));
    } else if (key == "taxonomy_path") {
        c.taxonomy_path = v;
    } else if (key == "families_path") {
        c.families_path = v;
    } else if (key == "template_baseline_path") {
        c.template_baseline_path = v;
    } else if (key == "template_phase1_path") {
        c.template_phase1_path = v;
    } else if (key == "template_phase2_path") {
        c.template_phase2_path = v;
    } else if (key == "cache_dir") {
        c.cache_dir = v;
    } else if (key == "log_path") {
        c.log_path = v;
    } else if (key == "mock_script_path") {
        c.mock_script_path = v;
    } else if (key == "filter") {
        if (!v.empty()) c.filter.push_back(v);
    } else if (key == "unknown_family_policy") {
        if (v != "all" && v != "error") {
            throw Error(ErrorCode::BadConfig, "unknown_family_policy must be all or error");
        }
        c.unknown_family_policy = v;
    } else if (key == "decompile_cmd") {
        c.decompile_cmd = v;
    } else {
        throw Error(ErrorCode::BadConfig, "unknown config key '" + std::string(key) + "'");
    }
}

std::string get_config_value(const RunConfig& c, std::string_view key) {
    if (key == "backend") return c.backend;
    if (key == "model") return c.model;
    if (key == "base_url") return c.base_url;
    if (key == "api_key_env") return c.api_key_env;
    if (key == "temperature") {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%g", c.temperature);
        return buf;
    }
    if (key == "max_output_tokens") return std::to_string(c.max_output_tokens);
    if (key == "max_in_flight") return std::to_string(c.max_in_flight);
    if (key == "retry_max_attempts") return std::to_string(c.retry.max_attempts);
    if (key == "retry_base_delay_ms") return std::to_string(c.retry.base_delay_ms);
    if (key == "retry_jitter_ms") return std::to_string(c.retry.jitter_ms);
    if (key == "gate_threshold") return std::to_string(c.gate_threshold);
    if (key == "token_budget") return std::to_string(c.token_budget);
    if (key == "parse_failure_budget") return std::to_string(c.parse_failure_budget);
    if (key == "taxonomy_path") return c.taxonomy_path;
    if (key == "families_path") return c.families_path;
    if (key == "template_baseline_path") return c.template_baseline_path;
    if (key == "template_phase1_path") return c.template_phase1_path;
    if (key == "template_phase2_path") return c.template_phase2_path;
    if (key == "cache_dir") return c.cache_dir;
    if (key == "log_path") return c.log_path;
    if (key == "mock_script_path") return c.mock_script_path;
    if (key == "filter") {
        std::string out;
        for (const std::string& f : c.filter) {
            if (!out.empty()) out += ",";
            out += f;
        }
        return out;
    }
    if (key == "unknown_family_policy") return c.unknown_family_policy;
    if (key == "decompile_cmd") return c.decompile_cmd;
    throw Error(ErrorCode::BadConfig, "unknown config key '" + std::string(key) + "'");
}

RunConfig parse_config(std::string_view json_text) {
    RunConfig c;
    json j = json::parse(json_text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw Error(ErrorCode::BadConfig, "config must be a JSON object");
    }
    for (const auto& [key, value] : j.items()) {
        if (key == "retry") {
            if (!value.is_object()) {
                throw Error(ErrorCode::BadConfig, "retry must be an object");
            }
            for (const auto& [rk, rv] : value.items()) {
                if (rk == "max_attempts") {
                    set_config_value(c, "retry_max_attempts", rv.dump());
                } else if (rk == "base_delay_ms") {
                    set_config_value(c, "retry_base_delay_ms", rv.dump());
                } else if (rk == "jitter_ms") {
                    set_config_value(c, "retry_jitter_ms", rv.dump());
                } else {
                    throw Error(ErrorCode::BadConfig, "unknown retry key '" + rk + "'");
                }
            }
        } else if (key == "filter") {
            if (!value.is_array()) {
                throw Error(ErrorCode::BadConfig, "filter must be an array of prefixes");
            }
            for (const auto& f : value) {
                set_config_value(c, "filter", f.get<std::string>());
            }
        } else if (value.is_string()) {
            set_config_value(c, key, value.get<std::string>());
        } else {
            set_config_value(c, key, value.dump());
        }
    }
    validate_config(c);
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    return parse_config(read_file(path));
}

void apply_config_file(RunConfig& config, const std::filesystem::path& path) {
    config = load_config(path);
}

void validate_config(const RunConfig& c) {
    auto check_path = [](std::string_view key, const std::string& p) {
        if (!p.empty() && !std::filesystem::exists(p)) {
            throw Error(ErrorCode::BadConfig,
                        std::string(key) + " does not exist: " + p);
        }
    };
    check_path("taxonomy_path", c.taxonomy_path);
    check_path("families_path", c.families_path);
    check_path("template_baseline_path", c.template_baseline_path);
    check_path("template_phase1_path", c.template_phase1_path);
    check_path("template_phase2_path", c.template_phase2_path);
    check_path("mock_script_path", c.mock_script_path);
}

}  // namespace mloc::config
