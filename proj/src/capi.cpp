// extern "C" surface of libmloc. Opaque handles wrap the core types;
// exceptions are caught at the boundary and mapped to status codes with
// the message parked in a thread-local slot.

#include "mloc/mloc.h"

#include <cstring>
#include <string>

#include "core/behavior_kb.hpp"
#include "core/config.hpp"
#include "core/error.hpp"
#include "core/evaluation.hpp"
#include "core/gateway.hpp"
#include "core/pipeline.hpp"
#include "core/prompt.hpp"
#include "core/report.hpp"
#include "core/smali.hpp"
#include "core/util.hpp"
#include "core/verdicts.hpp"

using namespace mloc;

namespace {

thread_local std::string g_last_error;

mloc_status status_from(ErrorCode code) {
    switch (code) {
        case ErrorCode::Io:
            return MLOC_ERR_IO;
        case ErrorCode::BadFormat:
        case ErrorCode::CorruptVerdictFile:
            return MLOC_ERR_FORMAT;
        case ErrorCode::InvalidArgument:
            return MLOC_ERR_INVALID_ARG;
        case ErrorCode::MissingClassDirective:
        case ErrorCode::UnterminatedMethod:
        case ErrorCode::NestedMethod:
        case ErrorCode::EmptyCorpus:
            return MLOC_ERR_SMALI;
        case ErrorCode::ToolNotConfigured:
        case ErrorCode::ToolFailed:
        case ErrorCode::NoSmaliProduced:
            return MLOC_ERR_TOOL;
        case ErrorCode::BadTaxonomy:
        case ErrorCode::BadFamilyTable:
        case ErrorCode::UnknownFamily:
            return MLOC_ERR_KB;
        case ErrorCode::BadTemplate:
        case ErrorCode::EmptyExplanation:
            return MLOC_ERR_TEMPLATE;
        case ErrorCode::GatewayUnconfigured:
        case ErrorCode::AuthMissing:
        case ErrorCode::RateLimited:
        case ErrorCode::TransportError:
        case ErrorCode::CacheMiss:
        case ErrorCode::MockUnscripted:
            return MLOC_ERR_GATEWAY;
        case ErrorCode::ParseError:
            return MLOC_ERR_LLM_PARSE;
        case ErrorCode::EmptyBehaviorSet:
            return MLOC_ERR_INVALID_ARG;
        case ErrorCode::ParseBudgetExceeded:
            return MLOC_ERR_PARSE_BUDGET;
        case ErrorCode::ApkMismatch:
        case ErrorCode::UnknownBehaviorId:
        case ErrorCode::BadGroundTruth:
        case ErrorCode::DanglingVerdict:
            return MLOC_ERR_EVAL;
        case ErrorCode::BadConfig:
            return MLOC_ERR_FORMAT;
    }
    return MLOC_ERR_INTERNAL;
}

template <typename Fn>
mloc_status guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return MLOC_OK;
    } catch (const Error& e) {
        g_last_error = std::string(error_code_name(e.code())) + ": " + e.what();
        return status_from(e.code());
    } catch (const std::exception& e) {
        g_last_error = std::string("internal: ") + e.what();
        return MLOC_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "internal: unknown exception";
        return MLOC_ERR_INTERNAL;
    }
}

mloc_status invalid_arg(const char* message) {
    g_last_error = std::string("InvalidArgument: ") + message;
    return MLOC_ERR_INVALID_ARG;
}

char* dup_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

}  // namespace

struct mloc_corpus {
    smali::Corpus corpus;
};

struct mloc_kb {
    kb::Taxonomy taxonomy;
    kb::FamilyTable families;
};

struct mloc_config {
    config::RunConfig config;
};

struct mloc_report {
    report::AnalysisReport report;
};

struct mloc_metrics {
    evaluation::MetricsRow class_row;
    evaluation::MetricsRow method_row;
    evaluation::CountUnit unit = evaluation::CountUnit::Pair;
};

struct mloc_verdicts {
    std::vector<verdicts::VerdictRecord> records;
    std::map<std::string, verdicts::VerdictRecord> effective;
};

extern "C" {

const char* mloc_version(void) { return "1.0.0"; }

const char* mloc_last_error(void) { return g_last_error.c_str(); }

void mloc_string_free(char* s) { delete[] s; }

int mloc_exit_code(mloc_status status) {
    switch (status) {
        case MLOC_OK: return 0;
        case MLOC_ERR_INVALID_ARG: return 1;
        case MLOC_ERR_GATEWAY: return 3;
        case MLOC_ERR_PARSE_BUDGET: return 4;
        default: return 2;
    }
}

/* ------------------------------------------------------------- corpus */

mloc_status mloc_corpus_ingest(const char* root_dir, const char* apk_id, const char* family,
                               const char* const* filter_prefixes, size_t filter_count,
                               mloc_corpus** out) {
    if (!root_dir || !apk_id || !out) return invalid_arg("root_dir, apk_id and out are required");
    return guarded([&] {
        std::vector<std::string> filter;
        for (size_t i = 0; i < filter_count; ++i) {
            if (filter_prefixes && filter_prefixes[i]) filter.emplace_back(filter_prefixes[i]);
        }
        std::optional<std::string> fam;
        if (family && *family) fam = family;
        auto corpus = smali::ingest_tree(root_dir, filter, apk_id, fam);
        *out = new mloc_corpus{std::move(corpus)};
    });
}

mloc_status mloc_corpus_load(const char* path, mloc_corpus** out) {
    if (!path || !out) return invalid_arg("path and out are required");
    return guarded([&] { *out = new mloc_corpus{smali::load_corpus(path)}; });
}

mloc_status mloc_corpus_save(const mloc_corpus* corpus, const char* path) {
    if (!corpus || !path) return invalid_arg("corpus and path are required");
    return guarded([&] { smali::save_corpus(corpus->corpus, path); });
}

mloc_status mloc_corpus_summary(const mloc_corpus* corpus, char** out_text) {
    if (!corpus || !out_text) return invalid_arg("corpus and out_text are required");
    return guarded([&] { *out_text = dup_string(smali::corpus_summary(corpus->corpus)); });
}

const char* mloc_corpus_apk_id(const mloc_corpus* corpus) {
    return corpus ? corpus->corpus.apk_id.c_str() : nullptr;
}

int mloc_corpus_class_count(const mloc_corpus* corpus) {
    return corpus ? corpus->corpus.class_count : -1;
}

int mloc_corpus_developer_class_count(const mloc_corpus* corpus) {
    return corpus ? smali::developer_class_count(corpus->corpus) : -1;
}

int mloc_corpus_method_count(const mloc_corpus* corpus) {
    return corpus ? corpus->corpus.method_count : -1;
}

void mloc_corpus_free(mloc_corpus* corpus) { delete corpus; }

mloc_status mloc_decompile(const char* apk_path, const char* tool_command, const char* out_dir,
                           char** smali_root_out) {
    if (!apk_path || !out_dir || !smali_root_out) {
        return invalid_arg("apk_path, out_dir and smali_root_out are required");
    }
    return guarded([&] {
        auto root = smali::decompile(apk_path, tool_command ? tool_command : "", out_dir);
        *smali_root_out = dup_string(root.string());
    });
}

/* ----------------------------------------------------- knowledge base */

mloc_status mloc_kb_open(const char* behaviors_path, const char* families_path,
                         const char* unknown_family_policy, mloc_kb** out) {
    if (!out) return invalid_arg("out is required");
    return guarded([&] {
        kb::UnknownFamilyPolicy policy = kb::UnknownFamilyPolicy::AllBehaviors;
        if (unknown_family_policy && std::string(unknown_family_policy) == "error") {
            policy = kb::UnknownFamilyPolicy::Error;
        } else if (unknown_family_policy && std::string(unknown_family_policy) != "all" &&
                   *unknown_family_policy) {
            throw Error(ErrorCode::BadConfig, "unknown_family_policy must be all or error");
        }
        auto taxonomy = behaviors_path ? kb::load_taxonomy(behaviors_path)
                                       : kb::builtin_taxonomy();
        auto families = families_path ? kb::load_family_table(families_path, policy)
                                      : kb::builtin_family_table(policy);
        *out = new mloc_kb{std::move(taxonomy), std::move(families)};
    });
}

int mloc_kb_behavior_count(const mloc_kb* kb) {
    return kb ? static_cast<int>(kb->taxonomy.behaviors.size()) : -1;
}

const char* mloc_kb_behavior_name(const mloc_kb* kb, int behavior_id) {
    if (!kb) return nullptr;
    for (const kb::Behavior& b : kb->taxonomy.behaviors) {
        if (b.id == behavior_id) return b.name.c_str();
    }
    return nullptr;
}

mloc_status mloc_kb_lookup_family(const mloc_kb* kb, const char* family, int* ids_out,
                                  size_t capacity, size_t* count_out) {
    if (!kb || !count_out) return invalid_arg("kb and count_out are required");
    return guarded([&] {
        std::optional<std::string> fam;
        if (family && *family) fam = family;
        auto behaviors = kb::lookup_family(kb->taxonomy, kb->families, fam);
        *count_out = behaviors.size();
        if (ids_out) {
            for (size_t i = 0; i < behaviors.size() && i < capacity; ++i) {
                ids_out[i] = behaviors[i].id;
            }
        }
    });
}

void mloc_kb_free(mloc_kb* kb) { delete kb; }

/* ------------------------------------------------------------- config */

mloc_status mloc_config_new(mloc_config** out) {
    if (!out) return invalid_arg("out is required");
    return guarded([&] { *out = new mloc_config{}; });
}

mloc_status mloc_config_load_file(mloc_config* config, const char* path) {
    if (!config || !path) return invalid_arg("config and path are required");
    return guarded([&] { config->config = config::load_config(path); });
}

mloc_status mloc_config_set(mloc_config* config, const char* key, const char* value) {
    if (!config || !key || !value) return invalid_arg("config, key and value are required");
    return guarded([&] { config::set_config_value(config->config, key, value); });
}

mloc_status mloc_config_get(const mloc_config* config, const char* key, char** out_value) {
    if (!config || !key || !out_value) {
        return invalid_arg("config, key and out_value are required");
    }
    return guarded(
        [&] { *out_value = dup_string(config::get_config_value(config->config, key)); });
}

void mloc_config_free(mloc_config* config) { delete config; }

/* ----------------------------------------------------------- analysis */

namespace {

prompt::PromptEngine build_engine(const config::RunConfig& c) {
    prompt::PromptEngine engine;
    if (!c.template_baseline_path.empty()) {
        engine.load_template_file(prompt::PromptKind::Baseline, c.template_baseline_path);
    }
    if (!c.template_phase1_path.empty()) {
        engine.load_template_file(prompt::PromptKind::Phase1, c.template_phase1_path);
    }
    if (!c.template_phase2_path.empty()) {
        engine.load_template_file(prompt::PromptKind::Phase2, c.template_phase2_path);
    }
    return engine;
}

std::unique_ptr<gateway::Gateway> build_gateway(const config::RunConfig& c) {
    std::unique_ptr<gateway::Backend> backend;
    if (c.backend == "http") {
        backend = gateway::make_http_backend(c.base_url, c.api_key_env);
    } else if (c.backend == "replay") {
        if (c.cache_dir.empty()) {
            throw Error(ErrorCode::GatewayUnconfigured, "replay backend needs cache_dir");
        }
        backend = gateway::make_replay_backend(c.cache_dir);
    } else if (c.backend == "mock") {
        if (c.mock_script_path.empty()) {
            throw Error(ErrorCode::GatewayUnconfigured, "mock backend needs mock_script_path");
        }
        backend = gateway::make_mock_backend(gateway::load_mock_rules(c.mock_script_path));
    } else if (c.backend.empty()) {
        throw Error(ErrorCode::GatewayUnconfigured,
                    "no backend configured (set backend to http, replay or mock)");
    } else {
        throw Error(ErrorCode::GatewayUnconfigured, "unknown backend '" + c.backend + "'");
    }
    std::optional<std::filesystem::path> cache;
    if (!c.cache_dir.empty()) cache = c.cache_dir;
    std::optional<std::filesystem::path> log;
    if (!c.log_path.empty()) log = c.log_path;
    return std::make_unique<gateway::Gateway>(std::move(backend), c.retry, c.max_in_flight,
                                              cache, log);
}

pipeline::RunOptions build_options(const config::RunConfig& c, mloc_progress_fn progress,
                                   void* user) {
    pipeline::RunOptions options;
    options.model = c.model;
    options.temperature = c.temperature;
    options.max_output_tokens = c.max_output_tokens;
    options.token_budget = c.token_budget;
    options.gate_threshold = c.gate_threshold;
    options.max_in_flight = c.max_in_flight;
    options.parse_failure_budget = c.parse_failure_budget;
    if (progress) {
        options.progress = [progress, user](const std::string& line) {
            progress(line.c_str(), user);
        };
    }
    return options;
}

std::vector<int> select_behaviors(const mloc_corpus* corpus, const mloc_kb* kb,
                                  const int* behavior_ids, size_t behavior_count) {
    std::vector<int> ids;
    if (behavior_ids && behavior_count > 0) {
        ids.assign(behavior_ids, behavior_ids + behavior_count);
    } else {
        for (const kb::Behavior& b :
             kb::lookup_family(kb->taxonomy, kb->families, corpus->corpus.family)) {
            ids.push_back(b.id);
        }
    }
    return ids;
}

}  // namespace

mloc_status mloc_analyze(const mloc_corpus* corpus, const mloc_kb* kb,
                         const mloc_config* config, const char* mode, const int* behavior_ids,
                         size_t behavior_count, mloc_progress_fn progress, void* user,
                         mloc_report** out_report, char** out_stats_json) {
    if (!corpus || !kb || !config || !mode || !out_report) {
        return invalid_arg("corpus, kb, config, mode and out_report are required");
    }
    std::string mode_str(mode);
    if (mode_str != "malloc" && mode_str != "baseline") {
        return invalid_arg("mode must be malloc or baseline");
    }
    return guarded([&] {
        prompt::PromptEngine engine = build_engine(config->config);
        auto gw = build_gateway(config->config);
        pipeline::RunOptions options = build_options(config->config, progress, user);

        report::AnalysisReport result;
        if (mode_str == "malloc") {
            std::vector<int> ids = select_behaviors(corpus, kb, behavior_ids, behavior_count);
            result = pipeline::run_malloc(corpus->corpus, kb->taxonomy, ids, engine, *gw,
                                          options);
        } else {
            result = pipeline::run_baseline(corpus->corpus, kb->taxonomy, engine, *gw, options);
        }
        if (out_stats_json) *out_stats_json = dup_string(gw->stats().to_json());
        *out_report = new mloc_report{std::move(result)};
    });
}

mloc_status mloc_dump_prompts(const mloc_corpus* corpus, const mloc_kb* kb,
                              const mloc_config* config, const char* mode,
                              const int* behavior_ids, size_t behavior_count,
                              const char* out_dir, int* files_written) {
    if (!corpus || !kb || !config || !mode || !out_dir) {
        return invalid_arg("corpus, kb, config, mode and out_dir are required");
    }
    std::string mode_str(mode);
    if (mode_str != "malloc" && mode_str != "baseline") {
        return invalid_arg("mode must be malloc or baseline");
    }
    return guarded([&] {
        prompt::PromptEngine engine = build_engine(config->config);
        std::vector<int> ids = select_behaviors(corpus, kb, behavior_ids, behavior_count);
        int written = pipeline::dump_prompts(
            corpus->corpus, kb->taxonomy, ids, engine,
            mode_str == "malloc" ? report::RunMode::Malloc : report::RunMode::Baseline,
            config->config.token_budget, out_dir);
        if (files_written) *files_written = written;
    });
}

/* ------------------------------------------------------------- report */

mloc_status mloc_report_load(const char* path, mloc_report** out) {
    if (!path || !out) return invalid_arg("path and out are required");
    return guarded([&] { *out = new mloc_report{report::load_report(path)}; });
}

mloc_status mloc_report_save(const mloc_report* report, const char* path) {
    if (!report || !path) return invalid_arg("report and path are required");
    return guarded([&] { report::save_report(report->report, path); });
}

mloc_status mloc_report_serialize(const mloc_report* report, char** out_json) {
    if (!report || !out_json) return invalid_arg("report and out_json are required");
    return guarded([&] { *out_json = dup_string(report::serialize_report(report->report)); });
}

mloc_status mloc_report_digest_text(const mloc_report* report, char** out_text) {
    if (!report || !out_text) return invalid_arg("report and out_text are required");
    return guarded([&] { *out_text = dup_string(report::render_digest(report->report)); });
}

const char* mloc_report_apk_id(const mloc_report* r) {
    return r ? r->report.apk_id.c_str() : nullptr;
}

const char* mloc_report_mode(const mloc_report* r) {
    return r ? report::run_mode_name(r->report.mode) : nullptr;
}

const char* mloc_report_model(const mloc_report* r) {
    return r ? r->report.model.c_str() : nullptr;
}

int mloc_report_total_class_count(const mloc_report* r) {
    return r ? r->report.total_class_count : -1;
}

int mloc_report_total_method_count(const mloc_report* r) {
    return r ? r->report.total_method_count : -1;
}

int mloc_report_flagged_class_count(const mloc_report* r) {
    return r ? r->report.flagged_class_count : -1;
}

int mloc_report_flagged_method_count(const mloc_report* r) {
    return r ? r->report.flagged_method_count : -1;
}

double mloc_report_workload_reduction(const mloc_report* r) {
    return r ? r->report.workload_reduction : -1.0;
}

int mloc_report_finding_count(const mloc_report* r) {
    return r ? static_cast<int>(r->report.findings.size()) : -1;
}

int mloc_report_failure_count(const mloc_report* r) {
    return r ? static_cast<int>(r->report.failures.size()) : -1;
}

void mloc_report_free(mloc_report* r) { delete r; }

namespace {

const report::Finding* finding_at(const mloc_report* r, int fi) {
    if (!r || fi < 0 || fi >= static_cast<int>(r->report.findings.size())) return nullptr;
    return &r->report.findings[static_cast<size_t>(fi)];
}

const response::MethodFinding* method_at(const mloc_report* r, int fi, int mi) {
    const report::Finding* f = finding_at(r, fi);
    if (!f || mi < 0 || mi >= static_cast<int>(f->methods.size())) return nullptr;
    return &f->methods[static_cast<size_t>(mi)];
}

}  // namespace

const char* mloc_finding_class(const mloc_report* r, int fi) {
    const report::Finding* f = finding_at(r, fi);
    return f ? f->class_name.c_str() : nullptr;
}

int mloc_finding_behavior_id(const mloc_report* r, int fi) {
    const report::Finding* f = finding_at(r, fi);
    return f ? f->behavior_id : -1;
}

const char* mloc_finding_behavior_name(const mloc_report* r, int fi) {
    const report::Finding* f = finding_at(r, fi);
    return f ? f->behavior_name.c_str() : nullptr;
}

int mloc_finding_confidence(const mloc_report* r, int fi) {
    const report::Finding* f = finding_at(r, fi);
    return f ? f->class_confidence : -1;
}

const char* mloc_finding_explanation(const mloc_report* r, int fi) {
    const report::Finding* f = finding_at(r, fi);
    return f ? f->explanation.c_str() : nullptr;
}

int mloc_finding_method_count(const mloc_report* r, int fi) {
    const report::Finding* f = finding_at(r, fi);
    return f ? static_cast<int>(f->methods.size()) : -1;
}

const char* mloc_method_reported_line(const mloc_report* r, int fi, int mi) {
    const response::MethodFinding* m = method_at(r, fi, mi);
    return m ? m->reported_method_line.c_str() : nullptr;
}

const char* mloc_method_role(const mloc_report* r, int fi, int mi) {
    const response::MethodFinding* m = method_at(r, fi, mi);
    return m ? m->role.c_str() : nullptr;
}

int mloc_method_confidence(const mloc_report* r, int fi, int mi) {
    const response::MethodFinding* m = method_at(r, fi, mi);
    return m ? m->confidence : -1;
}

const char* mloc_method_resolution(const mloc_report* r, int fi, int mi) {
    const response::MethodFinding* m = method_at(r, fi, mi);
    return m ? response::resolution_name(m->resolution) : nullptr;
}

const char* mloc_method_signature(const mloc_report* r, int fi, int mi) {
    const response::MethodFinding* m = method_at(r, fi, mi);
    if (!m || !m->resolved_signature) return nullptr;
    return m->resolved_signature->c_str();
}

/* --------------------------------------------------------- evaluation */

mloc_status mloc_eval_against_truth(const mloc_report* report, const char* truth_path,
                                    const mloc_kb* kb, const char* count_unit,
                                    mloc_metrics** out) {
    if (!report || !truth_path || !kb || !out) {
        return invalid_arg("report, truth_path, kb and out are required");
    }
    return guarded([&] {
        evaluation::CountUnit unit = evaluation::CountUnit::Pair;
        if (count_unit && std::string(count_unit) == "component") {
            unit = evaluation::CountUnit::Component;
        } else if (count_unit && std::string(count_unit) != "pair" && *count_unit) {
            throw Error(ErrorCode::InvalidArgument, "count_unit must be pair or component");
        }
        auto truth = evaluation::load_ground_truth(truth_path, kb->taxonomy);
        auto [class_row, method_row] = evaluation::score(report->report, truth, unit);
        *out = new mloc_metrics{class_row, method_row, unit};
    });
}

mloc_status mloc_eval_from_verdicts(const mloc_report* report, const char* verdicts_path,
                                    mloc_metrics** out) {
    if (!report || !verdicts_path || !out) {
        return invalid_arg("report, verdicts_path and out are required");
    }
    return guarded([&] {
        auto records = verdicts::load_verdicts(verdicts_path);
        auto [class_row, method_row] = evaluation::score_from_verdicts(report->report, records);
        *out = new mloc_metrics{class_row, method_row, evaluation::CountUnit::Pair};
    });
}

mloc_status mloc_metrics_table(const mloc_metrics* metrics, const char* mode, const char* model,
                               char** out_text) {
    if (!metrics || !out_text) return invalid_arg("metrics and out_text are required");
    return guarded([&] {
        *out_text = dup_string(evaluation::render_metrics_table(
            mode ? mode : "-", model ? model : "-", metrics->class_row, metrics->method_row));
    });
}

mloc_status mloc_metrics_json(const mloc_metrics* metrics, char** out_json) {
    if (!metrics || !out_json) return invalid_arg("metrics and out_json are required");
    return guarded([&] {
        *out_json = dup_string(
            evaluation::metrics_json(metrics->class_row, metrics->method_row, metrics->unit));
    });
}

double mloc_metrics_value(const mloc_metrics* metrics, const char* level, const char* field) {
    if (!metrics || !level || !field) return -1.0;
    const evaluation::MetricsRow* row = nullptr;
    if (std::string(level) == "class") row = &metrics->class_row;
    if (std::string(level) == "method") row = &metrics->method_row;
    if (!row) return -1.0;
    std::string f(field);
    if (f == "tp") return static_cast<double>(row->tp);
    if (f == "fp") return static_cast<double>(row->fp);
    if (f == "fn") return row->precision_only ? -1.0 : static_cast<double>(row->fn);
    if (f == "precision") return row->precision;
    if (f == "recall") return row->precision_only ? -1.0 : row->recall;
    if (f == "f1") return row->precision_only ? -1.0 : row->f1;
    return -1.0;
}

int mloc_metrics_precision_only(const mloc_metrics* metrics) {
    return metrics && metrics->class_row.precision_only ? 1 : 0;
}

void mloc_metrics_free(mloc_metrics* metrics) { delete metrics; }

double mloc_workload_reduction(long flagged_methods, long total_methods) {
    return evaluation::workload_reduction(flagged_methods, total_methods);
}

mloc_status mloc_format_percent(double fraction, char** out_text) {
    if (!out_text) return invalid_arg("out_text is required");
    return guarded([&] { *out_text = dup_string(format_percent(fraction)); });
}

/* ----------------------------------------------------------- verdicts */

mloc_status mloc_verdicts_load(const char* path, mloc_verdicts** out) {
    if (!path || !out) return invalid_arg("path and out are required");
    return guarded([&] {
        auto records = verdicts::load_verdicts(path);
        auto effective = verdicts::effective_verdicts(records);
        *out = new mloc_verdicts{std::move(records), std::move(effective)};
    });
}

int mloc_verdicts_count(const mloc_verdicts* v) {
    return v ? static_cast<int>(v->records.size()) : -1;
}

int mloc_verdicts_is_decided(const mloc_verdicts* v, const char* class_name, int behavior_id,
                             const char* method_signature) {
    if (!v || !class_name) return 0;
    std::optional<std::string> sig;
    if (method_signature) sig = method_signature;
    return v->effective.count(verdicts::verdict_key(class_name, behavior_id, sig)) ? 1 : 0;
}

mloc_status mloc_verdicts_append(const char* path, const char* class_name, int behavior_id,
                                 const char* method_signature, const char* decision,
                                 const char* note) {
    if (!path || !class_name || !decision) {
        return invalid_arg("path, class_name and decision are required");
    }
    return guarded([&] {
        verdicts::VerdictRecord record;
        record.class_name = class_name;
        record.behavior_id = behavior_id;
        if (method_signature) record.method_signature = method_signature;
        record.decision = decision;
        record.note = note ? note : "";
        verdicts::append_verdict(path, record);
    });
}

void mloc_verdicts_free(mloc_verdicts* v) { delete v; }

}  // extern "C"
