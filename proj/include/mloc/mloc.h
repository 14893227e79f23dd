/*
 * mloc - malicious payload localization for decompiled Android apps.
 *
 * C API of the shared library. All objects are opaque handles created and
 * released through these functions; every fallible call returns an
 * mloc_status and leaves a human-readable message in mloc_last_error()
 * (thread-local). Strings returned through char** out-parameters are owned
 * by the caller and released with mloc_string_free().
 */

#ifndef MLOC_H
#define MLOC_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#ifndef MLOC_API
#define MLOC_API __attribute__((visibility("default")))
#endif

typedef enum mloc_status {
    MLOC_OK = 0,
    MLOC_ERR_INVALID_ARG = 1,
    MLOC_ERR_IO = 2,
    MLOC_ERR_FORMAT = 3,       /* corpus/report/truth/verdict/config files */
    MLOC_ERR_SMALI = 4,        /* smali parse errors */
    MLOC_ERR_KB = 5,           /* taxonomy / family table */
    MLOC_ERR_TEMPLATE = 6,     /* prompt templates */
    MLOC_ERR_GATEWAY = 7,      /* auth, transport, rate limit, cache miss, mock */
    MLOC_ERR_LLM_PARSE = 8,    /* completion grammar violations */
    MLOC_ERR_EVAL = 9,         /* apk mismatch, unknown behavior, dangling verdict */
    MLOC_ERR_PARSE_BUDGET = 10,
    MLOC_ERR_TOOL = 11,        /* external decompiler */
    MLOC_ERR_INTERNAL = 12
} mloc_status;

MLOC_API const char* mloc_version(void);
MLOC_API const char* mloc_last_error(void);
MLOC_API void mloc_string_free(char* s);

/* CLI exit-code convention: 0 ok, 1 usage, 2 input error, 3 gateway
 * error, 4 parse-failure budget exceeded. */
MLOC_API int mloc_exit_code(mloc_status status);

/* ------------------------------------------------------------- corpus */

typedef struct mloc_corpus mloc_corpus;

MLOC_API mloc_status mloc_corpus_ingest(const char* root_dir, const char* apk_id,
                                        const char* family /* nullable */,
                                        const char* const* filter_prefixes, size_t filter_count,
                                        mloc_corpus** out);
MLOC_API mloc_status mloc_corpus_load(const char* path, mloc_corpus** out);
MLOC_API mloc_status mloc_corpus_save(const mloc_corpus* corpus, const char* path);
MLOC_API mloc_status mloc_corpus_summary(const mloc_corpus* corpus, char** out_text);
MLOC_API const char* mloc_corpus_apk_id(const mloc_corpus* corpus);
MLOC_API int mloc_corpus_class_count(const mloc_corpus* corpus);
MLOC_API int mloc_corpus_developer_class_count(const mloc_corpus* corpus);
MLOC_API int mloc_corpus_method_count(const mloc_corpus* corpus);
MLOC_API void mloc_corpus_free(mloc_corpus* corpus);

/* Runs the external decompiler command template ({apk} and {out}
 * placeholders) and returns the smali root to ingest. */
MLOC_API mloc_status mloc_decompile(const char* apk_path, const char* tool_command,
                                    const char* out_dir, char** smali_root_out);

/* ----------------------------------------------------- knowledge base */

typedef struct mloc_kb mloc_kb;

/* NULL paths load the built-in defaults. policy: "all" or "error". */
MLOC_API mloc_status mloc_kb_open(const char* behaviors_path, const char* families_path,
                                  const char* unknown_family_policy, mloc_kb** out);
MLOC_API int mloc_kb_behavior_count(const mloc_kb* kb);
MLOC_API const char* mloc_kb_behavior_name(const mloc_kb* kb, int behavior_id);
MLOC_API mloc_status mloc_kb_lookup_family(const mloc_kb* kb, const char* family /* nullable */,
                                           int* ids_out, size_t capacity, size_t* count_out);
MLOC_API void mloc_kb_free(mloc_kb* kb);

/* ------------------------------------------------------------- config */

typedef struct mloc_config mloc_config;

MLOC_API mloc_status mloc_config_new(mloc_config** out);
MLOC_API mloc_status mloc_config_load_file(mloc_config* config, const char* path);
MLOC_API mloc_status mloc_config_set(mloc_config* config, const char* key, const char* value);
MLOC_API mloc_status mloc_config_get(const mloc_config* config, const char* key,
                                     char** out_value);
MLOC_API void mloc_config_free(mloc_config* config);

/* ----------------------------------------------------------- analysis */

typedef struct mloc_report mloc_report;
typedef void (*mloc_progress_fn)(const char* line, void* user);

/* mode: "malloc" (two-phase) or "baseline". behavior_ids NULL: derive the
 * probe set from the corpus family via the knowledge-base lookup table.
 * out_stats_json (optional) receives the gateway accounting as JSON. */
MLOC_API mloc_status mloc_analyze(const mloc_corpus* corpus, const mloc_kb* kb,
                                  const mloc_config* config, const char* mode,
                                  const int* behavior_ids, size_t behavior_count,
                                  mloc_progress_fn progress, void* user,
                                  mloc_report** out_report, char** out_stats_json);

MLOC_API mloc_status mloc_dump_prompts(const mloc_corpus* corpus, const mloc_kb* kb,
                                       const mloc_config* config, const char* mode,
                                       const int* behavior_ids, size_t behavior_count,
                                       const char* out_dir, int* files_written);

/* ------------------------------------------------------------- report */

MLOC_API mloc_status mloc_report_load(const char* path, mloc_report** out);
MLOC_API mloc_status mloc_report_save(const mloc_report* report, const char* path);
MLOC_API mloc_status mloc_report_serialize(const mloc_report* report, char** out_json);
MLOC_API mloc_status mloc_report_digest_text(const mloc_report* report, char** out_text);
MLOC_API const char* mloc_report_apk_id(const mloc_report* report);
MLOC_API const char* mloc_report_mode(const mloc_report* report);
MLOC_API const char* mloc_report_model(const mloc_report* report);
MLOC_API int mloc_report_total_class_count(const mloc_report* report);
MLOC_API int mloc_report_total_method_count(const mloc_report* report);
MLOC_API int mloc_report_flagged_class_count(const mloc_report* report);
MLOC_API int mloc_report_flagged_method_count(const mloc_report* report);
MLOC_API double mloc_report_workload_reduction(const mloc_report* report);
MLOC_API int mloc_report_finding_count(const mloc_report* report);
MLOC_API int mloc_report_failure_count(const mloc_report* report);
MLOC_API void mloc_report_free(mloc_report* report);

/* Finding accessors; fi in [0, finding_count). Returned const char*
 * pointers stay valid while the report handle lives. */
MLOC_API const char* mloc_finding_class(const mloc_report* report, int fi);
MLOC_API int mloc_finding_behavior_id(const mloc_report* report, int fi);
MLOC_API const char* mloc_finding_behavior_name(const mloc_report* report, int fi);
MLOC_API int mloc_finding_confidence(const mloc_report* report, int fi);
MLOC_API const char* mloc_finding_explanation(const mloc_report* report, int fi);
MLOC_API int mloc_finding_method_count(const mloc_report* report, int fi);

/* Method accessors; mi in [0, method_count). signature is NULL for
 * unmatched findings. resolution: exact|normalized|fuzzy|unmatched. */
MLOC_API const char* mloc_method_reported_line(const mloc_report* report, int fi, int mi);
MLOC_API const char* mloc_method_role(const mloc_report* report, int fi, int mi);
MLOC_API int mloc_method_confidence(const mloc_report* report, int fi, int mi);
MLOC_API const char* mloc_method_resolution(const mloc_report* report, int fi, int mi);
MLOC_API const char* mloc_method_signature(const mloc_report* report, int fi, int mi);

/* --------------------------------------------------------- evaluation */

typedef struct mloc_metrics mloc_metrics;

/* count_unit: "pair" (component, behavior) or "component". */
MLOC_API mloc_status mloc_eval_against_truth(const mloc_report* report, const char* truth_path,
                                             const mloc_kb* kb, const char* count_unit,
                                             mloc_metrics** out);
MLOC_API mloc_status mloc_eval_from_verdicts(const mloc_report* report,
                                             const char* verdicts_path, mloc_metrics** out);
MLOC_API mloc_status mloc_metrics_table(const mloc_metrics* metrics, const char* mode,
                                        const char* model, char** out_text);
MLOC_API mloc_status mloc_metrics_json(const mloc_metrics* metrics, char** out_json);
/* level: "class"|"method"; field: tp|fp|fn|precision|recall|f1. NaN-free:
 * returns -1 for undefined fields (fn/recall/f1 under verdict scoring). */
MLOC_API double mloc_metrics_value(const mloc_metrics* metrics, const char* level,
                                   const char* field);
MLOC_API int mloc_metrics_precision_only(const mloc_metrics* metrics);
MLOC_API void mloc_metrics_free(mloc_metrics* metrics);

MLOC_API double mloc_workload_reduction(long flagged_methods, long total_methods);
MLOC_API mloc_status mloc_format_percent(double fraction, char** out_text);

/* ----------------------------------------------------------- verdicts */

typedef struct mloc_verdicts mloc_verdicts;

/* A missing file loads as an empty record set. */
MLOC_API mloc_status mloc_verdicts_load(const char* path, mloc_verdicts** out);
MLOC_API int mloc_verdicts_count(const mloc_verdicts* verdicts);
MLOC_API int mloc_verdicts_is_decided(const mloc_verdicts* verdicts, const char* class_name,
                                      int behavior_id,
                                      const char* method_signature /* nullable */);
/* decision: accepted|rejected|unsure. Appends one JSON line and flushes. */
MLOC_API mloc_status mloc_verdicts_append(const char* path, const char* class_name,
                                          int behavior_id,
                                          const char* method_signature /* nullable */,
                                          const char* decision, const char* note);
MLOC_API void mloc_verdicts_free(mloc_verdicts* verdicts);

#ifdef __cplusplus
}
#endif

#endif /* MLOC_H */
