// mloc command-line front end. Everything goes through the C API in
// mloc/mloc.h; the core library is never linked directly.

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include <CLI11.hpp>

#include "mloc/mloc.h"

namespace {

// Owner for strings returned through char** out parameters.
class ApiString {
public:
    ApiString() = default;
    ~ApiString() { mloc_string_free(ptr_); }
    ApiString(const ApiString&) = delete;
    ApiString& operator=(const ApiString&) = delete;

    char** out() { return &ptr_; }
    const char* c_str() const { return ptr_ ? ptr_ : ""; }
    std::string str() const { return ptr_ ? ptr_ : ""; }

private:
    char* ptr_ = nullptr;
};

template <typename T, void (*Free)(T*)>
class Handle {
public:
    Handle() = default;
    ~Handle() { reset(); }
    Handle(const Handle&) = delete;
    Handle& operator=(const Handle&) = delete;

    T** out() {
        reset();
        return &ptr_;
    }
    T* get() const { return ptr_; }
    explicit operator bool() const { return ptr_ != nullptr; }

private:
    void reset() {
        if (ptr_) Free(ptr_);
        ptr_ = nullptr;
    }
    T* ptr_ = nullptr;
};

using CorpusHandle = Handle<mloc_corpus, mloc_corpus_free>;
using KbHandle = Handle<mloc_kb, mloc_kb_free>;
using ConfigHandle = Handle<mloc_config, mloc_config_free>;
using ReportHandle = Handle<mloc_report, mloc_report_free>;
using MetricsHandle = Handle<mloc_metrics, mloc_metrics_free>;
using VerdictsHandle = Handle<mloc_verdicts, mloc_verdicts_free>;

int fail(mloc_status status) {
    std::cerr << "error: " << mloc_last_error() << "\n";
    return mloc_exit_code(status);
}

#define CHECK_API(call)                          \
    do {                                         \
        mloc_status status__ = (call);           \
        if (status__ != MLOC_OK) {               \
            return fail(status__);               \
        }                                        \
    } while (0)

void progress_to_stderr(const char* line, void*) { std::cerr << line << "\n"; }

// Flags that override config-file keys; applied in flag > file > default
// order by setting them after the file is loaded.
struct ConfigOverrides {
    std::vector<std::pair<std::string, std::string>> values;

    void add(const std::string& key, const std::string& value) {
        values.emplace_back(key, value);
    }
};

int load_config(ConfigHandle& config, const std::string& config_path,
                const ConfigOverrides& overrides) {
    CHECK_API(mloc_config_new(config.out()));
    if (!config_path.empty()) {
        CHECK_API(mloc_config_load_file(config.get(), config_path.c_str()));
    }
    for (const auto& [key, value] : overrides.values) {
        CHECK_API(mloc_config_set(config.get(), key.c_str(), value.c_str()));
    }
    return 0;
}

std::string config_value(const ConfigHandle& config, const char* key) {
    ApiString value;
    if (mloc_config_get(config.get(), key, value.out()) != MLOC_OK) return "";
    return value.str();
}

int open_kb_from_config(const ConfigHandle& config, KbHandle& kb) {
    std::string taxonomy = config_value(config, "taxonomy_path");
    std::string families = config_value(config, "families_path");
    std::string policy = config_value(config, "unknown_family_policy");
    CHECK_API(mloc_kb_open(taxonomy.empty() ? nullptr : taxonomy.c_str(),
                           families.empty() ? nullptr : families.c_str(), policy.c_str(),
                           kb.out()));
    return 0;
}

// ------------------------------------------------------------- ingest

struct IngestArgs {
    std::string path;
    std::string apk_id;
    std::string family;
    std::vector<std::string> filter;
    std::string out = "corpus.json";
    std::string config_path;
    std::string decompile_out;
    ConfigOverrides overrides;
};

int cmd_ingest(const IngestArgs& args) {
    ConfigHandle config;
    if (int rc = load_config(config, args.config_path, args.overrides)) return rc;

    std::string root = args.path;
    std::error_code ec;
    if (std::filesystem::is_regular_file(args.path, ec)) {
        std::string tool = config_value(config, "decompile_cmd");
        std::string out_dir = args.decompile_out.empty()
                                  ? args.path + ".decompiled"
                                  : args.decompile_out;
        ApiString smali_root;
        CHECK_API(mloc_decompile(args.path.c_str(), tool.c_str(), out_dir.c_str(),
                                 smali_root.out()));
        root = smali_root.str();
        std::cerr << "decompiled to " << root << "\n";
    }

    std::vector<const char*> filters;
    for (const std::string& f : args.filter) filters.push_back(f.c_str());

    CorpusHandle corpus;
    CHECK_API(mloc_corpus_ingest(root.c_str(), args.apk_id.c_str(),
                                 args.family.empty() ? nullptr : args.family.c_str(),
                                 filters.empty() ? nullptr : filters.data(), filters.size(),
                                 corpus.out()));
    CHECK_API(mloc_corpus_save(corpus.get(), args.out.c_str()));

    ApiString summary;
    CHECK_API(mloc_corpus_summary(corpus.get(), summary.out()));
    std::cout << summary.c_str();
    std::cerr << "corpus written to " << args.out << "\n";
    return 0;
}

// ------------------------------------------------------ analyze/baseline

struct AnalyzeArgs {
    std::string corpus_path;
    std::string mode = "malloc";
    std::vector<int> behaviors;
    std::string out = "report.json";
    std::string stats_out;
    std::string config_path;
    ConfigOverrides overrides;
};

int cmd_analyze(const AnalyzeArgs& args) {
    ConfigHandle config;
    if (int rc = load_config(config, args.config_path, args.overrides)) return rc;

    CorpusHandle corpus;
    CHECK_API(mloc_corpus_load(args.corpus_path.c_str(), corpus.out()));
    KbHandle kb;
    if (int rc = open_kb_from_config(config, kb)) return rc;

    ReportHandle report;
    ApiString stats;
    CHECK_API(mloc_analyze(corpus.get(), kb.get(), config.get(), args.mode.c_str(),
                           args.behaviors.empty() ? nullptr : args.behaviors.data(),
                           args.behaviors.size(), progress_to_stderr, nullptr, report.out(),
                           stats.out()));
    CHECK_API(mloc_report_save(report.get(), args.out.c_str()));

    std::cerr << "gateway stats: " << stats.c_str();
    if (!args.stats_out.empty()) {
        std::FILE* f = std::fopen(args.stats_out.c_str(), "wb");
        if (!f) {
            std::cerr << "error: cannot write " << args.stats_out << "\n";
            return 2;
        }
        std::fputs(stats.c_str(), f);
        std::fclose(f);
    }
    std::cerr << "findings: " << mloc_report_finding_count(report.get())
              << "  failures: " << mloc_report_failure_count(report.get()) << "\n";
    std::cerr << "report written to " << args.out << "\n";
    return 0;
}

// --------------------------------------------------------------- eval

struct EvalArgs {
    std::string report_path;
    std::string truth_path;
    std::string verdicts_path;
    std::string count_unit = "pair";
    std::string metrics_out;
    std::string config_path;
    ConfigOverrides overrides;
};

int cmd_eval(const EvalArgs& args) {
    if (args.truth_path.empty() == args.verdicts_path.empty()) {
        std::cerr << "error: pass exactly one of --truth or --from-verdicts\n";
        return 1;
    }
    ConfigHandle config;
    if (int rc = load_config(config, args.config_path, args.overrides)) return rc;

    ReportHandle report;
    CHECK_API(mloc_report_load(args.report_path.c_str(), report.out()));

    MetricsHandle metrics;
    if (!args.truth_path.empty()) {
        KbHandle kb;
        if (int rc = open_kb_from_config(config, kb)) return rc;
        CHECK_API(mloc_eval_against_truth(report.get(), args.truth_path.c_str(), kb.get(),
                                          args.count_unit.c_str(), metrics.out()));
    } else {
        CHECK_API(mloc_eval_from_verdicts(report.get(), args.verdicts_path.c_str(),
                                          metrics.out()));
    }

    ApiString table;
    CHECK_API(mloc_metrics_table(metrics.get(), mloc_report_mode(report.get()),
                                 mloc_report_model(report.get()), table.out()));
    std::cout << table.c_str();

    if (!args.metrics_out.empty()) {
        ApiString json;
        CHECK_API(mloc_metrics_json(metrics.get(), json.out()));
        std::FILE* f = std::fopen(args.metrics_out.c_str(), "wb");
        if (!f) {
            std::cerr << "error: cannot write " << args.metrics_out << "\n";
            return 2;
        }
        std::fputs(json.c_str(), f);
        std::fclose(f);
    }
    return 0;
}

// ------------------------------------------------------------- review

struct ReviewArgs {
    std::string report_path;
    std::string verdicts_path;
};

struct ReviewItem {
    std::string class_name;
    int behavior_id = 0;
    const char* signature = nullptr;  // null = class-level
};

// Returns false on quit/EOF.
bool review_prompt(const ReviewArgs& args, const ReviewItem& item, bool& quit) {
    for (;;) {
        std::cout << "[a]ccept [r]eject [u]nsure [s]kip [q]uit > " << std::flush;
        std::string line;
        if (!std::getline(std::cin, line)) {
            quit = true;
            return false;
        }
        size_t sp = line.find(' ');
        std::string letter = sp == std::string::npos ? line : line.substr(0, sp);
        std::string note = sp == std::string::npos ? "" : line.substr(sp + 1);
        const char* decision = nullptr;
        if (letter == "a") decision = "accepted";
        else if (letter == "r") decision = "rejected";
        else if (letter == "u") decision = "unsure";
        else if (letter == "s") return false;
        else if (letter == "q") {
            quit = true;
            return false;
        } else {
            std::cout << "unrecognized input\n";
            continue;
        }
        mloc_status status = mloc_verdicts_append(args.verdicts_path.c_str(),
                                                  item.class_name.c_str(), item.behavior_id,
                                                  item.signature, decision, note.c_str());
        if (status != MLOC_OK) {
            std::cerr << "error: " << mloc_last_error() << "\n";
            quit = true;
            return false;
        }
        return true;
    }
}

int cmd_review(const ReviewArgs& args) {
    ReportHandle report;
    CHECK_API(mloc_report_load(args.report_path.c_str(), report.out()));

    VerdictsHandle existing;
    CHECK_API(mloc_verdicts_load(args.verdicts_path.c_str(), existing.out()));

    int findings = mloc_report_finding_count(report.get());
    int decided = 0;
    int recorded = 0;
    bool quit = false;

    for (int fi = 0; fi < findings && !quit; ++fi) {
        const char* cls = mloc_finding_class(report.get(), fi);
        int behavior = mloc_finding_behavior_id(report.get(), fi);

        std::cout << "\n=== Finding " << (fi + 1) << "/" << findings << " ===\n";
        std::cout << "Class: " << cls << "\n";
        std::cout << "Behavior: " << mloc_finding_behavior_name(report.get(), fi) << "\n";
        std::cout << "Confidence: " << mloc_finding_confidence(report.get(), fi) << "\n";
        std::cout << "Explanation: " << mloc_finding_explanation(report.get(), fi) << "\n";

        ReviewItem class_item{cls, behavior, nullptr};
        if (mloc_verdicts_is_decided(existing.get(), cls, behavior, nullptr)) {
            std::cout << "(already decided)\n";
            ++decided;
        } else if (review_prompt(args, class_item, quit)) {
            ++recorded;
        }

        int methods = mloc_finding_method_count(report.get(), fi);
        for (int mi = 0; mi < methods && !quit; ++mi) {
            const char* signature = mloc_method_signature(report.get(), fi, mi);
            const char* reported = mloc_method_reported_line(report.get(), fi, mi);
            const char* key = signature ? signature : reported;

            std::cout << "\nMethod: " << (signature ? signature : reported);
            if (!signature) std::cout << "  (unmatched)";
            std::cout << "\nResolution: " << mloc_method_resolution(report.get(), fi, mi)
                      << "\n";
            std::cout << "Role Explanation: " << mloc_method_role(report.get(), fi, mi) << "\n";
            std::cout << "Confidence: " << mloc_method_confidence(report.get(), fi, mi) << "\n";

            ReviewItem method_item{cls, behavior, key};
            if (mloc_verdicts_is_decided(existing.get(), cls, behavior, key)) {
                std::cout << "(already decided)\n";
                ++decided;
            } else if (review_prompt(args, method_item, quit)) {
                ++recorded;
            }
        }
    }

    std::cout << "\nreview " << (quit ? "stopped" : "complete") << ": " << recorded
              << " new decisions, " << decided << " already decided, verdicts in "
              << args.verdicts_path << "\n";
    return 0;
}

// ------------------------------------------------------------- report

int cmd_report(const std::string& report_path, const std::string& out) {
    ReportHandle report;
    CHECK_API(mloc_report_load(report_path.c_str(), report.out()));
    ApiString digest;
    CHECK_API(mloc_report_digest_text(report.get(), digest.out()));
    if (out.empty()) {
        std::cout << digest.c_str();
    } else {
        std::FILE* f = std::fopen(out.c_str(), "wb");
        if (!f) {
            std::cerr << "error: cannot write " << out << "\n";
            return 2;
        }
        std::fputs(digest.c_str(), f);
        std::fclose(f);
    }
    return 0;
}

// -------------------------------------------------------- dump-prompts

struct DumpArgs {
    std::string corpus_path;
    std::string mode = "malloc";
    std::vector<int> behaviors;
    std::string out_dir;
    std::string config_path;
    ConfigOverrides overrides;
};

int cmd_dump_prompts(const DumpArgs& args) {
    ConfigHandle config;
    if (int rc = load_config(config, args.config_path, args.overrides)) return rc;
    CorpusHandle corpus;
    CHECK_API(mloc_corpus_load(args.corpus_path.c_str(), corpus.out()));
    KbHandle kb;
    if (int rc = open_kb_from_config(config, kb)) return rc;

    int written = 0;
    CHECK_API(mloc_dump_prompts(corpus.get(), kb.get(), config.get(), args.mode.c_str(),
                                args.behaviors.empty() ? nullptr : args.behaviors.data(),
                                args.behaviors.size(), args.out_dir.c_str(), &written));
    std::cerr << written << " prompts written to " << args.out_dir << "\n";
    return 0;
}

void add_override_flags(CLI::App* cmd, ConfigOverrides& overrides) {
    static const char* keys[] = {
        "backend",       "model",          "base_url",        "api_key_env",
        "temperature",   "max_in_flight",  "gate_threshold",  "token_budget",
        "cache_dir",     "log_path",       "mock_script_path"};
    for (const char* key : keys) {
        std::string flag = "--" + std::string(key);
        for (char& c : flag) {
            if (c == '_') c = '-';
        }
        std::string key_copy = key;
        cmd->add_option_function<std::string>(
            flag, [&overrides, key_copy](const std::string& v) { overrides.add(key_copy, v); },
            "override config key " + key_copy);
    }
    cmd->add_option_function<std::vector<std::string>>(
        "--set",
        [&overrides](const std::vector<std::string>& kvs) {
            for (const std::string& kv : kvs) {
                size_t eq = kv.find('=');
                if (eq == std::string::npos) {
                    throw CLI::ValidationError("--set expects key=value");
                }
                overrides.add(kv.substr(0, eq), kv.substr(eq + 1));
            }
        },
        "set any config key (key=value)");
    cmd->add_option_function<std::vector<std::string>>(
        "--filter",
        [&overrides](const std::vector<std::string>& prefixes) {
            for (const std::string& p : prefixes) overrides.add("filter", p);
        },
        "developer-code package prefix (repeatable)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mloc - malicious payload localization for decompiled Android apps"};
    app.require_subcommand(1);

    IngestArgs ingest_args;
    CLI::App* ingest = app.add_subcommand(
        "ingest", "parse a smali tree (or decompile an APK) into a corpus file");
    ingest->add_option("path", ingest_args.path, "smali root directory or APK file")->required();
    ingest->add_option("--apk-id", ingest_args.apk_id, "identifier for the sample")->required();
    ingest->add_option("--family", ingest_args.family, "malware family label");
    ingest->add_option("--filter", ingest_args.filter,
                       "developer-code class prefix, e.g. Lcom/app/ (repeatable)");
    ingest->add_option("--out", ingest_args.out, "corpus file to write (default corpus.json)");
    ingest->add_option("--config", ingest_args.config_path, "config file (JSON)");
    ingest->add_option("--decompile-out", ingest_args.decompile_out,
                       "working directory for the decompiler");
    ingest->add_option_function<std::string>(
        "--decompile-cmd",
        [&ingest_args](const std::string& v) { ingest_args.overrides.add("decompile_cmd", v); },
        "decompiler command template with {apk} and {out}");

    AnalyzeArgs analyze_args;
    CLI::App* analyze =
        app.add_subcommand("analyze", "run the two-phase analysis over a corpus");
    analyze->add_option("corpus", analyze_args.corpus_path, "corpus file")->required();
    analyze->add_option("--behavior", analyze_args.behaviors,
                        "behavior id to probe (repeatable; default: family lookup)");
    analyze->add_option("--out", analyze_args.out, "report file (default report.json)");
    analyze->add_option("--stats-out", analyze_args.stats_out, "gateway stats JSON file");
    analyze->add_option("--config", analyze_args.config_path, "config file (JSON)");
    add_override_flags(analyze, analyze_args.overrides);

    AnalyzeArgs baseline_args;
    baseline_args.mode = "baseline";
    CLI::App* baseline =
        app.add_subcommand("baseline", "run the single-prompt baseline over a corpus");
    baseline->add_option("corpus", baseline_args.corpus_path, "corpus file")->required();
    baseline->add_option("--out", baseline_args.out, "report file (default report.json)");
    baseline->add_option("--stats-out", baseline_args.stats_out, "gateway stats JSON file");
    baseline->add_option("--config", baseline_args.config_path, "config file (JSON)");
    add_override_flags(baseline, baseline_args.overrides);

    EvalArgs eval_args;
    CLI::App* eval = app.add_subcommand("eval", "score a report against ground truth or verdicts");
    eval->add_option("report", eval_args.report_path, "report file")->required();
    eval->add_option("--truth", eval_args.truth_path, "ground-truth file");
    eval->add_option("--from-verdicts", eval_args.verdicts_path, "analyst verdict file");
    eval->add_option("--count-unit", eval_args.count_unit, "pair (default) or component")
        ->check(CLI::IsMember({"pair", "component"}));
    eval->add_option("--metrics-out", eval_args.metrics_out, "metrics JSON file");
    eval->add_option("--config", eval_args.config_path, "config file (JSON)");
    add_override_flags(eval, eval_args.overrides);

    ReviewArgs review_args;
    CLI::App* review =
        app.add_subcommand("review", "interactively accept/reject findings of a report");
    review->add_option("report", review_args.report_path, "report file")->required();
    review->add_option("--verdicts", review_args.verdicts_path, "verdict file (JSON lines)")
        ->required();

    std::string report_path, report_out;
    CLI::App* report_cmd =
        app.add_subcommand("report", "render the analyst digest of a report");
    report_cmd->add_option("report", report_path, "report file")->required();
    report_cmd->add_option("--out", report_out, "write digest here instead of stdout");

    DumpArgs dump_args;
    CLI::App* dump = app.add_subcommand("dump-prompts", "write every rendered prompt to disk");
    dump->add_option("corpus", dump_args.corpus_path, "corpus file")->required();
    dump->add_option("--mode", dump_args.mode, "malloc (default) or baseline")
        ->check(CLI::IsMember({"malloc", "baseline"}));
    dump->add_option("--behavior", dump_args.behaviors, "behavior id (repeatable)");
    dump->add_option("--out", dump_args.out_dir, "output directory")->required();
    dump->add_option("--config", dump_args.config_path, "config file (JSON)");
    add_override_flags(dump, dump_args.overrides);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;  // usage errors exit 1
    }

    try {
        if (ingest->parsed()) return cmd_ingest(ingest_args);
        if (analyze->parsed()) return cmd_analyze(analyze_args);
        if (baseline->parsed()) return cmd_analyze(baseline_args);
        if (eval->parsed()) return cmd_eval(eval_args);
        if (review->parsed()) return cmd_review(review_args);
        if (report_cmd->parsed()) return cmd_report(report_path, report_out);
        if (dump->parsed()) return cmd_dump_prompts(dump_args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
