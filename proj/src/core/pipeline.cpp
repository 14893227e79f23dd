#include "core/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdio>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "core/error.hpp"
#include "core/evaluation.hpp"
#include "core/util.hpp"

namespace mloc::pipeline {

response::Phase1Verdict merge_chunk_verdicts(
    const std::vector<response::Phase1Verdict>& verdicts) {
    if (verdicts.empty()) {
        throw Error(ErrorCode::InvalidArgument, "no chunk verdicts to merge");
    }
    if (verdicts.size() == 1) return verdicts.front();

    response::Phase1Verdict merged;
    int max_overall = 0;
    int max_malicious = 0;
    const response::Phase1Verdict* best_benign = nullptr;
    std::ostringstream explanation;
    bool first = true;
    for (size_t i = 0; i < verdicts.size(); ++i) {
        const response::Phase1Verdict& v = verdicts[i];
        max_overall = std::max(max_overall, v.confidence);
        if (v.is_malicious) {
            merged.is_malicious = true;
            max_malicious = std::max(max_malicious, v.confidence);
            if (!first) explanation << "\n";
            explanation << "[chunk " << (i + 1) << "/" << verdicts.size() << "] "
                        << v.explanation;
            first = false;
        } else if (!best_benign || v.confidence > best_benign->confidence) {
            best_benign = &v;
        }
    }
    if (merged.is_malicious) {
        merged.confidence = max_malicious;
        merged.explanation = explanation.str();
    } else {
        merged.confidence = max_overall;
        merged.explanation = best_benign ? best_benign->explanation : "";
    }
    return merged;
}

namespace {

struct TaskResult {
    std::optional<report::Finding> finding;
    std::vector<report::FailureRecord> failures;
    int parse_failures = 0;
};

// One completion with a single forced-refresh retry when the grammar
// fails to parse. Retrying an identical cached/mocked answer fails the
// same way; that is the honest outcome and the item gets marked.
template <typename Parser>
auto complete_and_parse(gateway::Gateway& gw, gateway::LlmRequest request, Parser&& parse) {
    gateway::LlmResponse response = gw.complete(request);
    try {
        return parse(response.text);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::ParseError) throw;
        request.force_refresh = true;
        gateway::LlmResponse retry = gw.complete(request);
        return parse(retry.text);
    }
}

gateway::LlmRequest make_request(const RunOptions& options, const prompt::RenderedPrompt& p) {
    gateway::LlmRequest req;
    req.prompt = p.text;
    req.model = options.model;
    req.temperature = options.temperature;
    req.max_output_tokens = options.max_output_tokens;
    return req;
}

void emit_progress(const RunOptions& options, std::mutex& mu, const std::string& line) {
    if (!options.progress) return;
    std::lock_guard<std::mutex> lock(mu);
    options.progress(line);
}

TaskResult run_pair(const smali::SmaliClass& cls, const kb::Behavior& behavior,
                    const prompt::PromptEngine& engine, gateway::Gateway& gw,
                    const RunOptions& options, std::mutex& progress_mu) {
    TaskResult result;

    std::vector<prompt::RenderedPrompt> prompts =
        engine.render_phase1(cls, behavior, options.token_budget);
    std::vector<response::Phase1Verdict> verdicts;
    for (const prompt::RenderedPrompt& p : prompts) {
        try {
            verdicts.push_back(
                complete_and_parse(gw, make_request(options, p), response::parse_phase1));
        } catch (const Error& e) {
            bool parse = e.code() == ErrorCode::ParseError;
            result.failures.push_back({cls.class_name, behavior.id,
                                       parse ? "phase1-parse" : "phase1", e.what()});
            if (parse) ++result.parse_failures;
            return result;
        }
    }
    response::Phase1Verdict verdict = merge_chunk_verdicts(verdicts);
    emit_progress(options, progress_mu,
                  "phase1 " + cls.class_name + " behavior=" + std::to_string(behavior.id) +
                      " verdict=" + (verdict.is_malicious ? "yes" : "no") +
                      " confidence=" + std::to_string(verdict.confidence));
    if (!verdict.is_malicious || verdict.confidence < options.gate_threshold) {
        return result;  // benign: the pair terminates here
    }

    report::Finding finding;
    finding.class_name = cls.class_name;
    finding.behavior_id = behavior.id;
    finding.behavior_name = behavior.name;
    finding.class_confidence = verdict.confidence;
    finding.explanation = verdict.explanation;
    finding.phase1_chunks = static_cast<int>(prompts.size());

    std::vector<response::MethodFinding> methods;
    std::vector<prompt::RenderedPrompt> p2 =
        engine.render_phase2(cls, verdict.explanation, options.token_budget);
    for (const prompt::RenderedPrompt& p : p2) {
        try {
            auto triples =
                complete_and_parse(gw, make_request(options, p), response::parse_phase2);
            for (const response::MethodTriple& t : triples) {
                methods.push_back(response::resolve_method(t, cls));
            }
        } catch (const Error& e) {
            bool parse = e.code() == ErrorCode::ParseError;
            result.failures.push_back({cls.class_name, behavior.id,
                                       parse ? "phase2-parse" : "phase2", e.what()});
            if (parse) ++result.parse_failures;
        }
    }
    finding.methods = response::merge_method_findings(std::move(methods));
    emit_progress(options, progress_mu,
                  "phase2 " + cls.class_name + " behavior=" + std::to_string(behavior.id) +
                      " methods=" + std::to_string(finding.methods.size()));
    result.finding = std::move(finding);
    return result;
}

// Baseline tasks can yield several findings (one per behavior), so the
// per-task result carries a vector there; malloc tasks yield at most one.
struct MultiTaskResult {
    std::vector<report::Finding> findings;
    std::vector<report::FailureRecord> failures;
    int parse_failures = 0;
};

MultiTaskResult run_baseline_class_multi(const smali::SmaliClass& cls,
                                         const kb::Taxonomy& taxonomy,
                                         const prompt::PromptEngine& engine,
                                         gateway::Gateway& gw, const RunOptions& options,
                                         std::mutex& progress_mu) {
    MultiTaskResult out;
    std::vector<prompt::RenderedPrompt> prompts =
        engine.render_baseline(cls, taxonomy, options.token_budget);

    std::vector<response::BaselineVerdict> verdicts;
    for (const prompt::RenderedPrompt& p : prompts) {
        try {
            verdicts.push_back(complete_and_parse(
                gw, make_request(options, p),
                [&taxonomy](const std::string& text) {
                    return response::parse_baseline(text, taxonomy);
                }));
        } catch (const Error& e) {
            bool parse = e.code() == ErrorCode::ParseError;
            out.failures.push_back(
                {cls.class_name, 0, parse ? "baseline-parse" : "baseline", e.what()});
            if (parse) ++out.parse_failures;
            return out;
        }
    }

    std::vector<response::Phase1Verdict> scalars;
    scalars.reserve(verdicts.size());
    for (const response::BaselineVerdict& v : verdicts) {
        scalars.push_back({v.is_malicious, v.confidence, v.explanation});
    }
    response::Phase1Verdict scalar = merge_chunk_verdicts(scalars);

    std::set<int> behavior_ids;
    std::set<std::string> unrecognized;
    std::vector<response::MethodFinding> methods;
    for (const response::BaselineVerdict& v : verdicts) {
        behavior_ids.insert(v.behavior_ids.begin(), v.behavior_ids.end());
        unrecognized.insert(v.unrecognized_behaviors.begin(), v.unrecognized_behaviors.end());
        for (const response::MethodTriple& t : v.methods) {
            methods.push_back(response::resolve_method(t, cls));
        }
    }

    emit_progress(options, progress_mu,
                  "baseline " + cls.class_name + " verdict=" +
                      (scalar.is_malicious ? "yes" : "no") +
                      " behaviors=" + std::to_string(behavior_ids.size()));

    for (const std::string& name : unrecognized) {
        out.failures.push_back(
            {cls.class_name, 0, "behavior-map", "unrecognized behavior: " + name});
    }
    if (!scalar.is_malicious) return out;

    std::vector<response::MethodFinding> merged_methods =
        response::merge_method_findings(std::move(methods));
    for (int id : behavior_ids) {
        report::Finding finding;
        finding.class_name = cls.class_name;
        finding.behavior_id = id;
        finding.behavior_name = taxonomy.by_id(id).name;
        finding.class_confidence = scalar.confidence;
        finding.explanation = scalar.explanation;
        finding.methods = merged_methods;
        finding.phase1_chunks = static_cast<int>(prompts.size());
        out.findings.push_back(std::move(finding));
    }
    return out;
}

std::vector<const smali::SmaliClass*> developer_classes(const smali::Corpus& corpus) {
    std::vector<const smali::SmaliClass*> out;
    for (const smali::SmaliClass& c : corpus.classes) {
        if (c.is_developer_code) out.push_back(&c);
    }
    return out;
}

template <typename Task>
void run_workers(int max_in_flight, size_t task_count, Task&& task) {
    int workers = std::max(1, std::min<int>(max_in_flight, static_cast<int>(task_count)));
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&next, task_count, &task] {
            for (size_t i = next.fetch_add(1); i < task_count; i = next.fetch_add(1)) {
                task(i);
            }
        });
    }
    for (std::thread& t : pool) t.join();
}

void enforce_parse_budget(const RunOptions& options, int parse_failures) {
    if (options.parse_failure_budget >= 0 && parse_failures > options.parse_failure_budget) {
        throw Error(ErrorCode::ParseBudgetExceeded,
                    std::to_string(parse_failures) + " parse failures exceed the budget of " +
                        std::to_string(options.parse_failure_budget));
    }
}

}  // namespace

report::AnalysisReport run_malloc(const smali::Corpus& corpus, const kb::Taxonomy& taxonomy,
                                  const std::vector<int>& behavior_ids,
                                  const prompt::PromptEngine& engine, gateway::Gateway& gateway,
                                  const RunOptions& options) {
    if (behavior_ids.empty()) {
        throw Error(ErrorCode::EmptyBehaviorSet, "no behaviors selected for analysis");
    }
    std::vector<int> ids = behavior_ids;
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    for (int id : ids) taxonomy.by_id(id);  // validate up front

    std::vector<const smali::SmaliClass*> classes = developer_classes(corpus);
    struct Pair {
        const smali::SmaliClass* cls;
        int behavior_id;
    };
    std::vector<Pair> tasks;
    for (const smali::SmaliClass* c : classes) {
        for (int id : ids) tasks.push_back({c, id});
    }

    std::vector<TaskResult> results(tasks.size());
    std::mutex progress_mu;
    std::exception_ptr first_error;
    std::mutex error_mu;
    run_workers(options.max_in_flight, tasks.size(), [&](size_t i) {
        try {
            results[i] = run_pair(*tasks[i].cls, taxonomy.by_id(tasks[i].behavior_id), engine,
                                  gateway, options, progress_mu);
        } catch (...) {
            std::lock_guard<std::mutex> lock(error_mu);
            if (!first_error) first_error = std::current_exception();
        }
    });
    if (first_error) std::rethrow_exception(first_error);

    report::AnalysisReport report;
    report.apk_id = corpus.apk_id;
    report.mode = report::RunMode::Malloc;
    report.model = options.model;
    int parse_failures = 0;
    for (TaskResult& r : results) {
        if (r.finding) report.findings.push_back(std::move(*r.finding));
        for (report::FailureRecord& f : r.failures) report.failures.push_back(std::move(f));
        parse_failures += r.parse_failures;
    }
    report.finalize(static_cast<int>(classes.size()), corpus.method_count);
    enforce_parse_budget(options, parse_failures);
    return report;
}

report::AnalysisReport run_baseline(const smali::Corpus& corpus, const kb::Taxonomy& taxonomy,
                                    const prompt::PromptEngine& engine,
                                    gateway::Gateway& gateway, const RunOptions& options) {
    std::vector<const smali::SmaliClass*> classes = developer_classes(corpus);

    std::vector<MultiTaskResult> results(classes.size());
    std::mutex progress_mu;
    std::exception_ptr first_error;
    std::mutex error_mu;
    run_workers(options.max_in_flight, classes.size(), [&](size_t i) {
        try {
            results[i] = run_baseline_class_multi(*classes[i], taxonomy, engine, gateway,
                                                  options, progress_mu);
        } catch (...) {
            std::lock_guard<std::mutex> lock(error_mu);
            if (!first_error) first_error = std::current_exception();
        }
    });
    if (first_error) std::rethrow_exception(first_error);

    report::AnalysisReport report;
    report.apk_id = corpus.apk_id;
    report.mode = report::RunMode::Baseline;
    report.model = options.model;
    int parse_failures = 0;
    for (MultiTaskResult& r : results) {
        for (report::Finding& f : r.findings) report.findings.push_back(std::move(f));
        for (report::FailureRecord& f : r.failures) report.failures.push_back(std::move(f));
        parse_failures += r.parse_failures;
    }
    report.finalize(static_cast<int>(classes.size()), corpus.method_count);
    enforce_parse_budget(options, parse_failures);
    return report;
}

namespace {

std::string sanitize_for_filename(std::string_view name) {
    std::string out;
    for (char c : name) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            out.push_back(c);
        } else {
            out.push_back('_');
        }
    }
    while (!out.empty() && out.back() == '_') out.pop_back();
    return out;
}

}  // namespace

int dump_prompts(const smali::Corpus& corpus, const kb::Taxonomy& taxonomy,
                 const std::vector<int>& behavior_ids, const prompt::PromptEngine& engine,
                 report::RunMode mode, int token_budget, const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);

    int written = 0;
    char index_buf[16];
    auto write_prompt = [&](const prompt::RenderedPrompt& p) {
        std::snprintf(index_buf, sizeof(index_buf), "%04d", written);
        std::string name = std::string(index_buf) + "_" +
                           prompt::prompt_kind_name(p.kind) +
                           (p.behavior_id ? "_b" + std::to_string(*p.behavior_id) : "") + "_" +
                           sanitize_for_filename(p.class_name) + "_c" +
                           std::to_string(p.chunk_index) + "of" +
                           std::to_string(p.chunk_count) + ".txt";
        write_file(out_dir / name, p.text);
        ++written;
    };

    for (const smali::SmaliClass& cls : corpus.classes) {
        if (!cls.is_developer_code) continue;
        if (mode == report::RunMode::Baseline) {
            for (const auto& p : engine.render_baseline(cls, taxonomy, token_budget)) {
                write_prompt(p);
            }
        } else {
            for (int id : behavior_ids) {
                for (const auto& p :
                     engine.render_phase1(cls, taxonomy.by_id(id), token_budget)) {
                    write_prompt(p);
                }
            }
        }
    }
    return written;
}

}  // namespace mloc::pipeline
