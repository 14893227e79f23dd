#include "core/smali.hpp"

#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <map>
#include <sstream>

#include <json.hpp>

#include "core/error.hpp"
#include "core/util.hpp"

extern char** environ;

namespace mloc::smali {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

bool SmaliMethod::has_modifier(std::string_view m) const {
    return std::find(modifiers.begin(), modifiers.end(), m) != modifiers.end();
}

bool matches_synthetic_name(std::string_view name) {
    if (name.substr(0, 7) == "lambda$") return true;
    if (name.find("$lambda$") != std::string_view::npos) return true;
    if (name.substr(0, 8) == "-$$Nest$") return true;
    if (name.substr(0, 7) == "access$") return true;
    return false;
}

namespace {

// True when `line` starts with the directive word followed by whitespace
// or end of line.
bool is_directive(std::string_view trimmed, std::string_view word) {
    if (trimmed.substr(0, word.size()) != word) return false;
    if (trimmed.size() == word.size()) return true;
    char next = trimmed[word.size()];
    return next == ' ' || next == '\t';
}

bool is_end_method(std::string_view trimmed) {
    return trimmed.substr(0, 11) == ".end method";
}

std::vector<std::string> split_ws(std::string_view s) {
    std::vector<std::string> out;
    std::istringstream iss{std::string(s)};
    std::string tok;
    while (iss >> tok) out.push_back(tok);
    return out;
}

void parse_signature(const std::string& signature_line, SmaliMethod& m,
                     std::string_view path, int line_no) {
    std::vector<std::string> tokens = split_ws(signature_line);
    if (tokens.size() < 2) {
        throw Error(ErrorCode::BadFormat,
                    std::string(path) + ":" + std::to_string(line_no) +
                        ": .method directive without a signature");
    }
    const std::string& spec = tokens.back();
    size_t paren = spec.find('(');
    if (paren == std::string::npos) {
        m.name = spec;
    } else {
        m.name = spec.substr(0, paren);
        m.descriptor = spec.substr(paren);
    }
    m.modifiers.assign(tokens.begin() + 1, tokens.end() - 1);
    m.is_synthetic = m.has_modifier("synthetic") || matches_synthetic_name(m.name);
}

}  // namespace

SmaliClass parse_smali_file(std::string_view text, std::string_view path) {
    SmaliClass cls;
    cls.raw_text = std::string(text);
    cls.source_path = std::string(path);

    std::vector<std::string> lines = split_lines_keep_ends(text);

    bool in_method = false;
    int method_begin = 0;
    std::string signature;

    for (size_t i = 0; i < lines.size(); ++i) {
        int line_no = static_cast<int>(i) + 1;
        std::string t = trim(lines[i]);
        if (is_directive(t, ".method")) {
            if (in_method) {
                throw Error(ErrorCode::NestedMethod,
                            std::string(path) + ":" + std::to_string(line_no) +
                                ": .method inside an open method");
            }
            in_method = true;
            method_begin = line_no;
            signature = t;
        } else if (is_end_method(t)) {
            if (!in_method) continue;  // stray terminator, kept in raw_text only
            SmaliMethod m;
            m.signature_line = signature;
            m.line_span = {method_begin, line_no};
            for (int ln = method_begin + 1; ln < line_no; ++ln) {
                m.body_text += lines[static_cast<size_t>(ln) - 1];
            }
            parse_signature(signature, m, path, method_begin);
            cls.methods.push_back(std::move(m));
            in_method = false;
        } else if (!in_method) {
            if (is_directive(t, ".class")) {
                if (cls.class_name.empty()) {
                    std::vector<std::string> tokens = split_ws(t);
                    cls.class_name = tokens.back();
                }
            } else if (is_directive(t, ".super")) {
                if (cls.super_name.empty()) {
                    std::vector<std::string> tokens = split_ws(t);
                    cls.super_name = tokens.back();
                }
            }
        }
    }

    if (in_method) {
        throw Error(ErrorCode::UnterminatedMethod,
                    std::string(path) + ":" + std::to_string(method_begin) +
                        ": .method with no matching .end method");
    }
    if (cls.class_name.empty()) {
        throw Error(ErrorCode::MissingClassDirective,
                    std::string(path) + ": no .class directive");
    }
    return cls;
}

namespace {

bool matches_filter(const std::string& class_name, const std::vector<std::string>& filter) {
    if (filter.empty()) return true;
    for (const std::string& prefix : filter) {
        if (class_name.substr(0, prefix.size()) == prefix) return true;
    }
    return false;
}

void finalize_corpus(Corpus& corpus) {
    std::sort(corpus.classes.begin(), corpus.classes.end(),
              [](const SmaliClass& a, const SmaliClass& b) {
                  if (a.class_name != b.class_name) return a.class_name < b.class_name;
                  return a.source_path < b.source_path;
              });
    corpus.class_count = static_cast<int>(corpus.classes.size());
    corpus.method_count = 0;
    for (SmaliClass& c : corpus.classes) {
        c.is_developer_code = matches_filter(c.class_name, corpus.filter);
        if (c.is_developer_code) corpus.method_count += static_cast<int>(c.methods.size());
    }
}

}  // namespace

Corpus ingest_tree(const fs::path& root, const std::vector<std::string>& filter,
                   std::string_view apk_id, const std::optional<std::string>& family) {
    if (!fs::exists(root) || !fs::is_directory(root)) {
        throw Error(ErrorCode::Io, "smali root is not a directory: " + root.string());
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (entry.is_regular_file() && entry.path().extension() == ".smali") {
            files.push_back(entry.path());
        }
    }
    if (files.empty()) {
        throw Error(ErrorCode::EmptyCorpus, "no .smali files under " + root.string());
    }
    std::sort(files.begin(), files.end());

    Corpus corpus;
    corpus.apk_id = std::string(apk_id);
    corpus.family = family;
    corpus.filter = filter;
    for (const fs::path& f : files) {
        std::string rel = fs::relative(f, root).generic_string();
        std::string text = read_file(f);
        try {
            corpus.classes.push_back(parse_smali_file(text, rel));
        } catch (const Error& e) {
            if (std::string(e.what()).find(rel) == 0) throw;
            throw Error(e.code(), rel + ": " + e.what());
        }
    }
    finalize_corpus(corpus);
    return corpus;
}

fs::path decompile(const fs::path& apk, std::string_view tool_command, const fs::path& out_dir) {
    std::string command = trim(tool_command);
    if (command.empty()) {
        throw Error(ErrorCode::ToolNotConfigured, "no decompiler command configured");
    }
    if (command.find("{apk}") == std::string::npos || command.find("{out}") == std::string::npos) {
        throw Error(ErrorCode::ToolNotConfigured,
                    "decompiler command must contain {apk} and {out} placeholders");
    }

    std::error_code ec;
    fs::create_directories(out_dir, ec);

    std::vector<std::string> argv_store;
    for (std::string tok : split_ws(command)) {
        auto substitute = [&tok](std::string_view key, const std::string& value) {
            size_t pos;
            while ((pos = tok.find(key)) != std::string::npos) {
                tok.replace(pos, key.size(), value);
            }
        };
        substitute("{apk}", apk.string());
        substitute("{out}", out_dir.string());
        argv_store.push_back(std::move(tok));
    }
    std::vector<char*> argv;
    for (std::string& s : argv_store) argv.push_back(s.data());
    argv.push_back(nullptr);

    int err_pipe[2];
    if (pipe(err_pipe) != 0) throw Error(ErrorCode::Io, "pipe failed");

    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_addclose(&actions, err_pipe[0]);
    posix_spawn_file_actions_adddup2(&actions, err_pipe[1], STDERR_FILENO);
    posix_spawn_file_actions_addclose(&actions, err_pipe[1]);

    pid_t pid = 0;
    int rc = posix_spawnp(&pid, argv[0], &actions, nullptr, argv.data(), environ);
    posix_spawn_file_actions_destroy(&actions);
    close(err_pipe[1]);

    std::string stderr_text;
    if (rc == 0) {
        char buf[4096];
        ssize_t n;
        while ((n = read(err_pipe[0], buf, sizeof(buf))) > 0) {
            stderr_text.append(buf, static_cast<size_t>(n));
        }
    }
    close(err_pipe[0]);

    if (rc != 0) {
        throw Error(ErrorCode::ToolFailed,
                    std::string("failed to spawn decompiler '") + argv_store[0] + "'");
    }
    int status = 0;
    waitpid(pid, &status, 0);
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
        int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        if (stderr_text.size() > 2000) stderr_text = stderr_text.substr(stderr_text.size() - 2000);
        throw Error(ErrorCode::ToolFailed,
                    "decompiler exited with status " + std::to_string(code) +
                        (stderr_text.empty() ? "" : ": " + trim(stderr_text)));
    }

    // ApkTool emits smali/ plus optional smali_classesN/ roots. With a single
    // root return it directly; otherwise return out_dir and let ingest merge.
    std::vector<fs::path> smali_roots;
    bool any_smali = false;
    for (const auto& entry : fs::recursive_directory_iterator(out_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".smali") {
            any_smali = true;
            break;
        }
    }
    if (!any_smali) {
        throw Error(ErrorCode::NoSmaliProduced, "decompiler produced no .smali files in " + out_dir.string());
    }
    for (const auto& entry : fs::directory_iterator(out_dir)) {
        if (!entry.is_directory()) continue;
        std::string name = entry.path().filename().string();
        if (name == "smali" || name.rfind("smali_classes", 0) == 0) {
            smali_roots.push_back(entry.path());
        }
    }
    if (smali_roots.size() == 1) return smali_roots.front();
    return out_dir;
}

std::vector<MethodGroup> group_synthetic_methods(const SmaliClass& cls) {
    const auto& methods = cls.methods;
    int n = static_cast<int>(methods.size());

    // First anchor (non-synthetic method) per name, in declaration order.
    std::map<std::string, int> anchor_by_name;
    for (int i = 0; i < n; ++i) {
        if (!methods[static_cast<size_t>(i)].is_synthetic &&
            !anchor_by_name.count(methods[static_cast<size_t>(i)].name)) {
            anchor_by_name[methods[static_cast<size_t>(i)].name] = i;
        }
    }

    auto embedded_anchor_name = [](const std::string& name) -> std::string {
        if (name.rfind("lambda$", 0) == 0) {
            size_t last = name.rfind('$');
            if (last > 7) return name.substr(7, last - 7);
            return name.substr(7);
        }
        size_t kt = name.find("$lambda$");
        if (kt != std::string::npos) return name.substr(0, kt);
        if (name.rfind("-$$Nest$", 0) == 0) {
            std::string rest = name.substr(8);
            if (rest.rfind("sm", 0) == 0) return rest.substr(2);
            if (rest.rfind("m", 0) == 0) return rest.substr(1);
            return "";
        }
        return "";  // access$NNN carries no anchor name
    };

    std::vector<std::vector<int>> members_of(static_cast<size_t>(n));
    std::vector<int> owner(static_cast<size_t>(n), -1);

    for (int i = 0; i < n; ++i) {
        const SmaliMethod& m = methods[static_cast<size_t>(i)];
        if (!m.is_synthetic) {
            owner[static_cast<size_t>(i)] = i;
            continue;
        }
        int anchor = -1;
        auto exact = anchor_by_name.find(m.name);  // synthetic bridge sharing the name
        if (exact != anchor_by_name.end()) {
            anchor = exact->second;
        } else {
            std::string target = embedded_anchor_name(m.name);
            if (!target.empty()) {
                auto it = anchor_by_name.find(target);
                if (it != anchor_by_name.end()) anchor = it->second;
            }
        }
        owner[static_cast<size_t>(i)] = anchor == -1 ? i : anchor;
    }

    for (int i = 0; i < n; ++i) {
        members_of[static_cast<size_t>(owner[static_cast<size_t>(i)])].push_back(i);
    }

    std::vector<MethodGroup> groups;
    for (int i = 0; i < n; ++i) {
        if (members_of[static_cast<size_t>(i)].empty()) continue;
        MethodGroup g;
        g.anchor = i;
        g.members = members_of[static_cast<size_t>(i)];
        groups.push_back(std::move(g));
    }
    return groups;
}

std::string serialize_corpus(const Corpus& corpus) {
    ordered_json j;
    j["schema"] = "mloc-corpus/1";
    j["apk_id"] = corpus.apk_id;
    if (corpus.family) {
        j["family"] = *corpus.family;
    } else {
        j["family"] = nullptr;
    }
    j["filter"] = corpus.filter;
    ordered_json classes = ordered_json::array();
    for (const SmaliClass& c : corpus.classes) {
        ordered_json jc;
        jc["path"] = c.source_path;
        jc["text"] = c.raw_text;
        classes.push_back(std::move(jc));
    }
    j["classes"] = std::move(classes);
    return j.dump(2) + "\n";
}

Corpus parse_corpus(std::string_view json_text) {
    ordered_json j = ordered_json::parse(json_text, nullptr, false);
    if (j.is_discarded() || !j.is_object() || j.value("schema", "") != "mloc-corpus/1") {
        throw Error(ErrorCode::BadFormat, "not a mloc-corpus/1 file");
    }
    Corpus corpus;
    corpus.apk_id = j.value("apk_id", "");
    if (j.contains("family") && !j["family"].is_null()) {
        corpus.family = j["family"].get<std::string>();
    }
    if (j.contains("filter")) {
        for (const auto& f : j["filter"]) corpus.filter.push_back(f.get<std::string>());
    }
    if (!j.contains("classes") || !j["classes"].is_array()) {
        throw Error(ErrorCode::BadFormat, "corpus file has no classes array");
    }
    for (const auto& jc : j["classes"]) {
        corpus.classes.push_back(
            parse_smali_file(jc.at("text").get<std::string>(), jc.at("path").get<std::string>()));
    }
    finalize_corpus(corpus);
    return corpus;
}

void save_corpus(const Corpus& corpus, const fs::path& path) {
    write_file_atomic(path, serialize_corpus(corpus));
}

Corpus load_corpus(const fs::path& path) {
    return parse_corpus(read_file(path));
}

int developer_class_count(const Corpus& corpus) {
    int n = 0;
    for (const SmaliClass& c : corpus.classes) {
        if (c.is_developer_code) ++n;
    }
    return n;
}

std::string corpus_summary(const Corpus& corpus) {
    int synthetic = 0;
    int methods_total = 0;
    for (const SmaliClass& c : corpus.classes) {
        methods_total += static_cast<int>(c.methods.size());
        for (const SmaliMethod& m : c.methods) {
            if (m.is_synthetic) ++synthetic;
        }
    }
    std::ostringstream out;
    out << "apk_id: " << corpus.apk_id << "\n";
    out << "family: " << (corpus.family ? *corpus.family : "-") << "\n";
    if (corpus.filter.empty()) {
        out << "filter: -\n";
    } else {
        out << "filter:";
        for (const std::string& f : corpus.filter) out << " " << f;
        out << "\n";
    }
    out << "class_count: " << corpus.class_count << "\n";
    out << "developer_class_count: " << developer_class_count(corpus) << "\n";
    out << "method_count: " << corpus.method_count << "\n";
    out << "method_count_total: " << methods_total << "\n";
    out << "synthetic_method_count: " << synthetic << "\n";
    return out.str();
}

}  // namespace mloc::smali
