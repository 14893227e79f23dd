#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mloc::smali {

// 1-based line numbers, both inclusive. begin is the `.method` line,
// end is the `.end method` line.
struct LineSpan {
    int begin = 0;
    int end = 0;
};

struct SmaliMethod {
    std::string signature_line;  // trimmed `.method ...` line
    std::string name;
    std::string descriptor;      // parameter/return portion, e.g. `(I)V`
    std::vector<std::string> modifiers;
    std::string body_text;       // raw bytes strictly between the directive lines
    LineSpan line_span;
    bool is_synthetic = false;

    bool has_modifier(std::string_view m) const;
};

struct SmaliClass {
    std::string class_name;   // internal form, e.g. `Lcom/foo/Bar;`
    std::string source_path;  // relative to the ingested root
    std::string super_name;
    std::vector<SmaliMethod> methods;  // ordered by ascending line_span.begin
    std::string raw_text;
    bool is_developer_code = true;
};

struct Corpus {
    std::string apk_id;
    std::optional<std::string> family;
    std::vector<std::string> filter;  // developer-code package prefixes; empty = no filter
    std::vector<SmaliClass> classes;  // sorted by (class_name, source_path)
    int class_count = 0;              // all classes
    int method_count = 0;             // developer-code classes only when a filter is active
};

// Name schemes compilers use when lowering lambdas, inner classes and
// accessors. A method is synthetic when its modifiers say so or its
// name matches one of these.
bool matches_synthetic_name(std::string_view name);

SmaliClass parse_smali_file(std::string_view text, std::string_view path);

Corpus ingest_tree(const std::filesystem::path& root,
                   const std::vector<std::string>& filter,
                   std::string_view apk_id,
                   const std::optional<std::string>& family);

// Runs the configured external decompiler. The template must contain
// `{apk}` and `{out}` placeholders; it is split on whitespace and executed
// without a shell. Returns the smali root to ingest.
std::filesystem::path decompile(const std::filesystem::path& apk,
                                std::string_view tool_command,
                                const std::filesystem::path& out_dir);

// One anchor method plus the synthetic companions whose names embed it.
// Indexes refer to SmaliClass::methods. Every method lands in exactly
// one group; unmatched synthetics become singleton groups.
struct MethodGroup {
    int anchor = 0;
    std::vector<int> members;  // sorted, includes anchor
};

std::vector<MethodGroup> group_synthetic_methods(const SmaliClass& cls);

// Corpus files are canonical JSON: stable key order, UTF-8, LF, trailing
// newline. Classes are stored as (path, raw text) and re-parsed on load.
std::string serialize_corpus(const Corpus& corpus);
Corpus parse_corpus(std::string_view json_text);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);
Corpus load_corpus(const std::filesystem::path& path);

// Stable key:value summary block for the CLI.
std::string corpus_summary(const Corpus& corpus);

int developer_class_count(const Corpus& corpus);

}  // namespace mloc::smali
