#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "core/behavior_kb.hpp"
#include "core/smali.hpp"

namespace mloc::prompt {

enum class PromptKind { Baseline, Phase1, Phase2 };

const char* prompt_kind_name(PromptKind kind);

struct PromptTemplate {
    PromptKind kind = PromptKind::Baseline;
    std::string text;
};

struct RenderedPrompt {
    PromptKind kind = PromptKind::Baseline;
    std::string text;
    std::string class_name;
    std::optional<int> behavior_id;
    int chunk_index = 1;
    int chunk_count = 1;
    int token_estimate = 0;
    bool oversized = false;
};

struct ClassChunk {
    std::string text;
    int index = 1;
    int count = 1;
    bool oversized = false;
};

// ceil(byte_length / 4); the unitless budget heuristic.
int token_estimate(std::string_view text);

// Whole class when it fits the budget, otherwise method-boundary chunks,
// each prefixed with the class header (everything before the first
// `.method` line). A lone method that cannot fit is emitted as its own
// chunk flagged oversized.
std::vector<ClassChunk> chunk_class(const smali::SmaliClass& cls, int token_budget);

// "1. Privacy Stealing; 2. SMS/CALL Abuse; ...; 12. Premium Service Abuse."
std::string behavior_list_text(const kb::Taxonomy& taxonomy);

// Single left-to-right pass substituting `{name}` occurrences for the
// known placeholder names only; substituted values are never rescanned,
// so braces inside class content survive verbatim.
std::string substitute_placeholders(std::string_view template_text,
                                    const std::map<std::string, std::string>& values);

// Throws BadTemplate when required placeholders are missing or a
// placeholder foreign to the kind appears.
void validate_template(const PromptTemplate& tmpl);

std::string_view default_template_text(PromptKind kind);

class PromptEngine {
public:
    PromptEngine();  // built-in templates

    void set_template(PromptKind kind, std::string text);
    void load_template_file(PromptKind kind, const std::filesystem::path& path);
    const PromptTemplate& get_template(PromptKind kind) const;

    std::vector<RenderedPrompt> render_baseline(const smali::SmaliClass& cls,
                                                const kb::Taxonomy& taxonomy,
                                                int token_budget) const;
    std::vector<RenderedPrompt> render_phase1(const smali::SmaliClass& cls,
                                              const kb::Behavior& behavior,
                                              int token_budget) const;
    std::vector<RenderedPrompt> render_phase2(const smali::SmaliClass& cls,
                                              std::string_view phase1_explanation,
                                              int token_budget) const;

private:
    PromptTemplate baseline_;
    PromptTemplate phase1_;
    PromptTemplate phase2_;
};

}  // namespace mloc::prompt
