#include "core/prompt.hpp"

#include <algorithm>
#include <array>
#include <sstream>

#include "core/error.hpp"
#include "core/util.hpp"

namespace mloc::prompt {

const char* prompt_kind_name(PromptKind kind) {
    switch (kind) {
        case PromptKind::Baseline: return "baseline";
        case PromptKind::Phase1: return "phase1";
        case PromptKind::Phase2: return "phase2";
    }
    return "?";
}

int token_estimate(std::string_view text) {
    return static_cast<int>((text.size() + 3) / 4);
}

namespace {

constexpr std::array<std::string_view, 4> kKnownPlaceholders = {
    "class_content", "behavior_description", "first_phase_explanation", "behavior_list"};

std::vector<std::string> placeholders_in(std::string_view text) {
    std::vector<std::string> found;
    for (std::string_view name : kKnownPlaceholders) {
        std::string token = "{" + std::string(name) + "}";
        if (text.find(token) != std::string_view::npos) found.emplace_back(name);
    }
    return found;
}

struct KindRule {
    std::vector<std::string> required;
    std::vector<std::string> allowed;  // superset of required
};

KindRule rule_for(PromptKind kind) {
    switch (kind) {
        case PromptKind::Baseline:
            return {{"class_content"}, {"class_content", "behavior_list"}};
        case PromptKind::Phase1:
            return {{"class_content", "behavior_description"},
                    {"class_content", "behavior_description"}};
        case PromptKind::Phase2:
            return {{"class_content", "first_phase_explanation"},
                    {"class_content", "first_phase_explanation"}};
    }
    return {};
}

}  // namespace

void validate_template(const PromptTemplate& tmpl) {
    KindRule rule = rule_for(tmpl.kind);
    std::vector<std::string> present = placeholders_in(tmpl.text);
    for (const std::string& need : rule.required) {
        if (std::find(present.begin(), present.end(), need) == present.end()) {
            throw Error(ErrorCode::BadTemplate,
                        std::string(prompt_kind_name(tmpl.kind)) +
                            " template is missing required placeholder {" + need + "}");
        }
    }
    for (const std::string& got : present) {
        if (std::find(rule.allowed.begin(), rule.allowed.end(), got) == rule.allowed.end()) {
            throw Error(ErrorCode::BadTemplate,
                        std::string(prompt_kind_name(tmpl.kind)) +
                            " template must not contain {" + got + "}");
        }
    }
}

std::string substitute_placeholders(std::string_view template_text,
                                    const std::map<std::string, std::string>& values) {
    std::string out;
    out.reserve(template_text.size());
    size_t i = 0;
    while (i < template_text.size()) {
        char c = template_text[i];
        if (c == '{') {
            bool replaced = false;
            for (std::string_view name : kKnownPlaceholders) {
                if (template_text.compare(i + 1, name.size(), name) == 0 &&
                    i + 1 + name.size() < template_text.size() &&
                    template_text[i + 1 + name.size()] == '}') {
                    auto it = values.find(std::string(name));
                    if (it != values.end()) {
                        out += it->second;
                        i += name.size() + 2;
                        replaced = true;
                    }
                    break;
                }
            }
            if (replaced) continue;
        }
        out.push_back(c);
        ++i;
    }
    return out;
}

std::string behavior_list_text(const kb::Taxonomy& taxonomy) {
    std::ostringstream out;
    for (size_t i = 0; i < taxonomy.behaviors.size(); ++i) {
        const kb::Behavior& b = taxonomy.behaviors[i];
        out << b.id << ". " << b.name;
        out << (i + 1 == taxonomy.behaviors.size() ? "." : "; ");
    }
    return out.str();
}

std::vector<ClassChunk> chunk_class(const smali::SmaliClass& cls, int token_budget) {
    if (token_budget <= 0) {
        throw Error(ErrorCode::InvalidArgument, "token_budget must be positive");
    }
    std::vector<ClassChunk> chunks;
    if (token_estimate(cls.raw_text) <= token_budget) {
        chunks.push_back(ClassChunk{cls.raw_text, 1, 1, false});
        return chunks;
    }

    std::vector<std::string> lines = split_lines_keep_ends(cls.raw_text);
    auto slice = [&lines](int begin_line, int end_line) {  // 1-based inclusive
        std::string out;
        for (int ln = begin_line; ln <= end_line; ++ln) {
            out += lines[static_cast<size_t>(ln) - 1];
        }
        return out;
    };

    int first_method_line = cls.methods.empty()
                                ? static_cast<int>(lines.size()) + 1
                                : cls.methods.front().line_span.begin;
    std::string header = first_method_line > 1 ? slice(1, first_method_line - 1) : std::string();

    std::string current;
    bool current_has_methods = false;
    auto flush = [&] {
        if (current_has_methods) {
            chunks.push_back(ClassChunk{current, static_cast<int>(chunks.size()) + 1, 0, false});
        }
        current = header;
        current_has_methods = false;
    };

    current = header;
    for (const smali::SmaliMethod& m : cls.methods) {
        std::string piece = slice(m.line_span.begin, m.line_span.end);
        if (!piece.empty() && piece.back() != '\n') piece += "\n";
        bool alone_oversized = token_estimate(header + piece) > token_budget;
        if (alone_oversized) {
            flush();
            chunks.push_back(
                ClassChunk{header + piece, static_cast<int>(chunks.size()) + 1, 0, true});
            continue;
        }
        if (current_has_methods && token_estimate(current + piece) > token_budget) {
            flush();
        }
        current += piece;
        current_has_methods = true;
    }
    flush();

    if (chunks.empty()) {  // header alone blew the budget, no methods to carry
        chunks.push_back(ClassChunk{cls.raw_text, 1, 1, true});
    }
    for (ClassChunk& c : chunks) c.count = static_cast<int>(chunks.size());
    return chunks;
}

PromptEngine::PromptEngine() {
    baseline_ = {PromptKind::Baseline, std::string(default_template_text(PromptKind::Baseline))};
    phase1_ = {PromptKind::Phase1, std::string(default_template_text(PromptKind::Phase1))};
    phase2_ = {PromptKind::Phase2, std::string(default_template_text(PromptKind::Phase2))};
    validate_template(baseline_);
    validate_template(phase1_);
    validate_template(phase2_);
}

void PromptEngine::set_template(PromptKind kind, std::string text) {
    PromptTemplate tmpl{kind, std::move(text)};
    validate_template(tmpl);
    switch (kind) {
        case PromptKind::Baseline: baseline_ = std::move(tmpl); break;
        case PromptKind::Phase1: phase1_ = std::move(tmpl); break;
        case PromptKind::Phase2: phase2_ = std::move(tmpl); break;
    }
}

void PromptEngine::load_template_file(PromptKind kind, const std::filesystem::path& path) {
    set_template(kind, read_file(path));
}

const PromptTemplate& PromptEngine::get_template(PromptKind kind) const {
    switch (kind) {
        case PromptKind::Baseline: return baseline_;
        case PromptKind::Phase1: return phase1_;
        case PromptKind::Phase2: return phase2_;
    }
    return baseline_;
}

namespace {

RenderedPrompt finish(PromptKind kind, std::string text, const smali::SmaliClass& cls,
                      std::optional<int> behavior_id, const ClassChunk& chunk) {
    RenderedPrompt p;
    p.kind = kind;
    p.text = std::move(text);
    p.class_name = cls.class_name;
    p.behavior_id = behavior_id;
    p.chunk_index = chunk.index;
    p.chunk_count = chunk.count;
    p.oversized = chunk.oversized;
    p.token_estimate = token_estimate(p.text);
    return p;
}

}  // namespace

std::vector<RenderedPrompt> PromptEngine::render_baseline(const smali::SmaliClass& cls,
                                                          const kb::Taxonomy& taxonomy,
                                                          int token_budget) const {
    std::string behaviors = behavior_list_text(taxonomy);
    std::vector<RenderedPrompt> out;
    for (const ClassChunk& chunk : chunk_class(cls, token_budget)) {
        std::map<std::string, std::string> values{{"class_content", chunk.text},
                                                  {"behavior_list", behaviors}};
        out.push_back(finish(PromptKind::Baseline,
                             substitute_placeholders(baseline_.text, values), cls, std::nullopt,
                             chunk));
    }
    return out;
}

std::vector<RenderedPrompt> PromptEngine::render_phase1(const smali::SmaliClass& cls,
                                                        const kb::Behavior& behavior,
                                                        int token_budget) const {
    std::vector<RenderedPrompt> out;
    for (const ClassChunk& chunk : chunk_class(cls, token_budget)) {
        std::map<std::string, std::string> values{{"class_content", chunk.text},
                                                  {"behavior_description", behavior.description}};
        out.push_back(finish(PromptKind::Phase1, substitute_placeholders(phase1_.text, values),
                             cls, behavior.id, chunk));
    }
    return out;
}

std::vector<RenderedPrompt> PromptEngine::render_phase2(const smali::SmaliClass& cls,
                                                        std::string_view phase1_explanation,
                                                        int token_budget) const {
    if (trim(phase1_explanation).empty()) {
        throw Error(ErrorCode::EmptyExplanation, "phase-1 explanation must not be empty");
    }
    std::vector<RenderedPrompt> out;
    for (const ClassChunk& chunk : chunk_class(cls, token_budget)) {
        std::map<std::string, std::string> values{
            {"class_content", chunk.text},
            {"first_phase_explanation", std::string(phase1_explanation)}};
        out.push_back(finish(PromptKind::Phase2, substitute_placeholders(phase2_.text, values),
                             cls, std::nullopt, chunk));
    }
    return out;
}

}  // namespace mloc::prompt
