#include "core/response.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <sstream>

#include "core/error.hpp"
#include "core/util.hpp"

namespace mloc::response {

const char* resolution_name(Resolution r) {
    switch (r) {
        case Resolution::Exact: return "exact";
        case Resolution::Normalized: return "normalized";
        case Resolution::Fuzzy: return "fuzzy";
        case Resolution::Unmatched: return "unmatched";
    }
    return "?";
}

std::optional<Resolution> resolution_from_name(std::string_view name) {
    if (name == "exact") return Resolution::Exact;
    if (name == "normalized") return Resolution::Normalized;
    if (name == "fuzzy") return Resolution::Fuzzy;
    if (name == "unmatched") return Resolution::Unmatched;
    return std::nullopt;
}

namespace {

const std::set<std::string> kKnownKeys = {"IS_MALICIOUS", "CONFIDENCE", "EXPLANATION",
                                          "BEHAVIOR",     "METHOD",     "ROLE"};

bool is_fence_line(const std::string& line) {
    return trim(line).rfind("```", 0) == 0;
}

// Recognizes `KEY: value` with optional markdown decoration around the
// key (`**KEY:** value`, `- key: value`, `# KEY: value`). Only the six
// grammar keys count; anything else stays a content line.
bool split_key_line(const std::string& line, std::string& key_out, std::string& value_out) {
    size_t i = 0;
    while (i < line.size() &&
           (std::isspace(static_cast<unsigned char>(line[i])) || line[i] == '*' ||
            line[i] == '#' || line[i] == '-' || line[i] == '>')) {
        ++i;
    }
    size_t key_begin = i;
    while (i < line.size() &&
           (std::isalpha(static_cast<unsigned char>(line[i])) || line[i] == '_')) {
        ++i;
    }
    if (i == key_begin) return false;
    std::string key = line.substr(key_begin, i - key_begin);
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '*')) ++i;
    if (i >= line.size() || line[i] != ':') return false;
    ++i;
    std::string upper;
    for (char c : key) upper.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    if (!kKnownKeys.count(upper)) return false;
    std::string value = line.substr(i);
    // strip markdown bold remnants hugging the colon
    size_t v = 0;
    while (v < value.size() && (value[v] == '*' || value[v] == ' ' || value[v] == '\t')) ++v;
    key_out = upper;
    value_out = trim(value.substr(v));
    return true;
}

std::vector<std::string> content_lines(std::string_view raw) {
    std::vector<std::string> lines;
    for (std::string& l : split_lines_keep_ends(raw)) {
        while (!l.empty() && (l.back() == '\n' || l.back() == '\r')) l.pop_back();
        if (is_fence_line(l)) continue;
        lines.push_back(std::move(l));
    }
    return lines;
}

bool parse_yes_no(const std::string& value, bool& out) {
    std::string v = to_lower(trim(value));
    while (!v.empty() && (v.back() == '.' || v.back() == '!')) v.pop_back();
    if (v == "yes") {
        out = true;
        return true;
    }
    if (v == "no") {
        out = false;
        return true;
    }
    return false;
}

int parse_confidence_value(const std::string& value, std::string_view field) {
    std::string v = trim(value);
    if (!v.empty() && v.back() == '%') v.pop_back();
    auto n = parse_int(v);
    if (!n || *n < 0 || *n > 100) {
        throw parse_error(field, "expected an integer 0-100, got '" + trim(value) + "'");
    }
    return static_cast<int>(*n);
}

// Shared field collector for the scalar keys. Continuation lines attach
// to EXPLANATION only; leading and interstitial prose is dropped.
struct ScalarFields {
    std::map<std::string, std::string> first;  // first occurrence wins
    std::string* continuation = nullptr;

    bool offer(const std::string& key, const std::string& value) {
        auto [it, inserted] = first.emplace(key, value);
        continuation = inserted && key == "EXPLANATION" ? &it->second : nullptr;
        return inserted;
    }

    void content(const std::string& line) {
        if (continuation) {
            *continuation += "\n" + line;
        }
    }

    const std::string* get(const std::string& key) const {
        auto it = first.find(key);
        return it == first.end() ? nullptr : &it->second;
    }
};

Phase1Verdict finish_phase1(const ScalarFields& fields) {
    Phase1Verdict v;
    const std::string* is_mal = fields.get("IS_MALICIOUS");
    if (!is_mal || !parse_yes_no(*is_mal, v.is_malicious)) {
        throw parse_error("IS_MALICIOUS",
                          is_mal ? "expected yes or no, got '" + trim(*is_mal) + "'" : "missing");
    }
    const std::string* conf = fields.get("CONFIDENCE");
    if (!conf) throw parse_error("CONFIDENCE", "missing");
    v.confidence = parse_confidence_value(*conf, "CONFIDENCE");
    const std::string* expl = fields.get("EXPLANATION");
    if (!expl) throw parse_error("EXPLANATION", "missing");
    v.explanation = trim(*expl);
    if (v.is_malicious && v.explanation.empty()) {
        throw parse_error("EXPLANATION", "empty explanation on a malicious verdict");
    }
    return v;
}

// METHOD/ROLE/CONFIDENCE triple accumulator shared by the phase-2 and
// baseline grammars.
struct TripleCollector {
    std::vector<MethodTriple> triples;
    bool open = false;
    MethodTriple current;
    bool role_continuation = false;

    void flush() {
        if (open) {
            current.role = trim(current.role);
            triples.push_back(std::move(current));
        }
        current = MethodTriple{};
        current.confidence_missing = true;
        open = false;
        role_continuation = false;
    }

    void on_method(const std::string& value) {
        flush();
        open = true;
        current.reported_line = trim(value);
        current.confidence_missing = true;
    }

    void on_role(const std::string& value) {
        if (!open) {
            throw parse_error("ROLE", "ROLE with no preceding METHOD");
        }
        if (current.role.empty()) {
            current.role = value;
        } else {
            current.role += "\n" + value;
        }
        role_continuation = true;
    }

    // returns false when the confidence belongs to something else
    bool on_confidence(const std::string& value) {
        if (!open) return false;
        if (!current.confidence_missing) return true;  // first wins
        current.confidence = parse_confidence_value(value, "CONFIDENCE");
        current.confidence_missing = false;
        role_continuation = false;
        return true;
    }

    void content(const std::string& line) {
        if (open && role_continuation && !trim(line).empty()) {
            current.role += "\n" + line;
        }
    }
};

}  // namespace

Phase1Verdict parse_phase1(std::string_view raw) {
    ScalarFields fields;
    for (const std::string& line : content_lines(raw)) {
        std::string key, value;
        if (split_key_line(line, key, value)) {
            if (key == "IS_MALICIOUS" || key == "CONFIDENCE" || key == "EXPLANATION") {
                fields.offer(key, value);
            } else {
                fields.continuation = nullptr;  // foreign key ends any continuation
            }
        } else {
            fields.content(line);
        }
    }
    return finish_phase1(fields);
}

std::vector<MethodTriple> parse_phase2(std::string_view raw) {
    TripleCollector collector;
    collector.flush();  // initialize current
    for (const std::string& line : content_lines(raw)) {
        std::string key, value;
        if (split_key_line(line, key, value)) {
            if (key == "METHOD") {
                collector.on_method(value);
            } else if (key == "ROLE") {
                collector.on_role(value);
            } else if (key == "CONFIDENCE") {
                collector.on_confidence(value);  // stray pre-METHOD confidence is noise
            } else {
                collector.role_continuation = false;
            }
        } else {
            collector.content(line);
        }
    }
    collector.flush();
    return std::move(collector.triples);
}

BaselineVerdict parse_baseline(std::string_view raw, const kb::Taxonomy& taxonomy) {
    ScalarFields fields;
    TripleCollector collector;
    collector.flush();
    bool saw_method = false;

    for (const std::string& line : content_lines(raw)) {
        std::string key, value;
        if (split_key_line(line, key, value)) {
            if (key == "METHOD") {
                saw_method = true;
                fields.continuation = nullptr;
                collector.on_method(value);
            } else if (key == "ROLE") {
                if (!saw_method) throw parse_error("ROLE", "ROLE with no preceding METHOD");
                collector.on_role(value);
            } else if (key == "CONFIDENCE") {
                // class confidence before the first METHOD, per-method after
                if (!saw_method || !collector.on_confidence(value)) {
                    fields.offer(key, value);
                }
            } else if (key == "BEHAVIOR") {
                fields.offer(key, value);
            } else {
                fields.offer(key, value);
            }
        } else if (saw_method) {
            collector.content(line);
        } else {
            fields.content(line);
        }
    }
    collector.flush();

    Phase1Verdict scalar = finish_phase1(fields);
    BaselineVerdict v;
    v.is_malicious = scalar.is_malicious;
    v.confidence = scalar.confidence;
    v.explanation = scalar.explanation;
    v.methods = std::move(collector.triples);

    const std::string* behavior = fields.get("BEHAVIOR");
    std::string behavior_value = behavior ? trim(*behavior) : "";
    if (!behavior_value.empty() && !iequals(behavior_value, "none")) {
        std::set<int> ids;
        std::istringstream iss(behavior_value);
        std::string piece;
        while (std::getline(iss, piece, ',')) {
            std::string name = trim(piece);
            if (name.empty()) continue;
            if (const kb::Behavior* b = taxonomy.by_name_ci(name)) {
                ids.insert(b->id);
            } else {
                v.unrecognized_behaviors.push_back(name);
            }
        }
        v.behavior_ids.assign(ids.begin(), ids.end());
    }
    if (v.is_malicious && v.behavior_ids.empty() && v.unrecognized_behaviors.empty()) {
        throw parse_error("BEHAVIOR", "malicious verdict names no behavior");
    }
    return v;
}

std::string canonical_phase1_text(const Phase1Verdict& v) {
    std::ostringstream out;
    out << "IS_MALICIOUS: " << (v.is_malicious ? "yes" : "no") << "\n";
    out << "CONFIDENCE: " << v.confidence << "\n";
    out << "EXPLANATION: " << v.explanation << "\n";
    return out.str();
}

namespace {

MethodFinding resolve_method_line(std::string_view reported, const smali::SmaliClass& cls) {
    MethodFinding f;
    f.reported_method_line = trim(reported);

    for (const smali::SmaliMethod& m : cls.methods) {
        if (m.signature_line == f.reported_method_line) {
            f.resolution = Resolution::Exact;
            f.resolved_signature = m.signature_line;
            return f;
        }
    }

    std::string norm_reported = collapse_ws(f.reported_method_line);
    for (const smali::SmaliMethod& m : cls.methods) {
        std::string norm_sig = collapse_ws(m.signature_line);
        std::string norm_sig_bare =
            norm_sig.rfind(".method ", 0) == 0 ? norm_sig.substr(8) : norm_sig;
        if (norm_reported == norm_sig || norm_reported == norm_sig_bare) {
            f.resolution = Resolution::Normalized;
            f.resolved_signature = m.signature_line;
            return f;
        }
    }

    std::vector<const smali::SmaliMethod*> fuzzy;
    for (const smali::SmaliMethod& m : cls.methods) {
        std::string key = m.name + m.descriptor;
        if (!key.empty() && f.reported_method_line.find(key) != std::string::npos) {
            fuzzy.push_back(&m);
        }
    }
    if (fuzzy.size() == 1) {
        f.resolution = Resolution::Fuzzy;
        f.resolved_signature = fuzzy.front()->signature_line;
        return f;
    }
    if (fuzzy.size() > 1) {
        f.ambiguous = true;  // recorded; scored as unmatched
    }
    f.resolution = Resolution::Unmatched;
    return f;
}

}  // namespace

MethodFinding resolve_method(const MethodTriple& triple, const smali::SmaliClass& cls) {
    MethodFinding f = resolve_method_line(triple.reported_line, cls);
    f.role = triple.role;
    f.confidence = triple.confidence;
    f.confidence_missing = triple.confidence_missing;
    return f;
}

std::vector<MethodFinding> merge_method_findings(std::vector<MethodFinding> findings) {
    std::vector<MethodFinding> out;
    std::map<std::string, size_t> index;
    for (MethodFinding& f : findings) {
        std::string key = f.resolved_signature ? "r:" + *f.resolved_signature
                                               : "u:" + f.reported_method_line;
        auto it = index.find(key);
        if (it == index.end()) {
            index.emplace(std::move(key), out.size());
            out.push_back(std::move(f));
            continue;
        }
        MethodFinding& kept = out[it->second];
        if (!f.confidence_missing &&
            (kept.confidence_missing || f.confidence > kept.confidence)) {
            kept.confidence = f.confidence;
            kept.confidence_missing = false;
        }
        if (!f.role.empty() && f.role != kept.role) {
            if (kept.role.empty()) {
                kept.role = f.role;
            } else {
                kept.role += "; " + f.role;
            }
        }
        if (static_cast<int>(f.resolution) < static_cast<int>(kept.resolution)) {
            kept.resolution = f.resolution;
        }
    }
    return out;
}

}  // namespace mloc::response
