#include "core/behavior_kb.hpp"

#include <algorithm>

#include "core/error.hpp"
#include "core/util.hpp"

namespace mloc::kb {

const std::array<const char*, 12> kCanonicalBehaviorNames = {
    "Privacy Stealing",
    "SMS/CALL Abuse",
    "Remote Control",
    "Bank/Financial Stealing",
    "Ransom",
    "Accessibility Abuse",
    "Privilege Escalation",
    "Stealthy Download",
    "Aggressive Advertising",
    "Miner",
    "Tricky Behavior",
    "Premium Service Abuse",
};

const Behavior& Taxonomy::by_id(int id) const {
    for (const Behavior& b : behaviors) {
        if (b.id == id) return b;
    }
    throw Error(ErrorCode::UnknownBehaviorId, "unknown behavior id " + std::to_string(id));
}

const Behavior* Taxonomy::by_name_ci(std::string_view name) const {
    for (const Behavior& b : behaviors) {
        if (iequals(b.name, trim(name))) return &b;
    }
    return nullptr;
}

namespace {

// Entries look like `[3] Remote Control` followed by description lines up
// to the next header. `#` comments are only recognized before the first
// header, so descriptions can contain anything.
std::optional<std::pair<int, std::string>> parse_header(const std::string& line) {
    std::string t = trim(line);
    if (t.size() < 3 || t[0] != '[') return std::nullopt;
    size_t close = t.find(']');
    if (close == std::string::npos) return std::nullopt;
    auto id = parse_int(t.substr(1, close - 1));
    if (!id) return std::nullopt;
    return std::make_pair(static_cast<int>(*id), trim(t.substr(close + 1)));
}

std::string strip_outer_blank_lines(const std::string& text) {
    auto lines = split_lines_keep_ends(text);
    size_t b = 0;
    size_t e = lines.size();
    while (b < e && trim(lines[b]).empty()) ++b;
    while (e > b && trim(lines[e - 1]).empty()) --e;
    std::string out;
    for (size_t i = b; i < e; ++i) out += lines[i];
    // normalize: no trailing newline on the description itself
    while (!out.empty() && (out.back() == '\n' || out.back() == '\r')) out.pop_back();
    return out;
}

}  // namespace

Taxonomy parse_taxonomy(std::string_view text) {
    std::vector<Behavior> entries;
    Behavior* current = nullptr;
    bool seen_header = false;
    std::string desc;

    auto flush = [&] {
        if (current) current->description = strip_outer_blank_lines(desc);
        desc.clear();
    };

    for (const std::string& raw : split_lines_keep_ends(text)) {
        if (!seen_header) {
            std::string t = trim(raw);
            if (t.empty() || t[0] == '#') continue;
        }
        if (auto header = parse_header(raw)) {
            flush();
            seen_header = true;
            entries.push_back(Behavior{header->first, header->second, ""});
            current = &entries.back();
        } else if (seen_header) {
            desc += raw;
        } else {
            throw Error(ErrorCode::BadTaxonomy, "unexpected text before first [id] header");
        }
    }
    flush();

    if (entries.size() != kCanonicalBehaviorNames.size()) {
        throw Error(ErrorCode::BadTaxonomy,
                    "expected 12 behaviors, found " + std::to_string(entries.size()));
    }
    std::sort(entries.begin(), entries.end(),
              [](const Behavior& a, const Behavior& b) { return a.id < b.id; });
    for (size_t i = 0; i < entries.size(); ++i) {
        const Behavior& b = entries[i];
        int want_id = static_cast<int>(i) + 1;
        if (b.id != want_id) {
            throw Error(ErrorCode::BadTaxonomy,
                        "behavior ids must be 1..12 with no gaps; got id " + std::to_string(b.id));
        }
        if (b.name != kCanonicalBehaviorNames[i]) {
            throw Error(ErrorCode::BadTaxonomy,
                        "behavior " + std::to_string(b.id) + " must be named '" +
                            kCanonicalBehaviorNames[i] + "', got '" + b.name + "'");
        }
        if (b.description.empty()) {
            throw Error(ErrorCode::BadTaxonomy,
                        "behavior " + std::to_string(b.id) + " has an empty description");
        }
    }
    Taxonomy t;
    t.behaviors = std::move(entries);
    return t;
}

Taxonomy load_taxonomy(const std::filesystem::path& path) {
    return parse_taxonomy(read_file(path));
}

Taxonomy builtin_taxonomy() {
    return parse_taxonomy(default_behaviors_text());
}

FamilyTable parse_family_table(std::string_view text, UnknownFamilyPolicy policy) {
    FamilyTable table;
    table.policy = policy;
    int line_no = 0;
    for (const std::string& raw : split_lines_keep_ends(text)) {
        ++line_no;
        std::string t = trim(raw);
        if (t.empty() || t[0] == '#') continue;
        size_t colon = t.find(':');
        if (colon == std::string::npos) {
            throw Error(ErrorCode::BadFamilyTable,
                        "line " + std::to_string(line_no) + ": expected `family: id, id, ...`");
        }
        std::string family = to_lower(trim(t.substr(0, colon)));
        if (family.empty()) {
            throw Error(ErrorCode::BadFamilyTable,
                        "line " + std::to_string(line_no) + ": empty family name");
        }
        if (table.entries.count(family)) {
            throw Error(ErrorCode::BadFamilyTable,
                        "line " + std::to_string(line_no) + ": duplicate family '" + family + "'");
        }
        std::set<int> ids;
        std::string rest = t.substr(colon + 1);
        size_t pos = 0;
        while (pos <= rest.size()) {
            size_t comma = rest.find(',', pos);
            std::string piece = comma == std::string::npos ? rest.substr(pos)
                                                           : rest.substr(pos, comma - pos);
            if (!trim(piece).empty()) {
                auto id = parse_int(piece);
                if (!id || *id < 1 || *id > 12) {
                    throw Error(ErrorCode::BadFamilyTable,
                                "line " + std::to_string(line_no) + ": bad behavior id '" +
                                    trim(piece) + "'");
                }
                ids.insert(static_cast<int>(*id));
            }
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (ids.empty()) {
            throw Error(ErrorCode::BadFamilyTable,
                        "line " + std::to_string(line_no) + ": family '" + family +
                            "' maps to no behaviors");
        }
        table.entries[family] = std::move(ids);
    }
    return table;
}

FamilyTable load_family_table(const std::filesystem::path& path, UnknownFamilyPolicy policy) {
    return parse_family_table(read_file(path), policy);
}

FamilyTable builtin_family_table(UnknownFamilyPolicy policy) {
    return parse_family_table(default_families_text(), policy);
}

std::vector<Behavior> lookup_family(const Taxonomy& taxonomy, const FamilyTable& table,
                                    const std::optional<std::string>& family) {
    if (family) {
        auto it = table.entries.find(to_lower(trim(*family)));
        if (it != table.entries.end()) {
            std::vector<Behavior> out;
            for (int id : it->second) out.push_back(taxonomy.by_id(id));
            return out;
        }
        if (table.policy == UnknownFamilyPolicy::Error) {
            throw Error(ErrorCode::UnknownFamily, "family '" + *family + "' is not in the lookup table");
        }
    } else if (table.policy == UnknownFamilyPolicy::Error) {
        throw Error(ErrorCode::UnknownFamily, "no family label available");
    }
    return taxonomy.behaviors;
}

}  // namespace mloc::kb
