#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace mloc::kb {

struct Behavior {
    int id = 0;  // 1..12
    std::string name;
    std::string description;  // prompt content, replaceable data
};

// The fixed 12-entry name list. Taxonomy files may swap descriptions but
// ids and names must match this exactly.
extern const std::array<const char*, 12> kCanonicalBehaviorNames;

struct Taxonomy {
    std::vector<Behavior> behaviors;  // sorted by id, exactly 12

    const Behavior& by_id(int id) const;           // throws UnknownBehaviorId
    const Behavior* by_name_ci(std::string_view name) const;
};

enum class UnknownFamilyPolicy { AllBehaviors, Error };

struct FamilyTable {
    // keys lower-cased and trimmed
    std::map<std::string, std::set<int>> entries;
    UnknownFamilyPolicy policy = UnknownFamilyPolicy::AllBehaviors;
};

Taxonomy parse_taxonomy(std::string_view text);
Taxonomy load_taxonomy(const std::filesystem::path& path);
Taxonomy builtin_taxonomy();

FamilyTable parse_family_table(std::string_view text, UnknownFamilyPolicy policy);
FamilyTable load_family_table(const std::filesystem::path& path, UnknownFamilyPolicy policy);
FamilyTable builtin_family_table(UnknownFamilyPolicy policy);

// Known family -> its mapped behaviors. Unknown or absent family -> the
// whole taxonomy under AllBehaviors, UnknownFamily error otherwise.
std::vector<Behavior> lookup_family(const Taxonomy& taxonomy, const FamilyTable& table,
                                    const std::optional<std::string>& family);

// Shipped default data, identical to the files under data/.
std::string_view default_behaviors_text();
std::string_view default_families_text();

}  // namespace mloc::kb
