#include <doctest.h>

#include <set>

#include "core/behavior_kb.hpp"
#include "core/error.hpp"
#include "core/util.hpp"

using namespace mloc;
using namespace mloc::kb;

TEST_CASE("builtin taxonomy has the canonical twelve") {
    Taxonomy t = builtin_taxonomy();
    REQUIRE(t.behaviors.size() == 12);
    CHECK(t.by_id(1).name == "Privacy Stealing");
    CHECK(t.by_id(11).name == "Tricky Behavior");
    CHECK(t.by_id(12).name == "Premium Service Abuse");
    for (const Behavior& b : t.behaviors) CHECK_FALSE(b.description.empty());
}

TEST_CASE("shipped data files match the built-in defaults") {
    std::string behaviors = read_file(std::filesystem::path(MLOC_DATA_DIR) / "behaviors.txt");
    std::string families = read_file(std::filesystem::path(MLOC_DATA_DIR) / "families.txt");
    CHECK(behaviors == default_behaviors_text());
    CHECK(families == default_families_text());
}

TEST_CASE("taxonomy guards") {
    // 11 entries
    std::string eleven;
    for (int i = 1; i <= 11; ++i) {
        eleven += "[" + std::to_string(i) + "] " + kCanonicalBehaviorNames[i - 1] + "\nd\n";
    }
    try {
        parse_taxonomy(eleven);
        FAIL("expected BadTaxonomy");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::BadTaxonomy);
    }

    // duplicate id
    std::string dup = eleven + "[11] Tricky Behavior\nd\n";
    CHECK_THROWS_AS(parse_taxonomy(dup), Error);

    // wrong name
    std::string wrong;
    for (int i = 1; i <= 12; ++i) {
        wrong += "[" + std::to_string(i) + "] " +
                 (i == 5 ? "Ransomware" : kCanonicalBehaviorNames[i - 1]) + "\nd\n";
    }
    try {
        parse_taxonomy(wrong);
        FAIL("expected BadTaxonomy");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::BadTaxonomy);
        CHECK(std::string(e.what()).find("Ransom") != std::string::npos);
    }

    // empty description
    std::string empty_desc;
    for (int i = 1; i <= 12; ++i) {
        empty_desc += "[" + std::to_string(i) + "] " + kCanonicalBehaviorNames[i - 1] + "\n";
        if (i != 3) empty_desc += "text\n";
    }
    CHECK_THROWS_AS(parse_taxonomy(empty_desc), Error);
}

TEST_CASE("family lookup: rumms maps to its five behaviors") {
    Taxonomy t = builtin_taxonomy();
    FamilyTable table = builtin_family_table(UnknownFamilyPolicy::AllBehaviors);

    auto behaviors = lookup_family(t, table, std::string("RuMMs"));
    std::set<int> ids;
    for (const Behavior& b : behaviors) ids.insert(b.id);
    CHECK(ids == std::set<int>{1, 2, 3, 4, 11});

    // case and whitespace insensitive
    auto behaviors2 = lookup_family(t, table, std::string("  rumms "));
    CHECK(behaviors2.size() == 5);
}

TEST_CASE("family lookup fallbacks") {
    Taxonomy t = builtin_taxonomy();
    FamilyTable all = builtin_family_table(UnknownFamilyPolicy::AllBehaviors);
    CHECK(lookup_family(t, all, std::nullopt).size() == 12);
    CHECK(lookup_family(t, all, std::string("nonexistent")).size() == 12);

    FamilyTable strict = builtin_family_table(UnknownFamilyPolicy::Error);
    try {
        lookup_family(t, strict, std::string("nonexistent"));
        FAIL("expected UnknownFamily");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::UnknownFamily);
    }
    CHECK_THROWS_AS(lookup_family(t, strict, std::nullopt), Error);
}

TEST_CASE("family lookup is pure") {
    Taxonomy t = builtin_taxonomy();
    FamilyTable table = builtin_family_table(UnknownFamilyPolicy::AllBehaviors);
    auto a = lookup_family(t, table, std::string("rumms"));
    auto b = lookup_family(t, table, std::string("rumms"));
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].id == b[i].id);
        // every returned id resolves in the taxonomy
        CHECK(t.by_id(a[i].id).name == a[i].name);
    }
}

TEST_CASE("family table guards") {
    try {
        parse_family_table("foo: 13\n", UnknownFamilyPolicy::AllBehaviors);
        FAIL("expected BadFamilyTable");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::BadFamilyTable);
    }
    CHECK_THROWS_AS(parse_family_table("foo:\n", UnknownFamilyPolicy::AllBehaviors), Error);
    CHECK_THROWS_AS(parse_family_table("foo: 1\nFOO: 2\n", UnknownFamilyPolicy::AllBehaviors),
                    Error);
    CHECK_THROWS_AS(parse_family_table("no-colon-line\n", UnknownFamilyPolicy::AllBehaviors),
                    Error);
}
