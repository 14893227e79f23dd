#include <doctest.h>

#include <sstream>

#include "core/behavior_kb.hpp"
#include "core/error.hpp"
#include "core/prompt.hpp"
#include "core/smali.hpp"

using namespace mloc;
using namespace mloc::prompt;

namespace {

smali::SmaliClass small_class() {
    return smali::parse_smali_file(
        ".class public Lx/Y;\n"
        ".super Ljava/lang/Object;\n"
        ".method public a()V\n    return-void\n.end method\n",
        "Y.smali");
}

const int kBudget = 100000;

}  // namespace

TEST_CASE("baseline prompt carries the grammar and the ordered behavior list") {
    PromptEngine engine;
    kb::Taxonomy taxonomy = kb::builtin_taxonomy();
    auto prompts = engine.render_baseline(small_class(), taxonomy, kBudget);
    REQUIRE(prompts.size() == 1);
    const std::string& text = prompts[0].text;

    CHECK(text.find("IS_MALICIOUS: <yes or no>") != std::string::npos);
    CHECK(text.find("BEHAVIOR: <comma-separated behaviors>") != std::string::npos);
    CHECK(text.find("12. Premium Service Abuse.") != std::string::npos);

    // behaviors listed in id order
    size_t last = 0;
    for (int id = 1; id <= 12; ++id) {
        std::string token = std::to_string(id) + ". " + taxonomy.by_id(id).name;
        size_t pos = text.find(token);
        REQUIRE(pos != std::string::npos);
        CHECK(pos > last);
        last = pos;
    }
    CHECK(text.find(".method public a()V") != std::string::npos);
}

TEST_CASE("literal braces in class content survive substitution") {
    PromptEngine engine;
    kb::Taxonomy taxonomy = kb::builtin_taxonomy();
    smali::SmaliClass cls = smali::parse_smali_file(
        ".class Lx/Y;\n.method public a()V\n    const-string v0, \"{class_content}\"\n.end method\n",
        "Y.smali");
    auto prompts = engine.render_baseline(cls, taxonomy, kBudget);
    // the brace text from the class body is preserved verbatim, once
    size_t first = prompts[0].text.find("const-string v0, \"{class_content}\"");
    CHECK(first != std::string::npos);
}

TEST_CASE("phase1 prompt embeds the behavior description verbatim") {
    PromptEngine engine;
    kb::Taxonomy taxonomy = kb::builtin_taxonomy();
    const kb::Behavior& privacy = taxonomy.by_id(1);
    auto prompts = engine.render_phase1(small_class(), privacy, kBudget);
    REQUIRE(prompts.size() == 1);
    CHECK(prompts[0].text.find(privacy.description) != std::string::npos);
    CHECK(prompts[0].text.find("CONFIDENCE: <confidence score 0-100>") != std::string::npos);
    CHECK(prompts[0].behavior_id == 1);

    // no unresolved placeholders
    for (const char* ph : {"{class_content}", "{behavior_description}",
                           "{first_phase_explanation}", "{behavior_list}"}) {
        CHECK(prompts[0].text.find(ph) == std::string::npos);
    }
}

TEST_CASE("phase2 prompt puts the explanation before the class and keys on first lines") {
    PromptEngine engine;
    auto prompts = engine.render_phase2(small_class(), "the class reads contacts", kBudget);
    REQUIRE(prompts.size() == 1);
    const std::string& text = prompts[0].text;
    CHECK(text.find("METHOD: <first line of method>") != std::string::npos);
    size_t explanation_pos = text.find("the class reads contacts");
    size_t class_pos = text.find(".class public Lx/Y;");
    REQUIRE(explanation_pos != std::string::npos);
    REQUIRE(class_pos != std::string::npos);
    CHECK(explanation_pos < class_pos);
}

TEST_CASE("empty phase1 explanation is rejected") {
    PromptEngine engine;
    CHECK_THROWS_AS(engine.render_phase2(small_class(), "  \n ", kBudget), Error);
    try {
        engine.render_phase2(small_class(), "", kBudget);
        FAIL("expected EmptyExplanation");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::EmptyExplanation);
    }
}

TEST_CASE("rendering is deterministic") {
    PromptEngine engine;
    kb::Taxonomy taxonomy = kb::builtin_taxonomy();
    auto a = engine.render_phase1(small_class(), taxonomy.by_id(3), kBudget);
    auto b = engine.render_phase1(small_class(), taxonomy.by_id(3), kBudget);
    CHECK(a[0].text == b[0].text);
}

TEST_CASE("template validation per kind") {
    PromptEngine engine;
    CHECK_THROWS_AS(engine.set_template(PromptKind::Phase1, "no placeholders"), Error);
    CHECK_THROWS_AS(
        engine.set_template(PromptKind::Phase1, "{class_content} {first_phase_explanation}"),
        Error);
    CHECK_THROWS_AS(engine.set_template(PromptKind::Baseline, "{behavior_description}"), Error);
    engine.set_template(PromptKind::Baseline, "{class_content} only");  // behavior_list optional
}

TEST_CASE("token estimate is ceil(bytes/4)") {
    CHECK(token_estimate("") == 0);
    CHECK(token_estimate("a") == 1);
    CHECK(token_estimate("abcd") == 1);
    CHECK(token_estimate("abcde") == 2);
}

TEST_CASE("small class yields one identity chunk") {
    smali::SmaliClass cls = small_class();
    auto chunks = chunk_class(cls, 10000);
    REQUIRE(chunks.size() == 1);
    CHECK(chunks[0].text == cls.raw_text);
    CHECK_FALSE(chunks[0].oversized);
}

TEST_CASE("four equal methods split into two headed chunks") {
    // construct a class whose header and method slices have known sizes,
    // then pick the budget from the documented estimator so exactly two
    // methods (plus header) fit per chunk
    std::string header = ".class public Lgen/Four;\n.super Ljava/lang/Object;\n";
    std::ostringstream text;
    text << header;
    std::vector<std::string> slices;
    for (int i = 0; i < 4; ++i) {
        std::ostringstream m;
        m << ".method public method" << i << "()V\n"
          << "    const-string v0, \"0123456789abcdef\"\n"
          << "    return-void\n"
          << ".end method\n";
        slices.push_back(m.str());
        text << m.str();
    }
    REQUIRE(slices[0].size() == slices[1].size());
    REQUIRE(slices[0].size() == slices[3].size());

    smali::SmaliClass cls = smali::parse_smali_file(text.str(), "Four.smali");
    int two_fit = token_estimate(header + slices[0] + slices[1]);
    int three_fit = token_estimate(header + slices[0] + slices[1] + slices[2]);
    REQUIRE(two_fit < three_fit);  // budget can separate the cases
    int budget = two_fit;

    auto chunks = chunk_class(cls, budget);
    REQUIRE(chunks.size() == 2);
    for (const auto& c : chunks) {
        CHECK(c.text.rfind(header, 0) == 0);  // both start with the header
        CHECK_FALSE(c.oversized);
        CHECK(token_estimate(c.text) <= budget);
        CHECK(c.count == 2);
    }
}

TEST_CASE("a method alone over budget becomes its own oversized chunk") {
    std::string header = ".class Lgen/Big;\n";
    std::string big_body(400, 'x');
    std::string text = header +
                       ".method public big()V\n    # " + big_body + "\n.end method\n" +
                       ".method public small()V\n.end method\n";
    smali::SmaliClass cls = smali::parse_smali_file(text, "Big.smali");
    int budget = 40;  // far below the big method
    auto chunks = chunk_class(cls, budget);
    REQUIRE(chunks.size() == 2);
    CHECK(chunks[0].oversized);
    CHECK(token_estimate(chunks[0].text) > budget);
    CHECK_FALSE(chunks[1].oversized);
}

TEST_CASE("chunks reconstruct every method exactly once") {
    std::ostringstream text;
    text << ".class Lgen/Many;\n.super Ljava/lang/Object;\n";
    for (int i = 0; i < 9; ++i) {
        text << ".method public m" << i << "()V\n    const/4 v" << i % 4
             << ", 0x1\n.end method\n";
    }
    smali::SmaliClass cls = smali::parse_smali_file(text.str(), "Many.smali");
    for (int budget : {30, 50, 80, 200}) {
        auto chunks = chunk_class(cls, budget);
        std::string joined;
        for (const auto& c : chunks) joined += c.text;
        for (const smali::SmaliMethod& m : cls.methods) {
            std::string slice = m.signature_line;  // normalized anchor: signature occurs once
            size_t first = joined.find(slice);
            REQUIRE(first != std::string::npos);
            CHECK(joined.find(slice, first + 1) == std::string::npos);
        }
    }
}
