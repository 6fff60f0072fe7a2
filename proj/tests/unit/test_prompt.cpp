#include <doctest.h>

#include "repograph/prompt/prompt.hpp"

using namespace repograph;

namespace {

std::string many_words(std::size_t n) {
    std::string s;
    for (std::size_t i = 0; i < n; ++i) s += "w" + std::to_string(i) + (i % 8 == 7 ? "\n" : " ");
    return s + "cursor_here = ";
}

}  // namespace

TEST_SUITE("prompt") {

TEST_CASE("token counter") {
    CHECK(TokenCounter::words("  a bb\n\tccc  ") == 3);
    CHECK(TokenCounter{}.count("a b c d e f g h i j") == doctest::Approx(13.0));
    CHECK(TokenCounter{}.max_words(13.0) == 10);
    CHECK(TokenCounter{}.max_words(12.9) == 9);
    CHECK(TokenCounter{}.max_words(0) == 0);
}

TEST_CASE("empty retrieval marks both retrieved sections") {
    PromptInput in;
    in.repo_name = "shop";
    in.file_path = "cart.py";
    in.code_before_cursor = "def total(items):\n    return ";
    const auto p = build_prompt(in);
    REQUIRE(p.sections.size() == 7);
    CHECK(p.sections[2].find("(none retrieved)") != std::string::npos);
    CHECK(p.sections[3].find("(none retrieved)") != std::string::npos);
    CHECK(p.local_code == in.code_before_cursor);
    for (const char* key : {"completed_code", "explanation", "confidence_score", "referenced_nodes"}) {
        CHECK(p.text.find(key) != std::string::npos);
    }
    std::size_t pos = 0;
    for (const char* head : {"1. [Role]", "2. [Context Information]", "2.2 Retrieved Code Context",
                             "2.3 Retrieved Code Knowledge Graph", "3. [Task Instruction]", "4. [Output Format]",
                             "5. [Constraints and Rules]"}) {
        const auto at = p.text.find(head, pos);
        CHECK(at != std::string::npos);
        pos = at;
    }
    CHECK(p.text.find("repo name: shop") != std::string::npos);
    CHECK(p.text.find("File Path: cart.py") != std::string::npos);
}

TEST_CASE("oversize local context is cut at a word and ends at the cursor") {
    PromptInput in;
    in.code_before_cursor = many_words(5000);
    const auto p = build_prompt(in);
    CHECK(p.local_code.size() < in.code_before_cursor.size());
    CHECK(in.code_before_cursor.ends_with(p.local_code));
    CHECK(p.local_tokens <= 1024.0);
    CHECK(p.tokens <= 2048.0);
    const auto at = p.text.find(p.local_code);
    CHECK(at != std::string::npos);
}

TEST_CASE("snippets render in rerank order with file headers") {
    PromptInput in;
    in.code_before_cursor = "x = ";
    in.snippets = {{2, "b.py", "beta", "def beta():\n    return 2\n", 0.91},
                   {0, "a.py", "alpha", "def alpha():\n    return 1\n", 0.85},
                   {5, "c.py", "gamma", "def gamma():\n    return 3\n", 0.40}};
    const auto p = build_prompt(in);
    CHECK(p.snippets_kept == 3);
    CHECK(p.sections[2] ==
          "2.2 Retrieved Code Context\n```\n"
          "# b.py :: beta (score=0.910)\ndef beta():\n    return 2\n"
          "# a.py :: alpha (score=0.850)\ndef alpha():\n    return 1\n"
          "# c.py :: gamma (score=0.400)\ndef gamma():\n    return 3\n```");
}

TEST_CASE("retrieved code respects its share of the budget") {
    PromptInput in;
    in.code_before_cursor = "x = ";
    for (SubgraphId i = 0; i < 10; ++i) in.snippets.push_back({i, "f.py", "f", many_words(200), 0.5});
    const auto p = build_prompt(in);
    CHECK(TokenCounter{}.count(p.sections[2]) <= 1024 * 0.6);
    CHECK(p.retrieved_tokens <= 1024.0);
    CHECK(p.snippets_kept < 10);
}

TEST_CASE("the graph section can be left out") {
    PromptInput in;
    in.code_before_cursor = "x = ";
    in.include_graph_section = false;
    const auto p = build_prompt(in);
    CHECK(p.sections[3].empty());
    CHECK(p.text.find("Knowledge Graph") == std::string::npos);
}

}
