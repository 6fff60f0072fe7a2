#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "repograph/graph/code_graph.hpp"
#include "repograph/index/index.hpp"

namespace repograph {

/// Whitespace-delimited words times a fixed factor.
struct TokenCounter {
    double tokens_per_word = 1.3;

    static std::size_t words(std::string_view text);
    double count(std::string_view text) const { return static_cast<double>(words(text)) * tokens_per_word; }
    /// Largest word count whose cost stays within `budget`.
    std::size_t max_words(double budget) const;
};

struct GraphTriple {
    std::string subject;
    std::string predicate;
    std::string object;
    std::optional<double> weight;

    /// "SUBJ — predicate → OBJ (w=X.XX)"
    std::string render() const;
};

std::string_view predicate_text(EdgeType t);

/// "<node_type> `<semantic type or first 40 chars of code>` [id:<8 hex>]", on one line.
std::string node_description(const GraphNode& n);

/// 0 for CrossGraphFusion, 1 for Calls/Inherits, 2 for DataFlow/ControlFlow, 3 for AstChild, 4 otherwise.
int edge_priority(EdgeType t);

struct SerializedGraph {
    std::vector<GraphTriple> triples;
    std::size_t omitted = 0;

    /// Rendered triples plus the omission line when something was cut.
    std::vector<std::string> lines() const;
};

std::string omission_line(std::size_t omitted);

/// Triples by (priority, descending weight, NodeId) cut to fit `budget` tokens, the
/// omission line included whenever at least one triple fits beside it.
SerializedGraph serialize_graph(const CodeGraph& g, double budget, const TokenCounter& counter = {});

struct RetrievedSnippet {
    SubgraphId subgraph_id = 0;
    std::string file_path;
    std::string name;
    std::string code;
    double score = 0.0;
};

struct PromptBudget {
    double total = 2048;
    double local = 1024;      // everything outside the two retrieved sections
    double retrieved = 1024;  // retrieved code and graph sections
    double code_share = 0.6;  // of the retrieved half
};

struct PromptInput {
    std::string repo_name;
    std::string file_path;
    std::string code_before_cursor;
    std::vector<RetrievedSnippet> snippets;  // rerank order
    const CodeGraph* graph = nullptr;        // fused graph; null renders the graph section as empty
    bool include_graph_section = true;
};

struct Prompt {
    std::string text;
    std::string local_code;  // retained suffix of code_before_cursor
    std::vector<std::string> sections;  // seven rendered sections, in order (empty when omitted)
    double tokens = 0;
    double local_tokens = 0;
    double retrieved_tokens = 0;
    std::size_t snippets_kept = 0;
    std::size_t triples_kept = 0;
};

inline constexpr std::string_view kNoneRetrieved = "(none retrieved)";
inline constexpr std::string_view kGraphSectionHeader = "2.3 Retrieved Code Knowledge Graph";
inline constexpr std::string_view kCodeSectionHeader = "2.2 Retrieved Code Context";

Prompt build_prompt(const PromptInput& input, const PromptBudget& budget = {}, const TokenCounter& counter = {});

}  // namespace repograph
