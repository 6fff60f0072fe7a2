#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "repograph/embed/embedder.hpp"
#include "repograph/graph/code_graph.hpp"
#include "repograph/index/index.hpp"
#include "repograph/kernels/kernels.hpp"

namespace repograph {

// ---------------------------------------------------------------------------------------
// Query graph

struct QueryContext {
    std::string repo_name;
    std::string file_path;  // repository-relative
    std::string source;     // full file text
    std::uint32_t line = 1;  // 1-based cursor position
    std::uint32_t col = 1;
};

/// Byte offset of a 1-based (line, col). The column may point one past the end of the
/// line. Throws CursorError otherwise.
std::size_t cursor_offset(std::string_view source, std::uint32_t line, std::uint32_t col);

struct QueryGraph {
    CodeGraph graph;
    NodeId cursor_anchor;  // innermost AST node at the cursor
    std::optional<NodeId> function_id;
    std::string prefix;   // source before the cursor
    std::string snippet;  // enclosing definition up to the cursor, or the trailing lines of the prefix
};

struct QueryGraphOptions {
    bool ast_only = false;
    std::size_t module_snippet_lines = 20;
};

/// Local graph of the incomplete code before the cursor: the AST of the enclosing
/// function (or of the module when there is none) with its Defines/Uses values and
/// typed variables. Unfinished blocks are closed with a placeholder statement at the
/// cursor; that placeholder is the cursor anchor.
QueryGraph build_query_graph(const QueryContext& ctx, const QueryGraphOptions& options = {},
                             const LanguageFrontend& frontend = default_frontend());

// ---------------------------------------------------------------------------------------
// Encoding and attention

struct FusionConfig {
    double theta = 0.4;
    std::size_t gnn_layers = 2;
    std::size_t hidden_dim = 0;  // 0: same as the input features
    std::uint64_t seed = 7;
    std::size_t pe_dim = kDefaultPeDim;
    kernels::Exec exec = kernels::Exec::Parallel;
};

/// in x out matrix with entries uniform in ±sqrt(3 / in), drawn from a portable generator.
Matrix encoder_weights(std::size_t in, std::size_t out, std::uint64_t seed);

/// Undirected neighbour lists over `order` (edges of any type, self loops dropped).
kernels::Neighbors neighbors_of(const CodeGraph& g, const std::vector<NodeId>& order);

/// L rounds of mean aggregation, seeded linear map and squashing over the given features.
Matrix encode_nodes(const kernels::Neighbors& adj, const Matrix& features, const FusionConfig& cfg);

/// Features from embed_graph, then encode_nodes. Row order = NodeId order.
Matrix encode_graph(const CodeGraph& g, const TextEmbedder& embedder, const FusionConfig& cfg,
                    NodeVectorCache* cache = nullptr);

std::vector<double> softmax(const std::vector<double>& scores);

struct AggregatedRetrieval {
    Matrix h_r;                        // all retrieved rows, each scaled by its graph's weight
    std::vector<double> weights;       // softmax of the rerank scores
    std::vector<std::size_t> offsets;  // first row of graph i; size k + 1
};

AggregatedRetrieval aggregate_retrieved(const std::vector<Matrix>& hs, const std::vector<double>& scores);

// ---------------------------------------------------------------------------------------
// Fused graph

struct RetrievedGraph {
    SubgraphId subgraph_id = 0;
    double score = 0.0;
    CodeGraph graph;
};

struct NodeProvenance {
    bool from_query = true;
    SubgraphId subgraph_id = 0;  // meaningful when !from_query

    bool operator==(const NodeProvenance&) const = default;
};

struct FusedGraph {
    CodeGraph graph;
    std::map<NodeId, NodeProvenance> provenance;
    std::vector<GraphEdge> cross_edges;       // the CrossGraphFusion edges, canonical order
    std::map<NodeId, NodeId> merged_into;     // removed duplicate -> representative
};

/// Pairs that may be linked across graphs.
bool type_compatible(const GraphNode& query_node, const GraphNode& retrieved_node);

/// Key under which retrieved declarations collapse; empty for nodes that never merge.
std::optional<std::string> merge_key(const GraphNode& n);

/// Union of the query and retrieved graphs plus a CrossGraphFusion edge for every
/// type-compatible pair with attention above theta. Row i of `attention` belongs to
/// query_order[i], column j to retrieved_order[j].
FusedGraph build_fused_graph(const CodeGraph& query, const std::vector<RetrievedGraph>& retrieved,
                             const Matrix& attention, const std::vector<NodeId>& query_order,
                             const std::vector<NodeId>& retrieved_order, double theta);

struct FusionResult {
    FusedGraph fused;
    Matrix attention;
    std::vector<NodeId> query_order;
    std::vector<NodeId> retrieved_order;
    std::vector<double> weights;
};

FusionResult fuse(const CodeGraph& query, const std::vector<RetrievedGraph>& retrieved,
                  const TextEmbedder& embedder, const FusionConfig& cfg, NodeVectorCache* cache = nullptr);

/// Attention matrix and cross edges for the debug dump.
nlohmann::json fusion_dump(const FusionResult& r, double theta);

}  // namespace repograph
