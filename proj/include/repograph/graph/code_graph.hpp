#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace repograph {

/// 128-bit node identifier derived from (path, kind, byte span) so that it is
/// stable across indexing runs over identical input.
struct NodeId {
    std::uint64_t hi = 0;
    std::uint64_t lo = 0;

    static NodeId derive(std::string_view path, std::string_view kind, std::size_t begin,
                         std::size_t end);
    static std::optional<NodeId> from_hex(std::string_view hex);

    std::string hex() const;
    std::string short_hex() const { return hex().substr(0, 8); }

    auto operator<=>(const NodeId&) const = default;
};

struct NodeIdHash {
    std::size_t operator()(const NodeId& id) const noexcept {
        return static_cast<std::size_t>(id.hi ^ (id.lo * 0x9E3779B97F4A7C15ULL));
    }
};

enum class NodeType : std::uint8_t {
    File,
    Folder,
    Class,
    Function,
    TypeDef,
    Variable,
    Statement,
    Expression,
    CfgBlock,
    DfgValue,
};

enum class GraphType : std::uint8_t {
    FolderStructure,
    CrossFileDep,
    CallGraph,
    TypeDep,
    ClassInheritance,
    Ast,
    Cfg,
    Dfg,
};

enum class EdgeType : std::uint8_t {
    Contains,
    Imports,
    Calls,
    TypeUses,
    Inherits,
    Implements,
    AstChild,
    ControlFlow,
    DataFlow,
    Defines,
    Uses,
    DeclaresFunction,
    TypeReference,
    InterfaceInheritance,
    AnchorsAst,
    TypeAlignsDataflow,
    AstToCfg,
    CfgToDfg,
    CrossGraphFusion,
};

std::string_view to_string(NodeType t);
std::string_view to_string(GraphType t);
std::string_view to_string(EdgeType t);
std::optional<NodeType> node_type_from_string(std::string_view s);
std::optional<GraphType> graph_type_from_string(std::string_view s);
std::optional<EdgeType> edge_type_from_string(std::string_view s);

/// Edge types that connect two different graph levels.
bool is_cross_level(EdgeType t);

/// The graph level a node type lives in.
GraphType graph_type_for(NodeType t);

struct LineSpan {
    std::uint32_t start = 1;
    std::uint32_t end = 1;
    bool operator==(const LineSpan&) const = default;
};

struct StructuralFeatures {
    std::uint32_t cyclomatic_complexity = 0;
    std::uint32_t nesting_depth = 0;
    bool operator==(const StructuralFeatures&) const = default;
};

struct GraphNode {
    NodeId id;
    NodeType node_type = NodeType::Statement;
    GraphType graph_type = GraphType::Ast;
    std::string kind;  // finer-grained tag, e.g. "ast.Call", "cfg.entry", "dfg.def"
    std::string name;  // identifier when the node names something
    std::string code_text;
    std::string file_path;
    LineSpan line_span;
    std::optional<std::string> semantic_type;
    StructuralFeatures structural_features;

    bool operator==(const GraphNode&) const = default;
};

struct GraphEdge {
    NodeId src;
    NodeId dst;
    EdgeType edge_type = EdgeType::Contains;
    double weight = 1.0;
    std::optional<std::string> context;

    bool operator==(const GraphEdge&) const = default;
};

/// Canonical edge order: (src, dst, edge_type, context, weight).
bool edge_less(const GraphEdge& a, const GraphEdge& b);

/// Unified multi-relational hierarchical graph of a repository.
///
/// Nodes are keyed by NodeId in an ordered map so iteration order is canonical.
/// The type sets are derived from content on demand and therefore always match it.
class CodeGraph {
public:
    std::string repo_name;

    /// Inserts a node; returns false if the id already exists (the graph is unchanged).
    bool add_node(GraphNode node);
    void add_edge(GraphEdge edge) { edges_.push_back(std::move(edge)); }

    const GraphNode* find(const NodeId& id) const;
    GraphNode* find(const NodeId& id);
    bool contains(const NodeId& id) const { return nodes_.count(id) != 0; }

    const std::map<NodeId, GraphNode>& nodes() const { return nodes_; }
    const std::vector<GraphEdge>& edges() const { return edges_; }
    std::size_t node_count() const { return nodes_.size(); }
    std::size_t edge_count() const { return edges_.size(); }

    std::set<NodeType> node_type_set() const;
    std::set<EdgeType> edge_type_set() const;

    /// Sorts edges into canonical order.
    void canonicalize();

    /// Appends another graph's nodes and edges (existing ids are kept).
    void merge(const CodeGraph& other);

    /// Returns invariant violations (dangling edges, level mismatches, bad spans).
    std::vector<std::string> validate() const;

    /// Structural equality after canonicalization of both sides.
    friend bool operator==(const CodeGraph& a, const CodeGraph& b);

private:
    std::map<NodeId, GraphNode> nodes_;
    std::vector<GraphEdge> edges_;
};

/// Adjacency view over a CodeGraph; edge indices refer to graph.edges().
struct Adjacency {
    explicit Adjacency(const CodeGraph& g);
    std::unordered_map<NodeId, std::vector<std::size_t>, NodeIdHash> out;
    std::unordered_map<NodeId, std::vector<std::size_t>, NodeIdHash> in;

    const std::vector<std::size_t>& out_of(const NodeId& id) const;
    const std::vector<std::size_t>& in_of(const NodeId& id) const;
};

/// Induced subgraph on a node set (edges with both endpoints inside).
CodeGraph induced_subgraph(const CodeGraph& g, const std::vector<NodeId>& node_ids);
/// Same, visiting only the out-edges of the kept nodes.
CodeGraph induced_subgraph(const CodeGraph& g, const Adjacency& adj, const std::vector<NodeId>& node_ids);

}  // namespace repograph
