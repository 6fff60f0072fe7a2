#include "repograph/graph/code_graph.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <tuple>
#include <unordered_set>

#include "repograph/core/hash.hpp"

namespace repograph {

namespace {

constexpr std::array<std::string_view, 10> kNodeTypeNames = {
    "File", "Folder", "Class", "Function", "TypeDef",
    "Variable", "Statement", "Expression", "CfgBlock", "DfgValue"};

constexpr std::array<std::string_view, 8> kGraphTypeNames = {
    "FolderStructure", "CrossFileDep", "CallGraph", "TypeDep",
    "ClassInheritance", "Ast", "Cfg", "Dfg"};

constexpr std::array<std::string_view, 19> kEdgeTypeNames = {
    "Contains", "Imports", "Calls", "TypeUses", "Inherits", "Implements", "AstChild",
    "ControlFlow", "DataFlow", "Defines", "Uses", "DeclaresFunction", "TypeReference",
    "InterfaceInheritance", "AnchorsAst", "TypeAlignsDataflow", "AstToCfg", "CfgToDfg",
    "CrossGraphFusion"};

template <typename Enum, std::size_t N>
std::optional<Enum> lookup(const std::array<std::string_view, N>& names, std::string_view s) {
    for (std::size_t i = 0; i < N; ++i) {
        if (names[i] == s) return static_cast<Enum>(i);
    }
    return std::nullopt;
}

const std::vector<std::size_t> kNoEdges;

}  // namespace

NodeId NodeId::derive(std::string_view path, std::string_view kind, std::size_t begin,
                      std::size_t end) {
    std::string key;
    key.reserve(path.size() + kind.size() + 48);
    key.append(path);
    key.push_back('\0');
    key.append(kind);
    key.push_back('\0');
    key.append(std::to_string(begin));
    key.push_back(':');
    key.append(std::to_string(end));
    const auto d = sha256(key);
    NodeId id;
    for (int i = 0; i < 8; ++i) id.hi = (id.hi << 8) | d[static_cast<std::size_t>(i)];
    for (int i = 8; i < 16; ++i) id.lo = (id.lo << 8) | d[static_cast<std::size_t>(i)];
    return id;
}

std::optional<NodeId> NodeId::from_hex(std::string_view hex) {
    if (hex.size() != 32) return std::nullopt;
    NodeId id;
    for (std::size_t i = 0; i < 32; ++i) {
        const char c = hex[i];
        std::uint64_t v;
        if (c >= '0' && c <= '9') v = static_cast<std::uint64_t>(c - '0');
        else if (c >= 'a' && c <= 'f') v = static_cast<std::uint64_t>(c - 'a' + 10);
        else return std::nullopt;
        auto& word = i < 16 ? id.hi : id.lo;
        word = (word << 4) | v;
    }
    return id;
}

std::string NodeId::hex() const {
    char buf[33];
    std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(hi),
                  static_cast<unsigned long long>(lo));
    return std::string(buf, 32);
}

std::string_view to_string(NodeType t) { return kNodeTypeNames[static_cast<std::size_t>(t)]; }
std::string_view to_string(GraphType t) { return kGraphTypeNames[static_cast<std::size_t>(t)]; }
std::string_view to_string(EdgeType t) { return kEdgeTypeNames[static_cast<std::size_t>(t)]; }

std::optional<NodeType> node_type_from_string(std::string_view s) {
    return lookup<NodeType>(kNodeTypeNames, s);
}
std::optional<GraphType> graph_type_from_string(std::string_view s) {
    return lookup<GraphType>(kGraphTypeNames, s);
}
std::optional<EdgeType> edge_type_from_string(std::string_view s) {
    return lookup<EdgeType>(kEdgeTypeNames, s);
}

bool is_cross_level(EdgeType t) {
    switch (t) {
        case EdgeType::DeclaresFunction:
        case EdgeType::TypeReference:
        case EdgeType::InterfaceInheritance:
        case EdgeType::AnchorsAst:
        case EdgeType::TypeAlignsDataflow:
        case EdgeType::AstToCfg:
        case EdgeType::CfgToDfg:
            return true;
        default:
            return false;
    }
}

GraphType graph_type_for(NodeType t) {
    switch (t) {
        case NodeType::File:
        case NodeType::Folder:
            return GraphType::FolderStructure;
        case NodeType::Class:
            return GraphType::ClassInheritance;
        case NodeType::Function:
            return GraphType::CallGraph;
        case NodeType::TypeDef:
        case NodeType::Variable:
            return GraphType::TypeDep;
        case NodeType::Statement:
        case NodeType::Expression:
            return GraphType::Ast;
        case NodeType::CfgBlock:
            return GraphType::Cfg;
        case NodeType::DfgValue:
            return GraphType::Dfg;
    }
    return GraphType::Ast;
}

bool edge_less(const GraphEdge& a, const GraphEdge& b) {
    return std::tie(a.src, a.dst, a.edge_type, a.context, a.weight) <
           std::tie(b.src, b.dst, b.edge_type, b.context, b.weight);
}

bool CodeGraph::add_node(GraphNode node) {
    const auto id = node.id;
    return nodes_.emplace(id, std::move(node)).second;
}

const GraphNode* CodeGraph::find(const NodeId& id) const {
    const auto it = nodes_.find(id);
    return it == nodes_.end() ? nullptr : &it->second;
}

GraphNode* CodeGraph::find(const NodeId& id) {
    const auto it = nodes_.find(id);
    return it == nodes_.end() ? nullptr : &it->second;
}

std::set<NodeType> CodeGraph::node_type_set() const {
    std::set<NodeType> s;
    for (const auto& [id, n] : nodes_) s.insert(n.node_type);
    return s;
}

std::set<EdgeType> CodeGraph::edge_type_set() const {
    std::set<EdgeType> s;
    for (const auto& e : edges_) s.insert(e.edge_type);
    return s;
}

void CodeGraph::canonicalize() { std::sort(edges_.begin(), edges_.end(), edge_less); }

void CodeGraph::merge(const CodeGraph& other) {
    for (const auto& [id, n] : other.nodes_) nodes_.emplace(id, n);
    edges_.insert(edges_.end(), other.edges_.begin(), other.edges_.end());
}

std::vector<std::string> CodeGraph::validate() const {
    std::vector<std::string> problems;
    for (const auto& [id, n] : nodes_) {
        if (n.line_span.start > n.line_span.end) {
            problems.push_back("node " + id.hex() + ": line span start > end");
        }
        if (n.file_path.empty() && n.node_type != NodeType::Folder) {
            problems.push_back("node " + id.hex() + ": empty file_path");
        }
        if (graph_type_for(n.node_type) != n.graph_type) {
            problems.push_back("node " + id.hex() + ": node_type inconsistent with graph_type");
        }
    }
    for (const auto& e : edges_) {
        const auto* s = find(e.src);
        const auto* d = find(e.dst);
        if (!s || !d) {
            problems.push_back("dangling edge " + std::string(to_string(e.edge_type)) + " " +
                               e.src.hex() + " -> " + e.dst.hex());
            continue;
        }
        if (!(e.weight > 0.0)) problems.push_back("non-positive edge weight");
        if (e.edge_type == EdgeType::CrossGraphFusion) continue;
        const bool spans = s->graph_type != d->graph_type;
        if (spans != is_cross_level(e.edge_type)) {
            problems.push_back("edge " + std::string(to_string(e.edge_type)) + " " +
                               std::string(to_string(s->graph_type)) + " -> " +
                               std::string(to_string(d->graph_type)) +
                               " violates the cross-level rule");
        }
    }
    return problems;
}

bool operator==(const CodeGraph& a, const CodeGraph& b) {
    if (a.repo_name != b.repo_name || a.nodes_ != b.nodes_) return false;
    auto ea = a.edges_;
    auto eb = b.edges_;
    std::sort(ea.begin(), ea.end(), edge_less);
    std::sort(eb.begin(), eb.end(), edge_less);
    return ea == eb;
}

Adjacency::Adjacency(const CodeGraph& g) {
    const auto& edges = g.edges();
    for (std::size_t i = 0; i < edges.size(); ++i) {
        out[edges[i].src].push_back(i);
        in[edges[i].dst].push_back(i);
    }
}

const std::vector<std::size_t>& Adjacency::out_of(const NodeId& id) const {
    const auto it = out.find(id);
    return it == out.end() ? kNoEdges : it->second;
}

const std::vector<std::size_t>& Adjacency::in_of(const NodeId& id) const {
    const auto it = in.find(id);
    return it == in.end() ? kNoEdges : it->second;
}

CodeGraph induced_subgraph(const CodeGraph& g, const std::vector<NodeId>& node_ids) {
    CodeGraph sub;
    sub.repo_name = g.repo_name;
    std::unordered_set<NodeId, NodeIdHash> keep(node_ids.begin(), node_ids.end());
    for (const auto& id : node_ids) {
        if (const auto* n = g.find(id)) sub.add_node(*n);
    }
    for (const auto& e : g.edges()) {
        if (keep.count(e.src) && keep.count(e.dst)) sub.add_edge(e);
    }
    sub.canonicalize();
    return sub;
}

CodeGraph induced_subgraph(const CodeGraph& g, const Adjacency& adj, const std::vector<NodeId>& node_ids) {
    CodeGraph sub;
    sub.repo_name = g.repo_name;
    std::unordered_set<NodeId, NodeIdHash> keep(node_ids.begin(), node_ids.end());
    for (const auto& id : node_ids) {
        if (const auto* n = g.find(id)) sub.add_node(*n);
    }
    const auto& edges = g.edges();
    for (const auto& id : keep) {
        for (auto i : adj.out_of(id)) {
            if (keep.count(edges[i].dst)) sub.add_edge(edges[i]);
        }
    }
    sub.canonicalize();
    return sub;
}

}  // namespace repograph
