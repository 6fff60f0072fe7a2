#include <fstream>
#include <set>
#include <unordered_set>

#include <json.hpp>

#include "repograph/core/errors.hpp"
#include "repograph/core/hash.hpp"
#include "repograph/index/index.hpp"

namespace repograph {

namespace {

constexpr int kCatalogVersion = 1;

std::vector<NodeId> neighbourhood(const CodeGraph& g, const Adjacency& adj, const NodeId& anchor,
                                  const UnitOptions& opt) {
    std::vector<NodeId> order{anchor};
    std::unordered_set<NodeId, NodeIdHash> seen{anchor};
    std::vector<NodeId> frontier{anchor};
    const auto& edges = g.edges();
    for (std::size_t hop = 0; hop < opt.hops && order.size() < opt.node_cap; ++hop) {
        std::set<NodeId> next;
        for (const auto& id : frontier) {
            for (auto i : adj.out_of(id)) {
                if (opt.edge_types.count(edges[i].edge_type) && !seen.count(edges[i].dst)) next.insert(edges[i].dst);
            }
            for (auto i : adj.in_of(id)) {
                if (opt.edge_types.count(edges[i].edge_type) && !seen.count(edges[i].src)) next.insert(edges[i].src);
            }
        }
        frontier.clear();
        for (const auto& id : next) {
            if (order.size() >= opt.node_cap) break;
            seen.insert(id);
            order.push_back(id);
            frontier.push_back(id);
        }
    }
    return order;
}

}  // namespace

std::vector<SubgraphUnit> build_subgraph_units(const CodeGraph& graph, const UnitOptions& options) {
    const Adjacency adj(graph);
    std::vector<SubgraphUnit> units;
    for (const auto& [id, n] : graph.nodes()) {
        if (n.node_type != NodeType::Function) continue;
        SubgraphUnit u;
        u.subgraph_id = static_cast<SubgraphId>(units.size());
        u.anchor = id;
        u.node_ids = neighbourhood(graph, adj, id, options);
        u.file_path = n.file_path;
        u.name = n.name;
        u.source_digest = sha256_hex(unit_code_text(graph, u));
        units.push_back(std::move(u));
    }
    return units;
}

std::string unit_code_text(const CodeGraph& graph, const SubgraphUnit& unit) {
    std::string text;
    auto append = [&](const GraphNode* n) {
        if (!n || n->node_type != NodeType::Function) return;
        if (!text.empty()) text += "\n\n";
        text += n->code_text;
    };
    append(graph.find(unit.anchor));
    for (const auto& id : unit.node_ids) {
        if (id != unit.anchor) append(graph.find(id));
    }
    return text;
}

void save_catalog(const std::vector<SubgraphUnit>& units, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << nlohmann::json{{"format_version", kCatalogVersion}, {"kind", "subgraph_catalog"}, {"count", units.size()}}.dump()
        << '\n';
    for (const auto& u : units) {
        nlohmann::json ids = nlohmann::json::array();
        for (const auto& id : u.node_ids) ids.push_back(id.hex());
        nlohmann::json rec{{"subgraph_id", u.subgraph_id}, {"anchor", u.anchor.hex()}, {"node_ids", std::move(ids)},
                           {"source_digest", u.source_digest}, {"file_path", u.file_path}, {"name", u.name}};
        out << rec.dump() << '\n';
    }
    if (!out) throw IoError("write failed for " + path.string());
}

std::vector<SubgraphUnit> load_catalog(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    auto node_id = [](const nlohmann::json& j) {
        auto id = NodeId::from_hex(j.get<std::string>());
        if (!id) throw DecodeError("catalog: bad node id");
        return *id;
    };
    std::vector<SubgraphUnit> units;
    std::string line;
    try {
        if (!std::getline(in, line)) throw DecodeError("catalog: missing header");
        const auto header = nlohmann::json::parse(line);
        if (header.at("format_version").get<int>() != kCatalogVersion) throw DecodeError("catalog: unsupported version");
        const auto count = header.at("count").get<std::size_t>();
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const auto j = nlohmann::json::parse(line);
            SubgraphUnit u;
            u.subgraph_id = j.at("subgraph_id").get<SubgraphId>();
            u.anchor = node_id(j.at("anchor"));
            for (const auto& id : j.at("node_ids")) u.node_ids.push_back(node_id(id));
            u.source_digest = j.at("source_digest").get<std::string>();
            u.file_path = j.at("file_path").get<std::string>();
            u.name = j.at("name").get<std::string>();
            units.push_back(std::move(u));
        }
        if (units.size() != count) throw DecodeError("catalog: record count mismatch (truncated file?)");
    } catch (const nlohmann::json::exception& e) {
        throw DecodeError(std::string("catalog: ") + e.what());
    }
    return units;
}

}  // namespace repograph
