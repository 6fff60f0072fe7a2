#include "repograph/graph/graph_store.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "repograph/core/errors.hpp"

namespace repograph {

namespace {

using nlohmann::json;

json node_record(const GraphNode& n) {
    json j{{"id", n.id.hex()},
           {"node_type", to_string(n.node_type)},
           {"graph_type", to_string(n.graph_type)},
           {"kind", n.kind},
           {"name", n.name},
           {"code_text", n.code_text},
           {"file_path", n.file_path},
           {"line_span", {n.line_span.start, n.line_span.end}},
           {"semantic_type", n.semantic_type ? json(*n.semantic_type) : json(nullptr)},
           {"structural_features",
            {{"cyclomatic_complexity", n.structural_features.cyclomatic_complexity},
             {"nesting_depth", n.structural_features.nesting_depth}}}};
    return j;
}

json edge_record(const GraphEdge& e) {
    return json{{"src", e.src.hex()},
                {"dst", e.dst.hex()},
                {"edge_type", to_string(e.edge_type)},
                {"weight", e.weight},
                {"context", e.context ? json(*e.context) : json(nullptr)}};
}

NodeId parse_id(const json& j) {
    auto id = NodeId::from_hex(j.get<std::string>());
    if (!id) throw DecodeError("malformed node id " + j.dump());
    return *id;
}

template <class E, class F>
E parse_enum(const json& j, F&& from_string, const char* what) {
    const auto s = j.get<std::string>();
    auto v = from_string(s);
    if (!v) throw DecodeError(std::string("unknown ") + what + " '" + s + "'");
    return *v;
}

GraphNode parse_node(const json& j) {
    GraphNode n;
    n.id = parse_id(j.at("id"));
    n.node_type = parse_enum<NodeType>(j.at("node_type"), node_type_from_string, "node_type");
    n.graph_type = parse_enum<GraphType>(j.at("graph_type"), graph_type_from_string, "graph_type");
    j.at("kind").get_to(n.kind);
    j.at("name").get_to(n.name);
    j.at("code_text").get_to(n.code_text);
    j.at("file_path").get_to(n.file_path);
    const auto& span = j.at("line_span");
    n.line_span = {span.at(0).get<std::uint32_t>(), span.at(1).get<std::uint32_t>()};
    if (!j.at("semantic_type").is_null()) n.semantic_type = j.at("semantic_type").get<std::string>();
    const auto& f = j.at("structural_features");
    f.at("cyclomatic_complexity").get_to(n.structural_features.cyclomatic_complexity);
    f.at("nesting_depth").get_to(n.structural_features.nesting_depth);
    return n;
}

GraphEdge parse_edge(const json& j) {
    GraphEdge e;
    e.src = parse_id(j.at("src"));
    e.dst = parse_id(j.at("dst"));
    e.edge_type = parse_enum<EdgeType>(j.at("edge_type"), edge_type_from_string, "edge_type");
    j.at("weight").get_to(e.weight);
    if (!j.at("context").is_null()) e.context = j.at("context").get<std::string>();
    return e;
}

}  // namespace

void write_graph(const CodeGraph& graph, std::ostream& out) {
    auto edges = graph.edges();
    std::sort(edges.begin(), edges.end(), edge_less);
    const json header{{"format_version", kGraphFormatVersion},
                      {"repo_name", graph.repo_name},
                      {"counts", {{"nodes", graph.node_count()}, {"edges", edges.size()}}}};
    out << header.dump() << '\n';
    for (const auto& [id, n] : graph.nodes()) out << json{{"n", node_record(n)}}.dump() << '\n';
    for (const auto& e : edges) out << json{{"e", edge_record(e)}}.dump() << '\n';
}

void save_graph(const CodeGraph& graph, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    write_graph(graph, out);
    if (!out) throw IoError("write failed for " + path.string());
}

CodeGraph read_graph(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw DecodeError("graph store is empty");
    CodeGraph g;
    std::size_t want_nodes = 0;
    std::size_t want_edges = 0;
    try {
        const auto header = json::parse(line);
        const auto version = header.at("format_version").get<int>();
        if (version != kGraphFormatVersion) {
            throw DecodeError("unsupported graph format version " + std::to_string(version));
        }
        header.at("repo_name").get_to(g.repo_name);
        header.at("counts").at("nodes").get_to(want_nodes);
        header.at("counts").at("edges").get_to(want_edges);
        std::size_t line_no = 1;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            const auto rec = json::parse(line);
            if (rec.contains("n")) {
                if (!g.add_node(parse_node(rec.at("n")))) {
                    throw DecodeError("duplicate node on line " + std::to_string(line_no));
                }
            } else if (rec.contains("e")) {
                g.add_edge(parse_edge(rec.at("e")));
            } else {
                throw DecodeError("unknown record on line " + std::to_string(line_no));
            }
        }
    } catch (const json::exception& e) {
        throw DecodeError(std::string("corrupt graph store: ") + e.what());
    }
    if (g.node_count() != want_nodes || g.edge_count() != want_edges) {
        throw DecodeError("graph store truncated: expected " + std::to_string(want_nodes) +
                          " nodes / " + std::to_string(want_edges) + " edges, found " +
                          std::to_string(g.node_count()) + " / " + std::to_string(g.edge_count()));
    }
    for (const auto& e : g.edges()) {
        if (!g.contains(e.src) || !g.contains(e.dst)) throw DecodeError("dangling edge in graph store");
    }
    g.canonicalize();
    return g;
}

CodeGraph load_graph(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    return read_graph(in);
}

}  // namespace repograph
