#include <doctest.h>

#include "repograph/prompt/prompt.hpp"

using namespace repograph;

namespace {

GraphNode fn(const std::string& name) {
    GraphNode n;
    n.id = NodeId::derive("s.py", "function:" + name, 0, 1);
    n.node_type = NodeType::Function;
    n.graph_type = GraphType::CallGraph;
    n.kind = "function";
    n.name = name;
    n.semantic_type = "def " + name + "()";
    n.code_text = "def " + name + "():\n    pass\n";
    n.file_path = "s.py";
    return n;
}

}  // namespace

TEST_SUITE("serializer") {

TEST_CASE("one Calls edge gives one triple") {
    CodeGraph g;
    const auto f = fn("f"), h = fn("g");
    g.add_node(f);
    g.add_node(h);
    g.add_edge({f.id, h.id, EdgeType::Calls, 1.0, std::nullopt});
    const auto s = serialize_graph(g, 1000);
    REQUIRE(s.triples.size() == 1);
    CHECK(s.omitted == 0);
    const auto line = s.triples[0].render();
    CHECK(line == "Function `def f()` [id:" + f.id.short_hex() + "] — calls → Function `def g()` [id:" +
                      h.id.short_hex() + "] (w=1.00)");
    CHECK(line.find('\n') == std::string::npos);
    CHECK(s.lines().size() == 1);
}

TEST_CASE("display name falls back to the first 40 characters of code") {
    GraphNode n;
    n.id = NodeId::derive("s.py", "x", 0, 1);
    n.node_type = NodeType::Statement;
    n.code_text = "result = compute_everything(alpha,\n    beta, gamma, delta, epsilon)";
    CHECK(node_description(n) == "Statement `result = compute_everything(alpha, beta,` [id:" + n.id.short_hex() + "]");
}

TEST_CASE("budget zero leaves only the omission line") {
    CodeGraph g;
    const auto f = fn("f"), h = fn("g");
    g.add_node(f);
    g.add_node(h);
    g.add_edge({f.id, h.id, EdgeType::Calls, 1.0, std::nullopt});
    const auto s = serialize_graph(g, 0);
    CHECK(s.triples.empty());
    CHECK(s.lines() == std::vector<std::string>{"... (1 more edges omitted)"});
    CHECK(serialize_graph(CodeGraph{}, 100).lines().empty());
}

TEST_CASE("ten edges with room for four keep the four highest priorities") {
    CodeGraph g;
    std::vector<GraphNode> ns;
    for (int i = 0; i < 6; ++i) {
        ns.push_back(fn("n" + std::to_string(i)));
        g.add_node(ns.back());
    }
    const EdgeType types[10] = {EdgeType::AstChild,    EdgeType::Uses,     EdgeType::Calls,   EdgeType::DataFlow,
                                EdgeType::CrossGraphFusion, EdgeType::Contains, EdgeType::Inherits,
                                EdgeType::ControlFlow, EdgeType::Calls,    EdgeType::AstChild};
    const double weights[10] = {1, 1, 2, 1, 0.6, 1, 1, 1, 3, 1};
    for (int i = 0; i < 10; ++i) g.add_edge({ns[i % 6].id, ns[(i + 1) % 6].id, types[i], weights[i], std::nullopt});

    // oracle: sort by (priority, -weight, canonical edge order)
    std::vector<GraphEdge> order(g.edges().begin(), g.edges().end());
    std::stable_sort(order.begin(), order.end(), [](const GraphEdge& a, const GraphEdge& b) {
        if (edge_priority(a.edge_type) != edge_priority(b.edge_type)) return edge_priority(a.edge_type) < edge_priority(b.edge_type);
        if (a.weight != b.weight) return a.weight > b.weight;
        return edge_less(a, b);
    });
    const TokenCounter counter;
    const auto all = serialize_graph(g, 1e9);
    REQUIRE(all.triples.size() == 10);
    double four = counter.count(omission_line(6));
    for (int i = 0; i < 4; ++i) four += counter.count(all.triples[i].render());
    const auto cut = serialize_graph(g, four);
    REQUIRE(cut.triples.size() == 4);
    CHECK(cut.omitted == 6);
    for (int i = 0; i < 4; ++i) {
        CHECK(cut.triples[i].predicate == predicate_text(order[i].edge_type));
        CHECK(cut.triples[i].render() == all.triples[i].render());
    }
    CHECK(cut.triples[0].predicate == "relates to");
    CHECK(cut.triples[1].weight == 3.0);

    // larger budgets never reorder the retained prefix
    for (double b = 0; b < 400; b += 7) {
        const auto s = serialize_graph(g, b);
        for (std::size_t i = 0; i < s.triples.size(); ++i) CHECK(s.triples[i].render() == all.triples[i].render());
    }
}

}
