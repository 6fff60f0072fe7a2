#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "fixtures.hpp"
#include "repograph/core/errors.hpp"
#include "repograph/graph/builder.hpp"
#include "repograph/graph/graph_store.hpp"

using namespace repograph;

namespace {

std::map<GraphType, std::size_t> nodes_by_graph_type(const CodeGraph& g) {
    std::map<GraphType, std::size_t> out;
    for (const auto& [id, n] : g.nodes()) ++out[n.graph_type];
    return out;
}

std::map<EdgeType, std::size_t> edges_by_type(const CodeGraph& g) {
    std::map<EdgeType, std::size_t> out;
    for (const auto& e : g.edges()) ++out[e.edge_type];
    return out;
}

const GraphNode* function_named(const CodeGraph& g, std::string_view name) {
    for (const auto& [id, n] : g.nodes()) {
        if (n.node_type == NodeType::Function && n.name == name) return &n;
    }
    return nullptr;
}

bool has_edge(const CodeGraph& g, const NodeId& a, const NodeId& b, EdgeType t) {
    return std::any_of(g.edges().begin(), g.edges().end(),
                       [&](const GraphEdge& e) { return e.src == a && e.dst == b && e.edge_type == t; });
}

BuildResult build_source(const std::string& text, const std::string& rel = "m.py") {
    fixtures::TempDir dir;
    fixtures::write_file(dir.path(), rel, text);
    return build_code_graph(dir.path());
}

}  // namespace

TEST_SUITE("graph") {

TEST_CASE("two-file repository level") {
    fixtures::TempDir dir;
    fixtures::two_file_repo(dir.path());
    const auto repo = build_repo_level(dir.path());
    const auto types = nodes_by_graph_type(repo.fragment);
    std::size_t folders = 0, files = 0;
    for (const auto& [id, n] : repo.fragment.nodes()) {
        folders += n.node_type == NodeType::Folder;
        files += n.node_type == NodeType::File;
    }
    CHECK(folders == 2);
    CHECK(files == 2);
    auto edges = edges_by_type(repo.fragment);
    CHECK(edges.at(EdgeType::Contains) == 3);
    CHECK(edges.at(EdgeType::Imports) == 1);
}

TEST_CASE("single file without imports") {
    fixtures::TempDir dir;
    fixtures::write_file(dir.path(), "only.py", "x = 1\n");
    const auto repo = build_repo_level(dir.path());
    CHECK(repo.fragment.node_count() == 2);
    auto edges = edges_by_type(repo.fragment);
    CHECK(edges[EdgeType::Contains] == 1);
    CHECK(edges[EdgeType::Imports] == 0);
}

TEST_CASE("external imports create no edge") {
    fixtures::TempDir dir;
    fixtures::write_file(dir.path(), "a.py", "import os\nimport json.decoder\nfrom b import thing\n");
    fixtures::write_file(dir.path(), "b.py", "thing = 2\n");
    const auto repo = build_repo_level(dir.path());
    CHECK(edges_by_type(repo.fragment)[EdgeType::Imports] == 1);
}

TEST_CASE("unreadable root and empty corpus") {
    CHECK_THROWS_AS(build_repo_level("/nonexistent/repograph/root"), IoError);
    fixtures::TempDir dir;
    fixtures::write_file(dir.path(), "README.md", "nothing\n");
    CHECK_THROWS_AS(build_repo_level(dir.path()), EmptyCorpusError);
}

TEST_CASE("direct call and inheritance") {
    const auto r = build_source("def f():\n    g()\n\n\ndef g():\n    pass\n\n\nclass A:\n    pass\n\n\nclass B(A):\n    pass\n");
    const auto* f = function_named(r.graph, "f");
    const auto* g = function_named(r.graph, "g");
    REQUIRE(f);
    REQUIRE(g);
    CHECK(has_edge(r.graph, f->id, g->id, EdgeType::Calls));
    NodeId a, b;
    for (const auto& [id, n] : r.graph.nodes()) {
        if (n.node_type == NodeType::Class && n.name == "A") a = id;
        if (n.node_type == NodeType::Class && n.name == "B") b = id;
    }
    CHECK(has_edge(r.graph, b, a, EdgeType::Inherits));
}

TEST_CASE("dynamic callee gives a diagnostic and no edge") {
    const auto r = build_source("def f(name):\n    return globals()[name]()\n");
    CHECK(edges_by_type(r.graph)[EdgeType::Calls] == 0);
    const auto dynamic = std::count_if(r.diagnostics.begin(), r.diagnostics.end(),
                                       [](const Diagnostic& d) { return d.kind == "dynamic_call"; });
    CHECK(dynamic == 1);
}

TEST_CASE("identity one-liner") {
    const auto r = build_source("def f(x):\n    return x\n");
    auto edges = edges_by_type(r.graph);
    CHECK(edges[EdgeType::Defines] == 1);
    CHECK(edges[EdgeType::Uses] == 1);
    CHECK(edges[EdgeType::DataFlow] == 1);
    CHECK(edges[EdgeType::ControlFlow] == 2);
    CHECK(nodes_by_graph_type(r.graph)[GraphType::Cfg] == 3);
    // FunctionDef -> Return -> Name
    CHECK(edges[EdgeType::AstChild] == 3);
}

TEST_CASE("cyclomatic complexity of one branch") {
    const auto r = build_source("def f(x):\n    if x:\n        y = 1\n    else:\n        y = 2\n    return y\n");
    CHECK(function_named(r.graph, "f")->structural_features.cyclomatic_complexity == 2);
    CHECK(function_named(r.graph, "f")->structural_features.nesting_depth == 1);
}

TEST_CASE("empty body") {
    const auto r = build_source("def f():\n    pass\n");
    CHECK(nodes_by_graph_type(r.graph)[GraphType::Cfg] == 2);
    CHECK(edges_by_type(r.graph)[EdgeType::ControlFlow] == 1);
    CHECK(nodes_by_graph_type(r.graph)[GraphType::Dfg] == 0);
    CHECK(function_named(r.graph, "f")->structural_features.cyclomatic_complexity == 1);
}

TEST_CASE("syntax errors skip the file only") {
    fixtures::TempDir dir;
    fixtures::write_file(dir.path(), "bad.py", "def broken(:\n    pass\n");
    fixtures::write_file(dir.path(), "good.py", "def ok():\n    return 1\n");
    const auto r = build_code_graph(dir.path());
    CHECK(function_named(r.graph, "ok") != nullptr);
    CHECK(std::any_of(r.diagnostics.begin(), r.diagnostics.end(),
                      [](const Diagnostic& d) { return d.kind == "syntax_error" && d.file_path == "bad.py"; }));
}

TEST_CASE("ten-file fixture counts") {
    fixtures::TempDir dir;
    fixtures::ten_file_repo(dir.path());
    const auto r = build_code_graph(dir.path());
    const auto nodes = nodes_by_graph_type(r.graph);
    CHECK(nodes.at(GraphType::FolderStructure) == 13);
    CHECK(nodes.at(GraphType::CallGraph) == 9);
    CHECK(nodes.at(GraphType::ClassInheritance) == 2);
    CHECK(nodes.at(GraphType::TypeDep) == 3);
    CHECK(nodes.at(GraphType::Ast) == 46);
    CHECK(nodes.at(GraphType::Cfg) == 25);
    CHECK(nodes.at(GraphType::Dfg) == 22);
    CHECK(nodes.count(GraphType::CrossFileDep) == 0);
    auto edges = edges_by_type(r.graph);
    CHECK(edges.at(EdgeType::Contains) == 12);
    CHECK(edges.at(EdgeType::Imports) == 5);
    CHECK(edges.at(EdgeType::Calls) == 3);
    CHECK(edges.at(EdgeType::Implements) == 1);
    CHECK(edges.count(EdgeType::Inherits) == 0);
    CHECK(edges.at(EdgeType::TypeUses) == 1);
    CHECK(edges.at(EdgeType::AstChild) == 37);
    CHECK(edges.at(EdgeType::ControlFlow) == 16);
    CHECK(edges.at(EdgeType::Defines) == 8);
    CHECK(edges.at(EdgeType::Uses) == 6);
    CHECK(edges.at(EdgeType::DataFlow) == 6);
    CHECK(edges.at(EdgeType::DeclaresFunction) == 9);
    CHECK(edges.at(EdgeType::AnchorsAst) == 9);
    CHECK(edges.at(EdgeType::TypeReference) == 1);
    CHECK(edges.at(EdgeType::InterfaceInheritance) == 1);
    CHECK(edges.at(EdgeType::AstToCfg) == 16);
    CHECK(edges.at(EdgeType::CfgToDfg) == 14);
    CHECK(edges.at(EdgeType::TypeAlignsDataflow) == 1);
    CHECK(r.graph.edge_count() == 146);
    CHECK(r.calls.call_sites == 4);
    CHECK(r.calls.resolved_sites == 3);
    CHECK(r.diagnostics.size() == 1);
}

TEST_CASE("ten-file fixture invariants") {
    fixtures::TempDir dir;
    fixtures::ten_file_repo(dir.path());
    const auto r = build_code_graph(dir.path());
    CHECK(r.graph.validate().empty());
    CHECK(r.graph.node_type_set().size() == 10);

    // DeclaresFunction: one per Function, AnchorsAst: one out per Function.
    std::map<NodeId, int> declares, anchors;
    for (const auto& e : r.graph.edges()) {
        if (e.edge_type == EdgeType::DeclaresFunction) ++declares[e.dst];
        if (e.edge_type == EdgeType::AnchorsAst) ++anchors[e.src];
    }
    for (const auto& [id, n] : r.graph.nodes()) {
        if (n.node_type != NodeType::Function) continue;
        CHECK(declares[id] == 1);
        CHECK(anchors[id] == 1);
    }
    // Zero classes would mean zero InterfaceInheritance; here exactly the one cross-file base.
    // Conservation: every call site yields an edge or a diagnostic.
    CHECK(r.calls.resolved_sites + r.calls.unresolved_sites == r.calls.call_sites);
}

TEST_CASE("determinism across runs and scheduling") {
    fixtures::TempDir dir;
    fixtures::ten_file_repo(dir.path());
    BuildOptions serial;
    serial.parallel = false;
    const auto a = build_code_graph(dir.path());
    const auto b = build_code_graph(dir.path(), serial);
    CHECK(a.graph == b.graph);
    std::ostringstream sa, sb;
    write_graph(a.graph, sa);
    write_graph(b.graph, sb);
    CHECK(sa.str() == sb.str());
}

TEST_CASE("zero classes means zero interface inheritance") {
    const auto r = build_source("def f():\n    return 1\n");
    CHECK(edges_by_type(r.graph)[EdgeType::InterfaceInheritance] == 0);
}

TEST_CASE("ast-only build keeps the syntactic skeleton") {
    fixtures::TempDir dir;
    fixtures::ten_file_repo(dir.path());
    BuildOptions opts;
    opts.ast_only = true;
    const auto r = build_code_graph(dir.path(), opts);
    const auto nodes = nodes_by_graph_type(r.graph);
    CHECK(nodes.count(GraphType::Cfg) == 0);
    CHECK(nodes.count(GraphType::Dfg) == 0);
    CHECK(nodes.at(GraphType::Ast) == 46);
    CHECK(edges_by_type(r.graph).count(EdgeType::Calls) == 0);
}

}

TEST_SUITE("graph") {

TEST_CASE("per-function tree and single entry/exit on branchy code") {
    const auto r = build_source(
        "def f(xs):\n"
        "    total = 0\n"
        "    for x in xs:\n"
        "        if x < 0:\n"
        "            continue\n"
        "        elif x > 10:\n"
        "            break\n"
        "        try:\n"
        "            total += 1 / x\n"
        "        except ZeroDivisionError as e:\n"
        "            raise ValueError(e)\n"
        "        finally:\n"
        "            total -= 0\n"
        "    while total > 100:\n"
        "        total //= 2\n"
        "    else:\n"
        "        total += 1\n"
        "    return total\n"
        "\n\n"
        "def g():\n"
        "    def inner(y):\n"
        "        return y\n"
        "    with open('f') as fh:\n"
        "        return inner(fh)\n");
    const auto failures = fixtures::function_invariant_failures(r.graph);
    for (const auto& f : failures) MESSAGE(f);
    CHECK(failures.empty());
    CHECK(r.graph.validate().empty());
}

}
