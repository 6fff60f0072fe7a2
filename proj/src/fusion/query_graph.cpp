#include <algorithm>

#include "repograph/core/errors.hpp"
#include "repograph/fusion/fusion.hpp"
#include "repograph/graph/builder.hpp"

namespace repograph {

namespace {

using syntax::NodeIndex;
using syntax::SyntaxKind;

/// Indentation for a statement following `head`.
std::string hole_indent(std::string_view head) {
    std::size_t end = head.size();
    while (end > 0) {
        const auto nl = end >= 2 ? head.rfind('\n', end - 2) : std::string_view::npos;
        const auto start = nl == std::string_view::npos ? 0 : nl + 1;
        const auto line = head.substr(start, end - start);
        const auto first = line.find_first_not_of(" \t\r\n");
        if (first != std::string_view::npos && line[first] != '#') {
            std::string indent(line.substr(0, first));
            if (line[line.find_last_not_of(" \t\r\n")] == ':') indent += "    ";
            return indent;
        }
        end = start;
    }
    return "";
}

struct ParsedPrefix {
    syntax::SyntaxTree tree;
    std::size_t hole = 0;  // offset of the placeholder, or of the end of the parsed text
};

std::optional<ParsedPrefix> parse_prefix(std::string_view prefix, const LanguageFrontend& frontend) {
    std::string head(prefix.substr(0, prefix.rfind('\n') == std::string_view::npos ? 0 : prefix.rfind('\n') + 1));
    for (int attempt = 0; attempt < 64; ++attempt) {
        const auto indent = hole_indent(head);
        try {
            auto tree = frontend.parse(head + indent + "pass\n");
            return ParsedPrefix{std::move(tree), head.size() + indent.size()};
        } catch (const syntax::SyntaxError&) {
        }
        try {
            auto tree = frontend.parse(head);
            return ParsedPrefix{std::move(tree), head.size()};
        } catch (const syntax::SyntaxError&) {
        }
        if (head.empty()) break;
        // drop the last line and retry
        const auto cut = head.size() >= 2 ? head.rfind('\n', head.size() - 2) : std::string::npos;
        head.resize(cut == std::string::npos ? 0 : cut + 1);
    }
    return std::nullopt;
}

std::string trailing_lines(std::string_view text, std::size_t n) {
    std::size_t pos = text.size();
    for (std::size_t i = 0; i <= n && pos > 0; ++i) {
        const auto nl = text.rfind('\n', pos - 1);
        if (nl == std::string_view::npos) return std::string(text);
        if (i < n) pos = nl;
    }
    return std::string(text.substr(pos == text.size() ? 0 : pos + 1));
}

}  // namespace

std::size_t cursor_offset(std::string_view source, std::uint32_t line, std::uint32_t col) {
    if (line == 0 || col == 0) throw CursorError("cursor positions are 1-based");
    std::size_t begin = 0;
    for (std::uint32_t l = 1; l < line; ++l) {
        const auto nl = source.find('\n', begin);
        if (nl == std::string_view::npos) {
            throw CursorError("line " + std::to_string(line) + " is past the end of the file");
        }
        begin = nl + 1;
    }
    auto end = source.find('\n', begin);
    if (end == std::string_view::npos) end = source.size();
    if (begin == source.size() && line > 1 && col == 1) return begin;
    if (col - 1 > end - begin) throw CursorError("column " + std::to_string(col) + " is past the end of line " + std::to_string(line));
    return begin + col - 1;
}

QueryGraph build_query_graph(const QueryContext& ctx, const QueryGraphOptions& options,
                             const LanguageFrontend& frontend) {
    const auto offset = cursor_offset(ctx.source, ctx.line, ctx.col);
    QueryGraph q;
    q.prefix = ctx.source.substr(0, offset);
    q.graph.repo_name = ctx.repo_name;
    const std::string ns = "query:" + ctx.file_path;
    const auto file_path = ctx.file_path.empty() ? std::string("<query>") : ctx.file_path;

    auto parsed = parse_prefix(q.prefix, frontend);
    if (!parsed) {
        // nothing parses: a single opaque fragment stands for the context
        GraphNode n;
        n.id = NodeId::derive(ns, "ast.Fragment", 0, offset);
        n.kind = "ast.Fragment";
        n.code_text = trailing_lines(q.prefix, options.module_snippet_lines);
        n.file_path = file_path;
        const auto lines = static_cast<std::uint32_t>(std::count(q.prefix.begin(), q.prefix.end(), '\n'));
        n.line_span = {1, std::max<std::uint32_t>(1, lines)};
        q.cursor_anchor = n.id;
        q.snippet = n.code_text;
        q.graph.add_node(std::move(n));
        return q;
    }
    const auto& tree = parsed->tree;

    NodeIndex def = syntax::kNone;
    for (std::size_t i = 0; i < tree.size(); ++i) {
        const auto& n = tree.at(static_cast<NodeIndex>(i));
        if (n.kind != SyntaxKind::FunctionDef || !n.span.contains(parsed->hole)) continue;
        if (def == syntax::kNone || n.span.begin > tree.at(def).span.begin) def = static_cast<NodeIndex>(i);
    }
    const NodeIndex root = def == syntax::kNone ? tree.root() : def;

    FunctionLevelOptions fopts;
    fopts.emit_cfg = false;
    fopts.emit_dfg = !options.ast_only;
    fopts.emit_variables = !options.ast_only;
    std::optional<NodeId> fn_id;
    if (def != syntax::kNone) {
        const auto& d = tree.at(def);
        fn_id = NodeId::derive(ns, "function", d.span.begin, d.span.end);
    }
    auto frag = build_function_level(tree, root, ns, file_path, fn_id.value_or(NodeId{}), fopts);
    q.graph.merge(frag.graph);
    for (const auto& e : frag.cross_edges) {
        if (q.graph.contains(e.src) && q.graph.contains(e.dst)) q.graph.add_edge(e);
    }

    if (def != syntax::kNone) {
        const auto& d = tree.at(def);
        q.snippet = q.prefix.substr(d.span.begin);
        GraphNode f;
        f.id = *fn_id;
        f.node_type = NodeType::Function;
        f.graph_type = GraphType::CallGraph;
        f.kind = tree.at(d.parent).kind == SyntaxKind::ClassDef ? "method" : "function";
        f.name = d.name;
        f.code_text = q.snippet;
        f.file_path = file_path;
        f.line_span = {d.span.line_begin, std::max(d.span.line_begin, ctx.line)};
        f.semantic_type = function_signature(tree, def);
        f.structural_features = frag.features;
        q.graph.add_node(std::move(f));
        q.graph.add_edge({*fn_id, frag.ast_root, EdgeType::AnchorsAst, 1.0, std::nullopt});
        q.function_id = fn_id;
    } else {
        q.snippet = trailing_lines(q.prefix, options.module_snippet_lines);
    }

    const auto at = tree.innermost_at(parsed->hole);
    q.cursor_anchor = frag.ast_root;
    if (at != syntax::kNone) {
        const auto& s = tree.at(at).span;
        const auto id = NodeId::derive(ns, std::string("ast.") + syntax::kind_name(tree.at(at).kind), s.begin, s.end);
        if (q.graph.contains(id)) q.cursor_anchor = id;
    }
    q.graph.canonicalize();
    return q;
}

}  // namespace repograph
