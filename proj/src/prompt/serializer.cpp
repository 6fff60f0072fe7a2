#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <tuple>

#include "repograph/prompt/prompt.hpp"

namespace repograph {

namespace {

std::string one_line(std::string_view s) {
    std::string out;
    bool space = false;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            space = !out.empty();
            continue;
        }
        if (space) out.push_back(' ');
        space = false;
        out.push_back(c == '`' ? '\'' : c);
    }
    return out;
}

/// First n bytes without splitting a UTF-8 sequence.
std::string_view utf8_prefix(std::string_view s, std::size_t n) {
    if (s.size() <= n) return s;
    while (n > 0 && (static_cast<unsigned char>(s[n]) & 0xC0) == 0x80) --n;
    return s.substr(0, n);
}

}  // namespace

std::size_t TokenCounter::words(std::string_view text) {
    std::size_t n = 0;
    bool in_word = false;
    for (char c : text) {
        const bool space = std::isspace(static_cast<unsigned char>(c));
        if (!space && !in_word) ++n;
        in_word = !space;
    }
    return n;
}

std::size_t TokenCounter::max_words(double budget) const {
    if (budget <= 0 || tokens_per_word <= 0) return 0;
    auto n = static_cast<std::size_t>(std::floor(budget / tokens_per_word));
    while (n > 0 && static_cast<double>(n) * tokens_per_word > budget) --n;
    return n;
}

std::string GraphTriple::render() const {
    std::string s = subject + " — " + predicate + " → " + object;
    if (weight) {
        char buf[48];
        std::snprintf(buf, sizeof buf, " (w=%.2f)", *weight);
        s += buf;
    }
    return s;
}

std::string_view predicate_text(EdgeType t) {
    switch (t) {
        case EdgeType::Contains: return "contains";
        case EdgeType::Imports: return "imports";
        case EdgeType::Calls: return "calls";
        case EdgeType::TypeUses: return "uses type";
        case EdgeType::Inherits: return "inherits from";
        case EdgeType::Implements: return "implements";
        case EdgeType::AstChild: return "has child";
        case EdgeType::ControlFlow: return "flows to";
        case EdgeType::DataFlow: return "passes data to";
        case EdgeType::Defines: return "defines";
        case EdgeType::Uses: return "uses";
        case EdgeType::DeclaresFunction: return "declares";
        case EdgeType::TypeReference: return "references type";
        case EdgeType::InterfaceInheritance: return "inherits interface";
        case EdgeType::AnchorsAst: return "has syntax tree";
        case EdgeType::TypeAlignsDataflow: return "is typed as value";
        case EdgeType::AstToCfg: return "maps to block";
        case EdgeType::CfgToDfg: return "evaluates";
        case EdgeType::CrossGraphFusion: return "relates to";
    }
    return "relates to";
}

std::string node_description(const GraphNode& n) {
    const auto label = n.semantic_type ? one_line(*n.semantic_type) : one_line(utf8_prefix(one_line(n.code_text), 40));
    return std::string(to_string(n.node_type)) + " `" + label + "` [id:" + n.id.short_hex() + "]";
}

int edge_priority(EdgeType t) {
    switch (t) {
        case EdgeType::CrossGraphFusion: return 0;
        case EdgeType::Calls:
        case EdgeType::Inherits: return 1;
        case EdgeType::DataFlow:
        case EdgeType::ControlFlow: return 2;
        case EdgeType::AstChild: return 3;
        default: return 4;
    }
}

std::string omission_line(std::size_t omitted) {
    return "... (" + std::to_string(omitted) + " more edges omitted)";
}

std::vector<std::string> SerializedGraph::lines() const {
    std::vector<std::string> out;
    for (const auto& t : triples) out.push_back(t.render());
    if (omitted > 0) out.push_back(omission_line(omitted));
    return out;
}

SerializedGraph serialize_graph(const CodeGraph& g, double budget, const TokenCounter& counter) {
    std::vector<const GraphEdge*> edges;
    for (const auto& e : g.edges()) {
        if (g.contains(e.src) && g.contains(e.dst)) edges.push_back(&e);
    }
    std::sort(edges.begin(), edges.end(), [](const GraphEdge* a, const GraphEdge* b) {
        const int pa = edge_priority(a->edge_type);
        const int pb = edge_priority(b->edge_type);
        if (pa != pb) return pa < pb;
        if (a->weight != b->weight) return a->weight > b->weight;
        return edge_less(*a, *b);
    });
    SerializedGraph out;
    std::vector<double> cost;
    double used = 0;
    for (const auto* e : edges) {
        GraphTriple t{node_description(*g.find(e->src)), std::string(predicate_text(e->edge_type)),
                      node_description(*g.find(e->dst)), e->weight};
        const double c = counter.count(t.render());
        if (used + c > budget) break;
        used += c;
        cost.push_back(c);
        out.triples.push_back(std::move(t));
    }
    out.omitted = edges.size() - out.triples.size();
    if (out.omitted > 0) {
        // make room for the omission line itself
        while (!out.triples.empty() && used + counter.count(omission_line(out.omitted)) > budget) {
            used -= cost.back();
            cost.pop_back();
            out.triples.pop_back();
            ++out.omitted;
        }
    }
    return out;
}

}  // namespace repograph
