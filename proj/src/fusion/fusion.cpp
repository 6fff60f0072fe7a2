#include <algorithm>
#include <cctype>
#include <cmath>
#include <tuple>
#include <unordered_map>

#include "repograph/core/hash.hpp"
#include "repograph/fusion/fusion.hpp"

namespace repograph {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::string normalize_whitespace(std::string_view s) {
    std::string out;
    bool space = false;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            space = !out.empty();
            continue;
        }
        if (space) out.push_back(' ');
        space = false;
        out.push_back(c);
    }
    return out;
}

using EdgeKey = std::tuple<NodeId, NodeId, EdgeType, std::optional<std::string>>;

/// Keeps one edge per (src, dst, type, context), with the largest weight.
void add_unique(std::map<EdgeKey, GraphEdge>& edges, GraphEdge e) {
    EdgeKey key{e.src, e.dst, e.edge_type, e.context};
    auto [it, fresh] = edges.try_emplace(std::move(key), e);
    if (!fresh) it->second.weight = std::max(it->second.weight, e.weight);
}

}  // namespace

Matrix encoder_weights(std::size_t in, std::size_t out, std::uint64_t seed) {
    Matrix w(in, out);
    const double bound = in == 0 ? 0.0 : std::sqrt(3.0 / static_cast<double>(in));
    std::uint64_t state = seed;
    for (auto& x : w.data) {
        const double u = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
        x = (2.0 * u - 1.0) * bound;
    }
    return w;
}

kernels::Neighbors neighbors_of(const CodeGraph& g, const std::vector<NodeId>& order) {
    std::unordered_map<NodeId, std::size_t, NodeIdHash> index;
    for (std::size_t i = 0; i < order.size(); ++i) index.emplace(order[i], i);
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (const auto& e : g.edges()) {
        const auto s = index.find(e.src);
        const auto d = index.find(e.dst);
        if (s == index.end() || d == index.end() || s->second == d->second) continue;
        pairs.emplace_back(s->second, d->second);
    }
    return kernels::Neighbors::from_pairs(order.size(), pairs);
}

Matrix encode_nodes(const kernels::Neighbors& adj, const Matrix& features, const FusionConfig& cfg) {
    Matrix h = features;
    for (std::size_t layer = 0; layer < cfg.gnn_layers; ++layer) {
        const auto out = cfg.hidden_dim == 0 ? h.cols : cfg.hidden_dim;
        const auto w = encoder_weights(h.cols, out, cfg.seed + 0x9E3779B97F4A7C15ULL * layer);
        h = kernels::gnn_layer(adj, h, w, cfg.exec);
    }
    return h;
}

Matrix encode_graph(const CodeGraph& g, const TextEmbedder& embedder, const FusionConfig& cfg,
                    NodeVectorCache* cache) {
    const auto emb = embed_graph(g, embedder, cfg.pe_dim, cache);
    return encode_nodes(neighbors_of(g, emb.node_order), emb.node_vectors, cfg);
}

std::vector<double> softmax(const std::vector<double>& scores) {
    std::vector<double> w(scores.size());
    if (scores.empty()) return w;
    const double peak = *std::max_element(scores.begin(), scores.end());
    double sum = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) sum += (w[i] = std::exp(scores[i] - peak));
    for (auto& x : w) x /= sum;
    return w;
}

AggregatedRetrieval aggregate_retrieved(const std::vector<Matrix>& hs, const std::vector<double>& scores) {
    if (hs.size() != scores.size()) throw std::invalid_argument("aggregate_retrieved: one score per graph");
    AggregatedRetrieval out;
    out.weights = softmax(scores);
    std::size_t rows = 0;
    std::size_t cols = 0;
    out.offsets.push_back(0);
    for (const auto& h : hs) {
        if (h.rows > 0) {
            if (cols != 0 && h.cols != cols) throw std::invalid_argument("aggregate_retrieved: column mismatch");
            cols = h.cols;
        }
        rows += h.rows;
        out.offsets.push_back(rows);
    }
    out.h_r = Matrix(rows, cols);
    for (std::size_t i = 0; i < hs.size(); ++i) {
        for (std::size_t r = 0; r < hs[i].rows; ++r) {
            const auto src = hs[i].row(r);
            auto dst = out.h_r.row(out.offsets[i] + r);
            for (std::size_t c = 0; c < cols; ++c) dst[c] = src[c] * out.weights[i];
        }
    }
    return out;
}

bool type_compatible(const GraphNode& q, const GraphNode& r) {
    auto is_call = [](const GraphNode& n) { return n.node_type == NodeType::Expression && n.kind == "ast.Call"; };
    if (q.node_type == NodeType::Function && r.node_type == NodeType::Function) return true;
    if ((is_call(q) && r.node_type == NodeType::Function) || (q.node_type == NodeType::Function && is_call(r))) {
        return true;
    }
    if (q.node_type == NodeType::Variable && r.node_type == NodeType::Variable) {
        return q.semantic_type && r.semantic_type && *q.semantic_type == *r.semantic_type;
    }
    if (q.node_type == NodeType::Class && r.node_type == NodeType::Class) return true;
    return q.node_type == NodeType::TypeDef && r.node_type == NodeType::TypeDef;
}

std::optional<std::string> merge_key(const GraphNode& n) {
    switch (n.node_type) {
        case NodeType::Function:
        case NodeType::Class:
        case NodeType::TypeDef:
        case NodeType::Variable:
            break;
        default:
            return std::nullopt;
    }
    std::string key(to_string(n.node_type));
    key.push_back('\0');
    if (n.semantic_type) key += "1" + *n.semantic_type;
    key.push_back('\0');
    key += sha256_hex(normalize_whitespace(n.code_text));
    return key;
}

FusedGraph build_fused_graph(const CodeGraph& query, const std::vector<RetrievedGraph>& retrieved,
                             const Matrix& attention, const std::vector<NodeId>& query_order,
                             const std::vector<NodeId>& retrieved_order, double theta) {
    if (attention.rows != query_order.size() || attention.cols != retrieved_order.size()) {
        throw std::invalid_argument("build_fused_graph: attention shape does not match node orders");
    }
    FusedGraph fg;
    std::map<NodeId, const GraphNode*> nodes;
    for (const auto& [id, n] : query.nodes()) {
        nodes.emplace(id, &n);
        fg.provenance.emplace(id, NodeProvenance{true, 0});
    }
    for (const auto& rg : retrieved) {
        for (const auto& [id, n] : rg.graph.nodes()) {
            if (nodes.emplace(id, &n).second) fg.provenance.emplace(id, NodeProvenance{false, rg.subgraph_id});
        }
    }

    std::map<std::string, NodeId> representative;
    for (const auto& [id, n] : nodes) {
        if (fg.provenance.at(id).from_query) continue;
        if (auto key = merge_key(*n)) {
            auto [it, fresh] = representative.try_emplace(std::move(*key), id);
            if (!fresh) fg.merged_into.emplace(id, it->second);  // ids ascend, so the first is the smallest
        }
    }
    auto home = [&](const NodeId& id) {
        const auto it = fg.merged_into.find(id);
        return it == fg.merged_into.end() ? id : it->second;
    };

    fg.graph.repo_name = query.repo_name;
    for (const auto& [id, n] : nodes) {
        if (!fg.merged_into.count(id)) fg.graph.add_node(*n);
    }
    for (const auto& [dup, rep] : fg.merged_into) fg.provenance.erase(dup);

    std::map<EdgeKey, GraphEdge> edges;
    for (const auto& e : query.edges()) add_unique(edges, e);
    for (const auto& rg : retrieved) {
        for (auto e : rg.graph.edges()) {
            e.src = home(e.src);
            e.dst = home(e.dst);
            add_unique(edges, std::move(e));
        }
    }
    std::map<EdgeKey, GraphEdge> cross;
    for (std::size_t i = 0; i < attention.rows; ++i) {
        const auto* qn = fg.graph.find(query_order[i]);
        if (!qn) continue;
        for (std::size_t j = 0; j < attention.cols; ++j) {
            const double a = attention(i, j);
            if (!(a > theta)) continue;
            const auto* rn = fg.graph.find(home(retrieved_order[j]));
            if (!rn || !type_compatible(*qn, *rn)) continue;
            add_unique(cross, {qn->id, rn->id, EdgeType::CrossGraphFusion, a, std::nullopt});
        }
    }
    for (auto& [k, e] : edges) fg.graph.add_edge(std::move(e));
    for (auto& [k, e] : cross) {
        fg.cross_edges.push_back(e);
        fg.graph.add_edge(std::move(e));
    }
    fg.graph.canonicalize();
    std::sort(fg.cross_edges.begin(), fg.cross_edges.end(), edge_less);
    return fg;
}

FusionResult fuse(const CodeGraph& query, const std::vector<RetrievedGraph>& retrieved,
                  const TextEmbedder& embedder, const FusionConfig& cfg, NodeVectorCache* cache) {
    std::optional<NodeVectorCache> local;
    if (!cache) cache = &local.emplace(embedder);
    FusionResult out;
    for (const auto& [id, n] : query.nodes()) out.query_order.push_back(id);
    const auto h_q = encode_graph(query, embedder, cfg, cache);

    std::vector<Matrix> hs(retrieved.size());
    std::vector<double> scores;
    for (const auto& rg : retrieved) {
        scores.push_back(rg.score);
        for (const auto& [id, n] : rg.graph.nodes()) out.retrieved_order.push_back(id);
    }
    const auto k = static_cast<std::ptrdiff_t>(retrieved.size());
#pragma omp parallel for schedule(dynamic) if (cfg.exec == kernels::Exec::Parallel)
    for (std::ptrdiff_t i = 0; i < k; ++i) hs[i] = encode_graph(retrieved[i].graph, embedder, cfg, cache);

    auto agg = aggregate_retrieved(hs, scores);
    out.weights = agg.weights;
    if (agg.h_r.rows == 0) agg.h_r = Matrix(0, h_q.cols);
    out.attention = kernels::cross_attention(h_q, agg.h_r, cfg.exec);
    out.fused = build_fused_graph(query, retrieved, out.attention, out.query_order, out.retrieved_order, cfg.theta);
    return out;
}

nlohmann::json fusion_dump(const FusionResult& r, double theta) {
    nlohmann::json j;
    j["theta"] = theta;
    j["weights"] = r.weights;
    auto ids = [](const std::vector<NodeId>& v) {
        nlohmann::json a = nlohmann::json::array();
        for (const auto& id : v) a.push_back(id.hex());
        return a;
    };
    j["query_nodes"] = ids(r.query_order);
    j["retrieved_nodes"] = ids(r.retrieved_order);
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < r.attention.rows; ++i) {
        const auto row = r.attention.row(i);
        rows.push_back(std::vector<double>(row.begin(), row.end()));
    }
    j["attention"] = std::move(rows);
    nlohmann::json cross = nlohmann::json::array();
    for (const auto& e : r.fused.cross_edges) cross.push_back({{"src", e.src.hex()}, {"dst", e.dst.hex()}, {"weight", e.weight}});
    j["cross_edges"] = std::move(cross);
    j["merged"] = r.fused.merged_into.size();
    return j;
}

}  // namespace repograph
