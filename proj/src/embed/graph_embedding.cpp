#include <algorithm>
#include <cctype>
#include <set>
#include <unordered_map>

#include "repograph/core/hash.hpp"
#include "repograph/embed/embedder.hpp"

namespace repograph {

Matrix undirected_adjacency(const CodeGraph& g, const std::vector<NodeId>& order) {
    std::unordered_map<NodeId, std::size_t, NodeIdHash> index;
    for (std::size_t i = 0; i < order.size(); ++i) index.emplace(order[i], i);
    Matrix a(order.size(), order.size());
    for (const auto& e : g.edges()) {
        const auto s = index.find(e.src);
        const auto d = index.find(e.dst);
        if (s == index.end() || d == index.end() || s->second == d->second) continue;
        a(s->second, d->second) = 1.0;
        a(d->second, s->second) = 1.0;
    }
    return a;
}

std::string node_embedding_text(const GraphNode& n) {
    const bool blank = std::all_of(n.code_text.begin(), n.code_text.end(),
                                   [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
    if (!blank) return n.code_text;
    return n.kind + " " + n.name;
}

std::vector<const std::vector<float>*> NodeVectorCache::lookup(const std::vector<const GraphNode*>& nodes) {
    std::vector<std::string> texts(nodes.size());
    std::vector<std::string> digests(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        texts[i] = node_embedding_text(*nodes[i]);
        digests[i] = sha256_hex(texts[i]);
    }
    std::vector<std::string> missing_texts;
    std::vector<std::string> missing_digests;
    {
        std::lock_guard lock(mu_);
        std::set<std::string> queued;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            if (by_digest_.count(digests[i]) || !queued.insert(digests[i]).second) continue;
            missing_texts.push_back(texts[i]);
            missing_digests.push_back(digests[i]);
        }
    }
    if (!missing_texts.empty()) {
        auto vectors = embedder_.embed_batch(missing_texts);
        std::lock_guard lock(mu_);
        for (std::size_t i = 0; i < vectors.size(); ++i) {
            by_digest_.emplace(missing_digests[i], std::move(vectors[i].values));
        }
    }
    std::vector<const std::vector<float>*> out(nodes.size());
    std::lock_guard lock(mu_);
    for (std::size_t i = 0; i < nodes.size(); ++i) out[i] = &by_digest_.at(digests[i]);
    return out;
}

StructuralEmbedding embed_graph(const CodeGraph& g, const TextEmbedder& embedder, std::size_t d2,
                                NodeVectorCache* cache) {
    StructuralEmbedding out;
    std::vector<const GraphNode*> nodes;
    for (const auto& [id, n] : g.nodes()) {
        out.node_order.push_back(id);
        nodes.push_back(&n);
    }
    const std::size_t n = nodes.size();
    const std::size_t ds = embedder.dim();
    out.node_vectors = Matrix(n, ds + d2);
    out.pooled.assign(ds + d2, 0.0);
    if (n == 0) return out;

    std::optional<NodeVectorCache> local;
    if (!cache) cache = &local.emplace(embedder);
    const auto vectors = cache->lookup(nodes);
    const auto pe = laplacian_pe(undirected_adjacency(g, out.node_order), d2);
    for (std::size_t i = 0; i < n; ++i) {
        auto row = out.node_vectors.row(i);
        std::copy(vectors[i]->begin(), vectors[i]->end(), row.begin());
        for (std::size_t c = 0; c < d2; ++c) row[ds + c] = pe(i, c);
    }
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = out.node_vectors.row(i);
        for (std::size_t c = 0; c < row.size(); ++c) out.pooled[c] += row[c];
    }
    for (auto& v : out.pooled) v /= static_cast<double>(n);
    return out;
}

}  // namespace repograph
