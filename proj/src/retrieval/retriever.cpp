#include "repograph/retrieval/retriever.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <map>

#include <json.hpp>

#include "repograph/core/errors.hpp"
#include "repograph/core/vector_math.hpp"

namespace repograph {

std::string_view to_string(Origin o) {
    switch (o) {
        case Origin::Semantic:
            return "semantic";
        case Origin::Structural:
            return "structural";
        case Origin::Both:
            return "both";
        case Origin::Lexical:
            return "lexical";
    }
    return "semantic";
}

AdaptiveWeights load_adaptive_weights(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read adaptive weight file " + path.string());
    AdaptiveWeights w;
    try {
        const auto j = nlohmann::json::parse(in);
        w.w_alpha = j.at("w_alpha").get<std::vector<double>>();
        w.b_alpha = j.at("b_alpha").get<double>();
        w.dim = j.at("dim").get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("adaptive weight file " + path.string() + ": " + e.what());
    }
    if (w.w_alpha.size() != w.dim) throw ConfigError("adaptive weight file: w_alpha length differs from dim");
    return w;
}

double adaptive_alpha(std::span<const float> v_q, std::span<const float> h_gq, const AdaptiveWeights& weights) {
    if (weights.w_alpha.size() != v_q.size() + h_gq.size()) {
        throw ConfigError("adaptive alpha: weight length " + std::to_string(weights.w_alpha.size()) +
                          " does not match query dimension " + std::to_string(v_q.size() + h_gq.size()));
    }
    double z = weights.b_alpha;
    for (std::size_t i = 0; i < v_q.size(); ++i) z += weights.w_alpha[i] * v_q[i];
    for (std::size_t i = 0; i < h_gq.size(); ++i) z += weights.w_alpha[v_q.size() + i] * h_gq[i];
    return 1.0 / (1.0 + std::exp(-z));
}

double rerank_score(double alpha, double sem_sim, double struct_sim) {
    return alpha * sem_sim + (1.0 - alpha) * struct_sim;
}

std::vector<std::size_t> mmr_select(const std::vector<double>& scores, const std::vector<SubgraphId>& ids,
                                    const std::function<double(std::size_t, std::size_t)>& sim, double lambda,
                                    std::size_t k) {
    const std::size_t n = scores.size();
    std::vector<std::size_t> picked;
    std::vector<bool> taken(n, false);
    std::vector<double> max_sim(n, -INFINITY);
    while (picked.size() < std::min(k, n)) {
        std::optional<std::size_t> best;
        double best_value = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (taken[i]) continue;
            const double value =
                picked.empty() ? scores[i] : lambda * scores[i] - (1.0 - lambda) * max_sim[i];
            if (!best || value > best_value || (value == best_value && ids[i] < ids[*best])) {
                best = i;
                best_value = value;
            }
        }
        taken[*best] = true;
        picked.push_back(*best);
        for (std::size_t i = 0; i < n; ++i) {
            if (!taken[i]) max_sim[i] = std::max(max_sim[i], sim(i, *best));
        }
    }
    return picked;
}

std::vector<RetrievedCandidate> merge_candidates(const QueryVectors& q, const IndexSet& indexes,
                                                 const RerankConfig& cfg, RetrievalTrace* trace) {
    if (indexes.catalog.empty()) return {};
    auto keep = [&](std::vector<SearchHit> hits, std::size_t k) {
        std::erase_if(hits, [&](const SearchHit& h) { return cfg.exclude.count(h.id) != 0; });
        if (hits.size() > k) hits.resize(k);
        return hits;
    };
    const auto extra = cfg.exclude.size();
    auto structural = std::async(std::launch::async, [&] {
        return keep(indexes.structural.search(q.structural, cfg.k_g + extra), cfg.k_g);
    });
    const auto sem_hits = keep(indexes.semantic.search(q.semantic, cfg.k_s + extra), cfg.k_s);
    const auto struct_hits = structural.get();

    const double alpha = cfg.adaptive ? adaptive_alpha(q.semantic, q.structural, *cfg.adaptive) : cfg.alpha;
    std::map<SubgraphId, RetrievedCandidate> by_id;
    for (const auto& h : sem_hits) by_id[h.id] = {h.id, h.score, 0.0, 0.0, Origin::Semantic};
    for (const auto& h : struct_hits) {
        auto [it, fresh] = by_id.try_emplace(h.id, RetrievedCandidate{h.id, 0.0, h.score, 0.0, Origin::Structural});
        if (!fresh) {
            it->second.struct_sim = h.score;
            it->second.origin = Origin::Both;
        }
    }
    std::vector<RetrievedCandidate> merged;
    for (auto& [id, c] : by_id) {
        if (c.origin == Origin::Semantic) {
            if (const auto v = indexes.structural.vector_of(id)) c.struct_sim = cosine(std::span<const float>(q.structural), *v);
        } else if (c.origin == Origin::Structural) {
            if (const auto v = indexes.semantic.vector_of(id)) c.sem_sim = cosine(std::span<const float>(q.semantic), *v);
        }
        c.score = rerank_score(alpha, c.sem_sim, c.struct_sim);
        merged.push_back(c);
    }
    std::sort(merged.begin(), merged.end(), [](const RetrievedCandidate& a, const RetrievedCandidate& b) {
        return a.score != b.score ? a.score > b.score : a.subgraph_id < b.subgraph_id;
    });
    if (trace) {
        trace->semantic_hits = sem_hits;
        trace->structural_hits = struct_hits;
        trace->alpha = alpha;
        trace->merged = merged;
    }
    return merged;
}

std::vector<RetrievedCandidate> retrieve(const QueryVectors& q, const IndexSet& indexes, const RerankConfig& cfg,
                                         RetrievalTrace* trace) {
    const auto merged = merge_candidates(q, indexes, cfg, trace);
    std::vector<double> scores;
    std::vector<SubgraphId> ids;
    std::vector<std::span<const float>> vecs;
    for (const auto& c : merged) {
        scores.push_back(c.score);
        ids.push_back(c.subgraph_id);
        vecs.push_back(indexes.semantic.vector_of(c.subgraph_id).value_or(std::span<const float>{}));
    }
    const auto sim = [&](std::size_t a, std::size_t b) {
        return vecs[a].empty() || vecs[b].empty() ? 0.0 : cosine(vecs[a], vecs[b]);
    };
    std::vector<RetrievedCandidate> out;
    for (auto i : mmr_select(scores, ids, sim, cfg.mmr_lambda, cfg.k)) out.push_back(merged[i]);
    return out;
}

}  // namespace repograph
