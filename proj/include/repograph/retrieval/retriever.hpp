#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <set>
#include <span>
#include <string_view>
#include <vector>

#include "repograph/index/index.hpp"

namespace repograph {

enum class Origin { Semantic, Structural, Both, Lexical };

std::string_view to_string(Origin o);

struct RetrievedCandidate {
    SubgraphId subgraph_id = 0;
    double sem_sim = 0.0;
    double struct_sim = 0.0;
    double score = 0.0;
    Origin origin = Origin::Semantic;
};

/// Parameters of α = σ(W_α·[v_q; h_Gq] + b_α).
struct AdaptiveWeights {
    std::vector<double> w_alpha;
    double b_alpha = 0.0;
    std::size_t dim = 0;  // must equal w_alpha.size()
};

/// Reads {"w_alpha": [...], "b_alpha": x, "dim": n}. Throws ConfigError on malformed input.
AdaptiveWeights load_adaptive_weights(const std::filesystem::path& path);

struct RerankConfig {
    double alpha = 0.5;                       // used when `adaptive` is empty
    std::optional<AdaptiveWeights> adaptive;
    std::size_t k_s = 10;
    std::size_t k_g = 10;
    std::size_t k = 3;
    double mmr_lambda = 0.7;
    std::set<SubgraphId> exclude;  // never returned, e.g. units of the file being completed
};

/// Throws ConfigError when the weight length differs from dim(v_q) + dim(h_Gq).
double adaptive_alpha(std::span<const float> v_q, std::span<const float> h_gq, const AdaptiveWeights& weights);

double rerank_score(double alpha, double sem_sim, double struct_sim);

/// Greedy maximal marginal relevance. Returns positions into `scores`; the first pick is
/// the best score, each next one maximizes λ·score − (1−λ)·max sim to the picks so far.
/// Ties go to the smaller `ids` entry.
std::vector<std::size_t> mmr_select(const std::vector<double>& scores, const std::vector<SubgraphId>& ids,
                                    const std::function<double(std::size_t, std::size_t)>& sim, double lambda,
                                    std::size_t k);

struct QueryVectors {
    std::vector<float> semantic;    // v_q
    std::vector<float> structural;  // pooled h_Gq
};

struct RetrievalTrace {
    std::vector<SearchHit> semantic_hits;
    std::vector<SearchHit> structural_hits;
    double alpha = 0.5;
    std::vector<RetrievedCandidate> merged;  // before MMR, by descending score
};

/// Both searches, union by subgraph id with the missing similarity computed directly,
/// sorted by descending score then ascending id.
std::vector<RetrievedCandidate> merge_candidates(const QueryVectors& q, const IndexSet& indexes,
                                                 const RerankConfig& cfg, RetrievalTrace* trace = nullptr);

/// merge_candidates followed by MMR selection of at most k.
std::vector<RetrievedCandidate> retrieve(const QueryVectors& q, const IndexSet& indexes, const RerankConfig& cfg,
                                         RetrievalTrace* trace = nullptr);

}  // namespace repograph
