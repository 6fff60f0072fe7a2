#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "repograph/core/matrix.hpp"

/// Hot loops of retrieval and fusion. Every kernel has an OpenMP implementation and a
/// plain serial reference; both produce bit-identical results.
namespace repograph::kernels {

enum class Exec { Serial, Parallel };

/// Row-wise softmax(Q Rᵀ / sqrt(d)), d = Q.cols. Throws std::invalid_argument on
/// mismatched inner dimensions.
Matrix cross_attention(const Matrix& q, const Matrix& r, Exec exec = Exec::Parallel);

struct ScoredIndex {
    std::size_t index;
    double score;
};

/// Exact top-k rows of `rows` (row-major, `dim` columns) by cosine to `query`,
/// ordered by descending score then ascending index.
std::vector<ScoredIndex> topk_cosine(std::span<const float> query, std::span<const float> rows,
                                     std::size_t dim, std::size_t k, Exec exec = Exec::Parallel);

/// Compressed neighbor lists of an undirected graph.
struct Neighbors {
    std::vector<std::size_t> offsets;  // size n + 1
    std::vector<std::size_t> targets;

    std::size_t size() const { return offsets.empty() ? 0 : offsets.size() - 1; }
    static Neighbors from_pairs(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges);
};

/// One encoder round: out_v = φ(m_v W) where m_v is the mean of v's neighbour rows, with a node's own row
/// standing in for the mean when it has no neighbours. φ applies tanh and rescales
/// the row to Euclidean norm sqrt(cols).
Matrix gnn_layer(const Neighbors& adj, const Matrix& h, const Matrix& w, Exec exec = Exec::Parallel);

/// φ applied in place to one row.
void squash_row(std::span<double> row);

}  // namespace repograph::kernels
