#include "repograph/kernels/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "repograph/core/vector_math.hpp"

namespace repograph::kernels {

namespace {

void attention_row(const Matrix& q, const Matrix& r, double inv_sqrt_d, std::size_t i, Matrix& out) {
    auto dst = out.row(i);
    const auto qi = q.row(i);
    double peak = -INFINITY;
    for (std::size_t j = 0; j < r.rows; ++j) {
        dst[j] = dot(qi, r.row(j)) * inv_sqrt_d;
        peak = std::max(peak, dst[j]);
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < r.rows; ++j) {
        dst[j] = std::exp(dst[j] - peak);
        sum += dst[j];
    }
    for (std::size_t j = 0; j < r.rows; ++j) dst[j] /= sum;
}

void layer_row(const Neighbors& adj, const Matrix& h, const Matrix& w, std::size_t v,
               std::vector<double>& mean, Matrix& out) {
    const std::size_t d = h.cols;
    std::fill(mean.begin(), mean.end(), 0.0);
    const auto begin = adj.offsets[v];
    const auto end = adj.offsets[v + 1];
    if (begin == end) {
        const auto self = h.row(v);
        std::copy(self.begin(), self.end(), mean.begin());
    } else {
        for (auto k = begin; k < end; ++k) {
            const auto hu = h.row(adj.targets[k]);
            for (std::size_t c = 0; c < d; ++c) mean[c] += hu[c];
        }
        const double inv = 1.0 / static_cast<double>(end - begin);
        for (auto& m : mean) m *= inv;
    }
    auto dst = out.row(v);
    std::fill(dst.begin(), dst.end(), 0.0);
    for (std::size_t c = 0; c < d; ++c) {
        const double m = mean[c];
        if (m == 0.0) continue;
        const double* wc = w.data.data() + c * w.cols;
        for (std::size_t o = 0; o < w.cols; ++o) dst[o] += wc[o] * m;
    }
    squash_row(dst);
}

}  // namespace

Matrix cross_attention(const Matrix& q, const Matrix& r, Exec exec) {
    if (q.cols != r.cols) throw std::invalid_argument("cross_attention: inner dimensions differ");
    Matrix out(q.rows, r.rows);
    if (q.rows == 0 || r.rows == 0) return out;
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(q.cols));
    const auto n = static_cast<std::ptrdiff_t>(q.rows);
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < n; ++i) attention_row(q, r, inv_sqrt_d, static_cast<std::size_t>(i), out);
    } else {
        for (std::ptrdiff_t i = 0; i < n; ++i) attention_row(q, r, inv_sqrt_d, static_cast<std::size_t>(i), out);
    }
    return out;
}

std::vector<ScoredIndex> topk_cosine(std::span<const float> query, std::span<const float> rows,
                                     std::size_t dim, std::size_t k, Exec exec) {
    if (dim == 0 || query.size() != dim) throw std::invalid_argument("topk_cosine: dimension mismatch");
    const std::size_t n = rows.size() / dim;
    std::vector<double> scores(n);
    const auto count = static_cast<std::ptrdiff_t>(n);
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < count; ++i) {
            scores[static_cast<std::size_t>(i)] =
                cosine(query, rows.subspan(static_cast<std::size_t>(i) * dim, dim));
        }
    } else {
        for (std::ptrdiff_t i = 0; i < count; ++i) {
            scores[static_cast<std::size_t>(i)] =
                cosine(query, rows.subspan(static_cast<std::size_t>(i) * dim, dim));
        }
    }
    std::vector<ScoredIndex> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = {i, scores[i]};
    auto better = [](const ScoredIndex& a, const ScoredIndex& b) {
        return a.score != b.score ? a.score > b.score : a.index < b.index;
    };
    k = std::min(k, n);
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(), better);
    all.resize(k);
    return all;
}

Neighbors Neighbors::from_pairs(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
    std::vector<std::vector<std::size_t>> lists(n);
    for (const auto& [a, b] : edges) {
        if (a == b) continue;
        lists[a].push_back(b);
        lists[b].push_back(a);
    }
    Neighbors out;
    out.offsets.reserve(n + 1);
    out.offsets.push_back(0);
    for (auto& l : lists) {
        std::sort(l.begin(), l.end());
        l.erase(std::unique(l.begin(), l.end()), l.end());
        out.targets.insert(out.targets.end(), l.begin(), l.end());
        out.offsets.push_back(out.targets.size());
    }
    return out;
}

void squash_row(std::span<double> row) {
    double norm = 0.0;
    for (auto& x : row) {
        x = std::tanh(x);
        norm += x * x;
    }
    norm = std::sqrt(norm);
    if (norm == 0.0) return;
    const double scale = std::sqrt(static_cast<double>(row.size())) / norm;
    for (auto& x : row) x *= scale;
}

Matrix gnn_layer(const Neighbors& adj, const Matrix& h, const Matrix& w, Exec exec) {
    if (w.rows != h.cols || adj.size() != h.rows) throw std::invalid_argument("gnn_layer: shape mismatch");
    Matrix out(h.rows, w.cols);
    const auto n = static_cast<std::ptrdiff_t>(h.rows);
    if (exec == Exec::Parallel) {
#pragma omp parallel
        {
            std::vector<double> mean(h.cols);
#pragma omp for schedule(static)
            for (std::ptrdiff_t v = 0; v < n; ++v) layer_row(adj, h, w, static_cast<std::size_t>(v), mean, out);
        }
    } else {
        std::vector<double> mean(h.cols);
        for (std::ptrdiff_t v = 0; v < n; ++v) layer_row(adj, h, w, static_cast<std::size_t>(v), mean, out);
    }
    return out;
}

}  // namespace repograph::kernels
