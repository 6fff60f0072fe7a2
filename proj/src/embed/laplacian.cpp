#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "repograph/embed/embedder.hpp"

namespace repograph {

namespace {

// Householder reduction of the symmetric matrix held in v to tridiagonal form.
// On return d holds the diagonal, e the sub-diagonal, and v the orthogonal transform.
void tridiagonalize(Matrix& v, std::vector<double>& d, std::vector<double>& e) {
    const std::size_t n = v.rows;
    for (std::size_t j = 0; j < n; ++j) d[j] = v(n - 1, j);
    for (std::size_t i = n - 1; i > 0; --i) {
        double scale = 0.0;
        double h = 0.0;
        for (std::size_t k = 0; k < i; ++k) scale += std::abs(d[k]);
        if (scale == 0.0) {
            e[i] = d[i - 1];
            for (std::size_t j = 0; j < i; ++j) {
                d[j] = v(i - 1, j);
                v(i, j) = 0.0;
                v(j, i) = 0.0;
            }
        } else {
            for (std::size_t k = 0; k < i; ++k) {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            double f = d[i - 1];
            double g = std::sqrt(h);
            if (f > 0) g = -g;
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for (std::size_t j = 0; j < i; ++j) e[j] = 0.0;
            for (std::size_t j = 0; j < i; ++j) {
                f = d[j];
                v(j, i) = f;
                g = e[j] + v(j, j) * f;
                for (std::size_t k = j + 1; k < i; ++k) {
                    g += v(k, j) * d[k];
                    e[k] += v(k, j) * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for (std::size_t j = 0; j < i; ++j) {
                e[j] /= h;
                f += e[j] * d[j];
            }
            const double hh = f / (h + h);
            for (std::size_t j = 0; j < i; ++j) e[j] -= hh * d[j];
            for (std::size_t j = 0; j < i; ++j) {
                f = d[j];
                g = e[j];
                for (std::size_t k = j; k < i; ++k) v(k, j) -= (f * e[k] + g * d[k]);
                d[j] = v(i - 1, j);
                v(i, j) = 0.0;
            }
        }
        d[i] = h;
    }
    for (std::size_t i = 0; i + 1 < n; ++i) {
        v(n - 1, i) = v(i, i);
        v(i, i) = 1.0;
        const double h = d[i + 1];
        if (h != 0.0) {
            for (std::size_t k = 0; k <= i; ++k) d[k] = v(k, i + 1) / h;
            for (std::size_t j = 0; j <= i; ++j) {
                double g = 0.0;
                for (std::size_t k = 0; k <= i; ++k) g += v(k, i + 1) * v(k, j);
                for (std::size_t k = 0; k <= i; ++k) v(k, j) -= g * d[k];
            }
        }
        for (std::size_t k = 0; k <= i; ++k) v(k, i + 1) = 0.0;
    }
    for (std::size_t j = 0; j < n; ++j) {
        d[j] = v(n - 1, j);
        v(n - 1, j) = 0.0;
    }
    v(n - 1, n - 1) = 1.0;
    e[0] = 0.0;
}

// Implicit QL iterations on the tridiagonal matrix (d, e), accumulating into v.
void ql_implicit(Matrix& v, std::vector<double>& d, std::vector<double>& e) {
    const std::size_t n = v.rows;
    for (std::size_t i = 1; i < n; ++i) e[i - 1] = e[i];
    e[n - 1] = 0.0;
    double f = 0.0;
    double tst1 = 0.0;
    const double eps = std::numeric_limits<double>::epsilon();
    for (std::size_t l = 0; l < n; ++l) {
        tst1 = std::max(tst1, std::abs(d[l]) + std::abs(e[l]));
        std::size_t m = l;
        while (m < n - 1 && std::abs(e[m]) > eps * tst1) ++m;
        if (m > l) {
            do {
                double g = d[l];
                double p = (d[l + 1] - g) / (2.0 * e[l]);
                double r = std::hypot(p, 1.0);
                if (p < 0) r = -r;
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                const double dl1 = d[l + 1];
                double h = g - d[l];
                for (std::size_t i = l + 2; i < n; ++i) d[i] -= h;
                f += h;
                p = d[m];
                double c = 1.0, c2 = 1.0, c3 = 1.0;
                const double el1 = e[l + 1];
                double s = 0.0, s2 = 0.0;
                for (std::size_t ii = m; ii-- > l;) {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[ii];
                    h = c * p;
                    r = std::hypot(p, e[ii]);
                    e[ii + 1] = s * r;
                    s = e[ii] / r;
                    c = p / r;
                    p = c * d[ii] - s * g;
                    d[ii + 1] = h + s * (c * g + s * d[ii]);
                    for (std::size_t k = 0; k < n; ++k) {
                        h = v(k, ii + 1);
                        v(k, ii + 1) = s * v(k, ii) + c * h;
                        v(k, ii) = c * v(k, ii) - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
            } while (std::abs(e[l]) > eps * tst1);
        }
        d[l] += f;
        e[l] = 0.0;
    }
}

void fix_sign(Matrix& v, std::size_t col) {
    for (std::size_t r = 0; r < v.rows; ++r) {
        if (std::abs(v(r, col)) > 1e-12) {
            if (v(r, col) < 0) {
                for (std::size_t k = 0; k < v.rows; ++k) v(k, col) = -v(k, col);
            }
            return;
        }
    }
}

}  // namespace

SymmetricEigen symmetric_eigen(const Matrix& m) {
    const std::size_t n = m.rows;
    SymmetricEigen out;
    if (n == 0) return out;
    Matrix v = m;
    std::vector<double> d(n), e(n);
    tridiagonalize(v, d, e);
    ql_implicit(v, d, e);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });
    out.values.resize(n);
    out.vectors = Matrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        out.values[j] = d[order[j]];
        for (std::size_t r = 0; r < n; ++r) out.vectors(r, j) = v(r, order[j]);
        fix_sign(out.vectors, j);
    }
    return out;
}

Matrix normalized_laplacian(const Matrix& a) {
    const std::size_t n = a.rows;
    std::vector<double> inv_sqrt(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double deg = 0.0;
        for (std::size_t j = 0; j < n; ++j) deg += a(i, j);
        inv_sqrt[i] = deg > 0.0 ? 1.0 / std::sqrt(deg) : 0.0;
    }
    Matrix l(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double norm = inv_sqrt[i] * a(i, j) * inv_sqrt[j];
            l(i, j) = (i == j && inv_sqrt[i] > 0.0 ? 1.0 : 0.0) - norm;
        }
    }
    return l;
}

Matrix laplacian_pe(const Matrix& adjacency, std::size_t d2) {
    const std::size_t n = adjacency.rows;
    Matrix pe(n, d2);
    if (n == 0 || d2 == 0) return pe;
    const auto eig = symmetric_eigen(normalized_laplacian(adjacency));

    std::vector<std::size_t> nonzero;
    for (std::size_t j = 0; j < n; ++j) {
        if (eig.values[j] > kZeroEigenvalue) nonzero.push_back(j);
    }
    // equal eigenvalues: order their sign-fixed vectors lexicographically
    auto column_less = [&](std::size_t a, std::size_t b) {
        for (std::size_t r = 0; r < n; ++r) {
            if (eig.vectors(r, a) != eig.vectors(r, b)) return eig.vectors(r, a) < eig.vectors(r, b);
        }
        return a < b;
    };
    for (std::size_t i = 0; i < nonzero.size();) {
        std::size_t j = i + 1;
        while (j < nonzero.size() && eig.values[nonzero[j]] - eig.values[nonzero[i]] < 1e-9) ++j;
        std::sort(nonzero.begin() + static_cast<std::ptrdiff_t>(i),
                  nonzero.begin() + static_cast<std::ptrdiff_t>(j), column_less);
        i = j;
    }
    for (std::size_t c = 0; c < d2 && c < nonzero.size(); ++c) {
        for (std::size_t r = 0; r < n; ++r) pe(r, c) = eig.vectors(r, nonzero[c]);
    }
    return pe;
}

}  // namespace repograph
