#pragma once

#include <cmath>
#include <span>

namespace repograph {

template <class A, class B>
double dot(std::span<const A> a, std::span<const B> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    return s;
}

template <class A>
double l2_norm(std::span<const A> a) {
    return std::sqrt(dot(a, a));
}

/// Cosine similarity; 0 when either vector has zero norm.
template <class A, class B>
double cosine(std::span<const A> a, std::span<const B> b) {
    const double na = l2_norm(a);
    const double nb = l2_norm(b);
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot(a, b) / (na * nb);
}

}  // namespace repograph
