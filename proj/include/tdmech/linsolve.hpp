#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "tdmech/dual.hpp"
#include "tdmech/errors.hpp"
#include "tdmech/types.hpp"

namespace tdmech {

/// Dense LU solve with partial pivoting over a generic forward-mode scalar.
/// Pivots are chosen on the innermost value magnitude, so the elimination
/// path for a dual-valued matrix matches the one its value part would take.
/// A is row-major n*n and is consumed; throws RegularityError on a pivot
/// that is zero relative to the matrix scale.
template <class S>
std::vector<S> lu_solve(std::vector<S> A, std::vector<S> b, std::size_t n) {
    double scale = 0.0;
    for (const S& a : A) scale = std::max(scale, std::abs(value_of(a)));
    const double tiny = (scale > 0.0 ? scale : 1.0) * 1e-14;

    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        double best = std::abs(value_of(A[k * n + k]));
        for (std::size_t r = k + 1; r < n; ++r) {
            double m = std::abs(value_of(A[r * n + k]));
            if (m > best) { best = m; piv = r; }
        }
        if (!(best > tiny)) throw RegularityError("singular matrix in linear solve");
        if (piv != k) {
            for (std::size_t c = k; c < n; ++c) std::swap(A[k * n + c], A[piv * n + c]);
            std::swap(b[k], b[piv]);
        }
        for (std::size_t r = k + 1; r < n; ++r) {
            S m = A[r * n + k] / A[k * n + k];
            for (std::size_t c = k + 1; c < n; ++c) A[r * n + c] = A[r * n + c] - m * A[k * n + c];
            b[r] = b[r] - m * b[k];
        }
    }
    std::vector<S> x(n, S(0.0));
    for (std::size_t ri = n; ri-- > 0;) {
        S acc = b[ri];
        for (std::size_t c = ri + 1; c < n; ++c) acc = acc - A[ri * n + c] * x[c];
        x[ri] = acc / A[ri * n + ri];
    }
    return x;
}

/// Eigen-facing wrapper over the same pivoted elimination, so the double and
/// dual-number solve paths share error semantics.
inline Vec solve(const Mat& A, const Vec& b) {
    const std::size_t n = static_cast<std::size_t>(A.rows());
    std::vector<double> a(n * n), rhs(b.data(), b.data() + n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a[i * n + j] = A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    std::vector<double> x = lu_solve(std::move(a), std::move(rhs), n);
    return Eigen::Map<const Vec>(x.data(), static_cast<Eigen::Index>(n));
}

/// Smallest singular value and condition estimate sigma_max / sigma_min.
struct SpectrumProxy {
    double sigma_min = 0.0;
    double cond = std::numeric_limits<double>::infinity();
};

inline SpectrumProxy singular_value_proxy(const Mat& A) {
    Eigen::JacobiSVD<Mat> svd(A);
    const auto& s = svd.singularValues();
    SpectrumProxy out;
    out.sigma_min = s(s.size() - 1);
    out.cond = out.sigma_min > 0.0 ? s(0) / out.sigma_min
                                   : std::numeric_limits<double>::infinity();
    return out;
}

}  // namespace tdmech
