#pragma once

#include <vector>

#include "tdmech/fields.hpp"
#include "tdmech/types.hpp"

namespace tdmech {

/// All partial derivatives of a Lagrangian used by the engine, generic over
/// the base scalar. Index convention for the mixed block:
///   dy_dx[i*n + j] = d^2 L / (dy_i dx_j)   (row: velocity slot, column: position slot)
/// dy_dy is symmetric and filled symmetrically from one evaluation per pair.
template <class S>
struct JetT {
    S value{}, d_t{};
    std::vector<S> d_x, d_y, dy_dt;  // each n
    std::vector<S> dy_dx, dy_dy;     // n*n row-major
};

/// Double-precision jet with Eigen blocks, the shape most operations consume.
struct LagrangianJet {
    double value = 0.0, d_t = 0.0;
    Vec d_x, d_y, dy_dt;
    Mat dy_dx, dy_dy;
};

namespace detail {

/// One Taylor2<S> evaluation of L along the direction with unit weights on
/// the flattened slots listed in `dirs` (slot 0 = t, 1..n = x, n+1..2n = y).
template <class S, std::size_t K>
Taylor2<S> directional_eval(const ScalarField& L, const S& t, std::span<const S> x,
                            std::span<const S> y, const std::size_t (&dirs)[K]) {
    const std::size_t n = x.size();
    Taylor2<S> tt{t, S(0.0), S(0.0)};
    std::vector<Taylor2<S>> xx(n), yy(n);
    for (std::size_t i = 0; i < n; ++i) xx[i] = Taylor2<S>{x[i], S(0.0), S(0.0)};
    for (std::size_t i = 0; i < n; ++i) yy[i] = Taylor2<S>{y[i], S(0.0), S(0.0)};
    for (std::size_t k : dirs) {
        if (k == 0) tt.d = S(1.0);
        else if (k <= n) xx[k - 1].d = S(1.0);
        else yy[k - 1 - n].d = S(1.0);
    }
    return L(tt, std::span<const Taylor2<S>>(xx.data(), n), std::span<const Taylor2<S>>(yy.data(), n));
}

}  // namespace detail

/// Forward-mode jet of L at (t, x, y) over base scalar S. Unit directions are
/// seeded per input slot; mixed second derivatives come from one extra
/// evaluation per pair via the polarization identity
///   H(u,w) = (H(u+w,u+w) - H(u,u) - H(w,w)) / 2.
template <class S>
JetT<S> lagrangian_jet_t(const ScalarField& L, const S& t, std::span<const S> x, std::span<const S> y) {
    const std::size_t n = x.size();
    JetT<S> out;
    out.d_x.resize(n); out.d_y.resize(n); out.dy_dt.resize(n);
    out.dy_dx.assign(n * n, S(0.0)); out.dy_dy.assign(n * n, S(0.0));

    const std::size_t t_slot = 0;
    auto x_slot = [](std::size_t j) { return 1 + j; };
    auto y_slot = [n](std::size_t i) { return 1 + n + i; };

    Taylor2<S> et = detail::directional_eval(L, t, x, y, {t_slot});
    out.value = et.v;
    out.d_t = et.d;

    std::vector<S> hxx(n), hyy(n);
    for (std::size_t j = 0; j < n; ++j) {
        Taylor2<S> e = detail::directional_eval(L, t, x, y, {x_slot(j)});
        out.d_x[j] = e.d;
        hxx[j] = e.h;
    }
    for (std::size_t i = 0; i < n; ++i) {
        Taylor2<S> e = detail::directional_eval(L, t, x, y, {y_slot(i)});
        out.d_y[i] = e.d;
        hyy[i] = e.h;
        out.dy_dy[i * n + i] = e.h;
    }
    for (std::size_t i = 0; i < n; ++i) {
        Taylor2<S> e = detail::directional_eval(L, t, x, y, {t_slot, y_slot(i)});
        out.dy_dt[i] = (e.h - et.h - hyy[i]) / 2.0;
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            Taylor2<S> e = detail::directional_eval(L, t, x, y, {x_slot(j), y_slot(i)});
            out.dy_dx[i * n + j] = (e.h - hxx[j] - hyy[i]) / 2.0;
        }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            Taylor2<S> e = detail::directional_eval(L, t, x, y, {y_slot(i), y_slot(j)});
            S mixed = (e.h - hyy[i] - hyy[j]) / 2.0;
            out.dy_dy[i * n + j] = mixed;
            out.dy_dy[j * n + i] = mixed;
        }
    return out;
}

inline LagrangianJet to_eigen(const JetT<double>& j, std::size_t n) {
    LagrangianJet out;
    out.value = j.value;
    out.d_t = j.d_t;
    out.d_x = Eigen::Map<const Vec>(j.d_x.data(), static_cast<Eigen::Index>(n));
    out.d_y = Eigen::Map<const Vec>(j.d_y.data(), static_cast<Eigen::Index>(n));
    out.dy_dt = Eigen::Map<const Vec>(j.dy_dt.data(), static_cast<Eigen::Index>(n));
    out.dy_dx = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        j.dy_dx.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    out.dy_dy = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        j.dy_dy.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    return out;
}

/// Exact first and second partial derivatives of L at v.
inline LagrangianJet partials(const ScalarField& L, const TangentSample& v) {
    L.domain().require_inside(v.flat());
    JetT<double> j = lagrangian_jet_t<double>(
        L, v.t, std::span<const double>(v.x.data(), v.x.size()),
        std::span<const double>(v.y.data(), v.y.size()));
    return to_eigen(j, L.dim());
}

// ---------------------------------------------------------------------------
// Finite-difference oracle: central differences with one Richardson step.
// First-derivative error is O(h^4); steps scale with the coordinate,
// h_k = h * (1 + |v_k|).

inline LagrangianJet fd_partials(const ScalarField& L, const TangentSample& v, double h = 1e-3) {
    const std::size_t n = L.dim();
    std::vector<double> base = v.flat();
    const std::size_t dim = base.size();
    const Box& box = L.domain();

    std::vector<double> step(dim);
    for (std::size_t k = 0; k < dim; ++k) {
        step[k] = h * (1.0 + std::abs(base[k]));
        if (!(base[k] - step[k] > box[k].lo && base[k] + step[k] < box[k].hi))
            throw StepError("finite-difference stencil leaves the declared domain");
    }

    auto eval = [&](const std::vector<double>& p) {
        return L(p[0], std::span<const double>(p.data() + 1, n),
                 std::span<const double>(p.data() + 1 + n, n));
    };
    const double f0 = eval(base);

    auto shifted = [&](std::size_t k, double s) {
        std::vector<double> p = base;
        p[k] += s;
        return p;
    };
    auto first = [&](std::size_t k) {
        auto D = [&](double hh) {
            return (eval(shifted(k, hh)) - eval(shifted(k, -hh))) / (2.0 * hh);
        };
        return (4.0 * D(step[k] / 2.0) - D(step[k])) / 3.0;
    };
    auto second_pure = [&](std::size_t k) {
        auto S2 = [&](double hh) {
            return (eval(shifted(k, hh)) - 2.0 * f0 + eval(shifted(k, -hh))) / (hh * hh);
        };
        return (4.0 * S2(step[k] / 2.0) - S2(step[k])) / 3.0;
    };
    auto second_mixed = [&](std::size_t k, std::size_t l) {
        auto M = [&](double ha, double hb) {
            auto at = [&](double sa, double sb) {
                std::vector<double> p = base;
                p[k] += sa;
                p[l] += sb;
                return eval(p);
            };
            return (at(ha, hb) - at(ha, -hb) - at(-ha, hb) + at(-ha, -hb)) / (4.0 * ha * hb);
        };
        return (4.0 * M(step[k] / 2.0, step[l] / 2.0) - M(step[k], step[l])) / 3.0;
    };

    LagrangianJet out;
    out.value = f0;
    out.d_t = first(0);
    out.d_x.resize(n); out.d_y.resize(n); out.dy_dt.resize(n);
    out.dy_dx.resize(n, n); out.dy_dy.resize(n, n);
    auto xs = [n](std::size_t j) { return 1 + j; };
    auto ys = [n](std::size_t i) { return 1 + n + i; };
    for (std::size_t j = 0; j < n; ++j) out.d_x(j) = first(xs(j));
    for (std::size_t i = 0; i < n; ++i) out.d_y(i) = first(ys(i));
    for (std::size_t i = 0; i < n; ++i) out.dy_dt(i) = second_mixed(ys(i), 0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) out.dy_dx(i, j) = second_mixed(ys(i), xs(j));
    for (std::size_t i = 0; i < n; ++i) {
        out.dy_dy(i, i) = second_pure(ys(i));
        for (std::size_t j = i + 1; j < n; ++j) {
            double m = second_mixed(ys(i), ys(j));
            out.dy_dy(i, j) = m;
            out.dy_dy(j, i) = m;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Jets of vector maps

/// Value, Jacobian and (optionally) second derivative of a VectorMap over a
/// generic base scalar. second[i*n*n + j*n + k] = d^2 f_i / (dx_j dx_k),
/// symmetric in (j, k) by construction.
template <class S>
struct MapJetT {
    std::vector<S> value;   // m
    std::vector<S> jac;     // m*n row-major
    std::vector<S> second;  // m*n*n, empty unless requested
};

template <class S>
MapJetT<S> map_jet_t(const VectorMap& f, std::span<const S> x, bool want_second) {
    const std::size_t n = f.dim_in(), m = f.dim_out();
    using TS = Taylor2<S>;
    MapJetT<S> out;
    out.value.resize(m);
    out.jac.assign(m * n, S(0.0));
    if (want_second) out.second.assign(m * n * n, S(0.0));

    std::vector<TS> in(n), res(m);
    auto run = [&](std::size_t a, std::size_t b, bool pair) {
        for (std::size_t i = 0; i < n; ++i) in[i] = TS{x[i], S(0.0), S(0.0)};
        in[a].d = S(1.0);
        if (pair) in[b].d = S(1.0);
        f.eval(std::span<const TS>(in.data(), n), std::span<TS>(res.data(), m));
    };

    std::vector<S> hdiag(m * n, S(0.0));
    for (std::size_t j = 0; j < n; ++j) {
        run(j, j, false);
        for (std::size_t i = 0; i < m; ++i) {
            if (j == 0) out.value[i] = res[i].v;
            out.jac[i * n + j] = res[i].d;
            if (want_second) {
                hdiag[i * n + j] = res[i].h;
                out.second[i * n * n + j * n + j] = res[i].h;
            }
        }
    }
    if (want_second) {
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = j + 1; k < n; ++k) {
                run(j, k, true);
                for (std::size_t i = 0; i < m; ++i) {
                    S mixed = (res[i].h - hdiag[i * n + j] - hdiag[i * n + k]) / 2.0;
                    out.second[i * n * n + j * n + k] = mixed;
                    out.second[i * n * n + k * n + j] = mixed;
                }
            }
    }
    return out;
}

/// Double-precision map jet with Eigen blocks.
struct DerivativeBundle {
    Vec value;                // m
    Mat jacobian;             // m x n
    std::vector<Mat> second;  // m Hessians, each n x n, symmetric
};

inline DerivativeBundle map_jet(const VectorMap& f, const Vec& x, bool want_second = true) {
    f.domain().require_inside(std::span<const double>(x.data(), x.size()));
    const std::size_t n = f.dim_in(), m = f.dim_out();
    MapJetT<double> j = map_jet_t<double>(f, std::span<const double>(x.data(), x.size()), want_second);
    DerivativeBundle out;
    out.value = Eigen::Map<const Vec>(j.value.data(), static_cast<Eigen::Index>(m));
    out.jacobian = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        j.jac.data(), static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
    if (want_second) {
        out.second.resize(m);
        for (std::size_t i = 0; i < m; ++i)
            out.second[i] = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
                j.second.data() + i * n * n, static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    }
    return out;
}

}  // namespace tdmech
