#pragma once

#include <functional>
#include <utility>

#include "tdmech/atlas.hpp"
#include "tdmech/lagrangian.hpp"

namespace tdmech {

namespace detail {

/// Right-hand side of the velocity-Hessian system for the second-order part
/// of the Lagrangian vector field: dy_dy X2 = d_x - dy_dt - dy_dx y.
template <class S>
std::vector<S> el_rhs(const JetT<S>& j, std::span<const S> y, std::size_t n) {
    std::vector<S> rhs(n);
    for (std::size_t i = 0; i < n; ++i) {
        S acc = j.d_x[i] - j.dy_dt[i];
        for (std::size_t k = 0; k < n; ++k) acc = acc - j.dy_dx[i * n + k] * y[k];
        rhs[i] = acc;
    }
    return rhs;
}

/// Right-hand side for the canonical coefficients: dy_dy G = dy_dx y - d_x.
template <class S>
std::vector<S> canonical_rhs(const JetT<S>& j, std::span<const S> y, std::size_t n) {
    std::vector<S> rhs(n);
    for (std::size_t i = 0; i < n; ++i) {
        S acc = -j.d_x[i];
        for (std::size_t k = 0; k < n; ++k) acc = acc + j.dy_dx[i * n + k] * y[k];
        rhs[i] = acc;
    }
    return rhs;
}

}  // namespace detail

/// Second-order part X2 of the unique vector field Z = (1, y, X2) singled out
/// by a regular Lagrangian; curves with c'' = X2 solve the Euler-Lagrange
/// equation.
inline Vec lagrangian_vector_field(const TimeLagrangian& L, const TangentSample& v) {
    const std::size_t n = L.dim();
    JetT<double> j = L.jet_t<double>(v.t, std::span<const double>(v.x.data(), n),
                                     std::span<const double>(v.y.data(), n));
    std::vector<double> x2 = lu_solve(j.dy_dy, detail::el_rhs<double>(j, std::span<const double>(v.y.data(), n), n), n);
    return Eigen::Map<const Vec>(x2.data(), static_cast<Eigen::Index>(n));
}

/// Canonical semispray coefficients G = dy_dy^{-1} (dy_dx y - d_x); the
/// explicit time dependence of L lives in the N0 connection slot, not here.
inline Vec canonical_G(const TimeLagrangian& L, const TangentSample& v) {
    const std::size_t n = L.dim();
    JetT<double> j = L.jet_t<double>(v.t, std::span<const double>(v.x.data(), n),
                                     std::span<const double>(v.y.data(), n));
    std::vector<double> g = lu_solve(j.dy_dy, detail::canonical_rhs<double>(j, std::span<const double>(v.y.data(), n), n), n);
    return Eigen::Map<const Vec>(g.data(), static_cast<Eigen::Index>(n));
}

struct ConnectionCoeffs {
    Vec N0;
    Mat N1;
};

/// Connection induced by the Lagrangian: N0 = dy_dy^{-1} dy_dt and
/// N1 = dG/dy with G the canonical coefficients; the y-derivative is taken
/// in forward mode through the linear solve, not by finite differences.
inline ConnectionCoeffs connection_from_lagrangian(const TimeLagrangian& L, const TangentSample& v) {
    const std::size_t n = L.dim();
    JetT<double> j = L.jet_t<double>(v.t, std::span<const double>(v.x.data(), n),
                                     std::span<const double>(v.y.data(), n));
    std::vector<double> n0 = lu_solve(j.dy_dy, std::vector<double>(j.dy_dt), n);

    Mat n1(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t col = 0; col < n; ++col) {
        Dual1 t{v.t, 0.0};
        std::vector<Dual1> x(n), y(n);
        for (std::size_t i = 0; i < n; ++i) x[i] = Dual1{v.x(static_cast<Eigen::Index>(i)), 0.0};
        for (std::size_t i = 0; i < n; ++i) y[i] = Dual1{v.y(static_cast<Eigen::Index>(i)), i == col ? 1.0 : 0.0};
        JetT<Dual1> jd = L.jet_t<Dual1>(t, std::span<const Dual1>(x.data(), n), std::span<const Dual1>(y.data(), n));
        std::vector<Dual1> g = lu_solve(jd.dy_dy, detail::canonical_rhs<Dual1>(jd, std::span<const Dual1>(y.data(), n), n), n);
        for (std::size_t i = 0; i < n; ++i) n1(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(col)) = g[i].d;
    }
    return ConnectionCoeffs{Eigen::Map<const Vec>(n0.data(), static_cast<Eigen::Index>(n)), std::move(n1)};
}

/// The two connections a semispray induces: (N0 = 0, N1 = dG/dy) and
/// (N0 = dG/dt, N1 = dG/dy), evaluated at v.
inline std::pair<ConnectionCoeffs, ConnectionCoeffs>
connections_from_semispray(const SemisprayField& S, const TangentSample& v) {
    const std::size_t n = S.dim();
    auto dual_eval = [&](std::size_t seed_slot) {
        // slot 0 seeds t, slots 1..n seed y
        Dual1 t{v.t, seed_slot == 0 ? 1.0 : 0.0};
        std::vector<Dual1> x(n), y(n), out(n);
        for (std::size_t i = 0; i < n; ++i) x[i] = Dual1{v.x(static_cast<Eigen::Index>(i)), 0.0};
        for (std::size_t i = 0; i < n; ++i)
            y[i] = Dual1{v.y(static_cast<Eigen::Index>(i)), seed_slot == i + 1 ? 1.0 : 0.0};
        S.eval(t, std::span<const Dual1>(x.data(), n), std::span<const Dual1>(y.data(), n),
               std::span<Dual1>(out.data(), n));
        return out;
    };

    Vec dG_dt(static_cast<Eigen::Index>(n));
    Mat dG_dy(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    {
        std::vector<Dual1> out = dual_eval(0);
        for (std::size_t i = 0; i < n; ++i) dG_dt(static_cast<Eigen::Index>(i)) = out[i].d;
    }
    for (std::size_t col = 0; col < n; ++col) {
        std::vector<Dual1> out = dual_eval(col + 1);
        for (std::size_t i = 0; i < n; ++i) dG_dy(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(col)) = out[i].d;
    }
    ConnectionCoeffs first{Vec::Zero(static_cast<Eigen::Index>(n)), dG_dy};
    ConnectionCoeffs second{std::move(dG_dt), std::move(dG_dy)};
    return {std::move(first), std::move(second)};
}

// ---------------------------------------------------------------------------
// Field factories

/// Spray whose geodesics solve the Euler-Lagrange equation: G = -X2.
inline SemisprayField lagrangian_spray(const TimeLagrangian& L) {
    const std::size_t n = L.dim();
    ScalarField f = L.field();
    return SemisprayField::from_generic(
        L.chart(), n, L.domain(), Provenance::lagrangian_vector_field,
        [f, n](const auto& t, auto x, auto y, auto out) {
            using S = std::remove_cvref_t<decltype(t)>;
            JetT<S> j = lagrangian_jet_t<S>(f, t, x, y);
            std::vector<S> x2 = lu_solve(std::move(j.dy_dy), detail::el_rhs<S>(j, y, n), n);
            for (std::size_t i = 0; i < n; ++i) out[i] = -x2[i];
        });
}

/// Spray with the canonical coefficients of L (no explicit time slot).
inline SemisprayField canonical_spray(const TimeLagrangian& L) {
    const std::size_t n = L.dim();
    ScalarField f = L.field();
    return SemisprayField::from_generic(
        L.chart(), n, L.domain(), Provenance::canonical_from_lagrangian,
        [f, n](const auto& t, auto x, auto y, auto out) {
            using S = std::remove_cvref_t<decltype(t)>;
            JetT<S> j = lagrangian_jet_t<S>(f, t, x, y);
            std::vector<S> g = lu_solve(std::move(j.dy_dy), detail::canonical_rhs<S>(j, y, n), n);
            for (std::size_t i = 0; i < n; ++i) out[i] = g[i];
        });
}

/// Connection field of L as evaluators (N0, N1) over its whole domain.
inline ConnectionField lagrangian_connection(const TimeLagrangian& L) {
    const std::size_t n = L.dim();
    TimeLagrangian Lc = L;
    auto n0 = [Lc, n](double t, std::span<const double> x, std::span<const double> y, std::span<double> out) {
        TangentSample v{t, Eigen::Map<const Vec>(x.data(), static_cast<Eigen::Index>(n)),
                        Eigen::Map<const Vec>(y.data(), static_cast<Eigen::Index>(n))};
        ConnectionCoeffs c = connection_from_lagrangian(Lc, v);
        for (std::size_t i = 0; i < n; ++i) out[i] = c.N0(static_cast<Eigen::Index>(i));
    };
    auto n1 = [Lc, n](double t, std::span<const double> x, std::span<const double> y, std::span<double> out) {
        TangentSample v{t, Eigen::Map<const Vec>(x.data(), static_cast<Eigen::Index>(n)),
                        Eigen::Map<const Vec>(y.data(), static_cast<Eigen::Index>(n))};
        ConnectionCoeffs c = connection_from_lagrangian(Lc, v);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) out[i * n + j] = c.N1(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    };
    return ConnectionField(L.chart(), n, L.domain(), n0, n1);
}

/// Spray whose geodesics are the autoparallels of N: G = N0 + N1 y.
inline SemisprayField spray_from_connection(const ConnectionField& N) {
    const std::size_t n = N.dim();
    ConnectionField Nc = N;
    return SemisprayField::from_double(
        N.chart(), n, N.domain(), Provenance::user,
        [Nc, n](double t, std::span<const double> x, std::span<const double> y, std::span<double> out) {
            TangentSample v{t, Eigen::Map<const Vec>(x.data(), static_cast<Eigen::Index>(n)),
                            Eigen::Map<const Vec>(y.data(), static_cast<Eigen::Index>(n))};
            Vec p = Nc.N0(v) + Nc.N1(v) * v.y;
            for (std::size_t i = 0; i < n; ++i) out[i] = p(static_cast<Eigen::Index>(i));
        });
}

// ---------------------------------------------------------------------------
// Second-order trivializations

/// Spray-form trivialization: (t, x, y, z) -> (t, x, y, z + G(t, x, y)).
inline Trivialized trivialize(const SemisprayField& S, const Jet2& j) {
    Vec g = S.G(TangentSample{j.t, j.x, j.y});
    return Trivialized{j.t, j.x, j.y, j.z + g};
}

/// Inverse of the spray-form trivialization.
inline Jet2 detrivialize(const SemisprayField& S, const Trivialized& tv) {
    Vec g = S.G(TangentSample{tv.t, tv.x, tv.y});
    return Jet2{tv.t, tv.x, tv.y, tv.w - g};
}

/// Connection-form trivialization: w = z + N0(v) + N1(v) y.
inline Trivialized trivialize_by_connection(const ConnectionField& N, const Jet2& j) {
    TangentSample v{j.t, j.x, j.y};
    Vec p = N.N0(v) + N.N1(v) * j.y;
    return Trivialized{j.t, j.x, j.y, j.z + p};
}

/// Chart change in trivialized coordinates. For a compatible spray pair this
/// acts as the time-independent block pair (dphi, dphi) on (y, w).
inline Trivialized transition_trivialized(const SemisprayField& a, const SemisprayField& b,
                                          const Transition& tr, const Trivialized& tv) {
    return trivialize(b, push_jet2(tr, detrivialize(a, tv)));
}

using Trivializer = std::function<Trivialized(const Jet2&)>;

inline Trivializer trivializer(const SemisprayField& S) {
    return [S](const Jet2& j) { return trivialize(S, j); };
}
inline Trivializer trivializer(const ConnectionField& N) {
    return [N](const Jet2& j) { return trivialize_by_connection(N, j); };
}

/// Recover the spray coefficients a trivialization encodes: the straight-line
/// representative through (x, y) has zero chart second derivative, so the
/// last slot of Phi2(t, x, y, 0) is G(t, x, y).
inline Vec recover_G(const Trivializer& triv, const TangentSample& v) {
    Trivialized tv = triv(Jet2{v.t, v.x, v.y, Vec::Zero(v.y.size())});
    return tv.w;
}

// ---------------------------------------------------------------------------
// Related sprays under a diffeomorphism

/// Second-order pushforward of a curve jet through f.
inline Jet2 t2_map(const VectorMap& f, const Jet2& j) {
    DerivativeBundle d = map_jet(f, j.x, /*want_second=*/true);
    const std::size_t m = f.dim_out();
    Vec zp = d.jacobian * j.z;
    for (std::size_t i = 0; i < m; ++i)
        zp(static_cast<Eigen::Index>(i)) += j.y.dot(d.second[i] * j.y);
    return Jet2{j.t, d.value, d.jacobian * j.y, zp};
}

struct FRelatedReport {
    ResidualReport x2_form;  // X2_N(t, f(x), df y) = d2f(y, y) + df X2_M(t, x, y)
    ResidualReport g_form;   // G_N(t, f(x), df y) + d2f(y, y) = df G_M(t, x, y)
};

/// Check whether two sprays are intertwined by f. Both conventions are
/// reported; the motion fields are read off the coefficients as X2 = -G, so
/// for canonical-form coefficients the X2 report audits the spray's own
/// motion field rather than the Euler-Lagrange field.
inline FRelatedReport check_f_related(const SemisprayField& S_M, const SemisprayField& S_N,
                                      const VectorMap& f,
                                      std::span<const TangentSample> samples) {
    FRelatedReport rep;
    rep.x2_form.law = "f-related-x2";
    rep.g_form.law = "f-related-g";
    const std::size_t n = S_M.dim();
    for (const TangentSample& v : samples) {
        DerivativeBundle d = map_jet(f, v.x, /*want_second=*/true);
        TangentSample vp{v.t, d.value, d.jacobian * v.y};
        Vec quad(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) quad(static_cast<Eigen::Index>(i)) = v.y.dot(d.second[i] * v.y);

        Vec gm = S_M.G(v), gn = S_N.G(vp);
        Vec rx = (-gn) - quad - d.jacobian * (-gm);
        Vec rg = gn + quad - d.jacobian * gm;
        rep.x2_form.record(v, rx.lpNorm<Eigen::Infinity>());
        rep.g_form.record(v, rg.lpNorm<Eigen::Infinity>());
    }
    return rep;
}

}  // namespace tdmech
