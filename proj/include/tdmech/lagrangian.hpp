#pragma once

#include <string>
#include <vector>

#include "tdmech/jets.hpp"
#include "tdmech/linsolve.hpp"

namespace tdmech {

/// A time-dependent Lagrangian L(t, x, y) on one chart. Regularity means the
/// velocity Hessian dy_dy is invertible; it is checked on probe grids, not
/// globally.
class TimeLagrangian {
public:
    explicit TimeLagrangian(ScalarField L, std::string chart = "main")
        : L_(std::move(L)), chart_(std::move(chart)) {}

    std::size_t dim() const { return L_.dim(); }
    const std::string& chart() const { return chart_; }
    const ScalarField& field() const { return L_; }
    const Box& domain() const { return L_.domain(); }

    double value(const TangentSample& v) const { return L_.value(v); }
    LagrangianJet jet(const TangentSample& v) const { return partials(L_, v); }

    template <class S>
    JetT<S> jet_t(const S& t, std::span<const S> x, std::span<const S> y) const {
        return lagrangian_jet_t<S>(L_, t, x, y);
    }

private:
    ScalarField L_;
    std::string chart_;
};

// ---------------------------------------------------------------------------
// Regularity

struct RegularityRow {
    TangentSample v;
    double sigma_min = 0.0;
    double cond = 0.0;
    bool flagged = false;
};

struct RegularityReport {
    double cond_tol = 0.0;
    std::vector<RegularityRow> rows;
    bool all_regular = true;
};

/// Factorize dy_dy at each sample and flag those whose condition estimate
/// exceeds cond_tol (default 1e8). Singular Hessians are flagged, not fatal.
inline RegularityReport regularity_check(const TimeLagrangian& L,
                                         std::span<const TangentSample> samples,
                                         double cond_tol = 1e8) {
    RegularityReport rep;
    rep.cond_tol = cond_tol;
    for (const TangentSample& v : samples) {
        LagrangianJet j = L.jet(v);
        SpectrumProxy s = singular_value_proxy(j.dy_dy);
        RegularityRow row{v, s.sigma_min, s.cond, !(s.cond < cond_tol)};
        rep.all_regular = rep.all_regular && !row.flagged;
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Canonical objects on R x TM

/// E = dL/dy . y - L (Legendre pairing minus the Lagrangian).
inline double energy(const TimeLagrangian& L, const TangentSample& v) {
    LagrangianJet j = L.jet(v);
    return j.d_y.dot(v.y) - j.value;
}

/// Liouville field (0, 0, y) at v.
inline TangentVec liouville_field(const TangentSample& v) {
    return TangentVec{0.0, Vec::Zero(v.y.size()), v.y};
}

/// Vertical endomorphism J(s, z, w) = (0, 0, z); J o J = 0.
inline TangentVec vertical_endomorphism(const TangentVec& w) {
    return TangentVec{0.0, Vec::Zero(w.z.size()), w.z};
}

/// dL at v applied to a tangent (s, z, w).
inline double differential(const LagrangianJet& j, const TangentVec& w) {
    return j.d_t * w.s + j.d_x.dot(w.z) + j.d_y.dot(w.w);
}

/// The one-form dL o J: pairs the velocity gradient against the z slot only.
inline double cartan_one_form(const TimeLagrangian& L, const TangentSample& v, const TangentVec& w) {
    LagrangianJet j = L.jet(v);
    return j.d_y.dot(w.z);
}

/// The Lagrangian two-form evaluated term by term from the jet:
///   dy_dt[z1]s2 - dy_dt[z2]s1 + dy_dx[z1,z2] - dy_dx[z2,z1]
///   + dy_dy[z1,w2] - dy_dy[z2,w1]
/// (mixed blocks pair their first argument against the velocity slot).
inline double lagrange_two_form(const LagrangianJet& j, const TangentVec& w1, const TangentVec& w2) {
    return j.dy_dt.dot(w1.z) * w2.s - j.dy_dt.dot(w2.z) * w1.s
         + w1.z.dot(j.dy_dx * w2.z) - w2.z.dot(j.dy_dx * w1.z)
         + w1.z.dot(j.dy_dy * w2.w) - w2.z.dot(j.dy_dy * w1.w);
}

inline double lagrange_two_form(const TimeLagrangian& L, const TangentSample& v,
                                const TangentVec& w1, const TangentVec& w2) {
    return lagrange_two_form(L.jet(v), w1, w2);
}

/// dE at v applied to a tangent, assembled from the jet of L:
///   dE = (dy_dt . y - d_t) dt + (dy_dx^T y - d_x) dx + (dy_dy y) dy
inline double energy_differential(const LagrangianJet& j, const Vec& y, const TangentVec& w) {
    double et = j.dy_dt.dot(y) - j.d_t;
    Vec ex = j.dy_dx.transpose() * y - j.d_x;
    Vec ey = j.dy_dy * y;
    return et * w.s + ex.dot(w.z) + ey.dot(w.w);
}

}  // namespace tdmech
