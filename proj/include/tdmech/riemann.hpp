#pragma once

#include <optional>

#include "tdmech/dynamics.hpp"

namespace tdmech {

/// Riemannian metric g(t, x), symmetric positive-definite n x n. Autonomous
/// metrics simply ignore the time slot. The evaluator writes row-major
/// entries and must be exactly symmetric.
class MetricField {
public:
    template <class F>
    MetricField(std::size_t n, Box domain, F f)
        : n_(n), domain_(std::move(domain)), f0_(f), f1_(f), f2_(f), f3_(std::move(f)) {
        if (domain_.dim() != 1 + n_)
            throw ValidationError("metric domain must cover (t, x)");
    }

    std::size_t dim() const { return n_; }
    const Box& domain() const { return domain_; }

    template <class S>
    void eval(const S& t, std::span<const S> x, std::span<S> out) const {
        if constexpr (std::is_same_v<S, double>) f0_(t, x, out);
        else if constexpr (std::is_same_v<S, Dual1>) f1_(t, x, out);
        else if constexpr (std::is_same_v<S, T2>) f2_(t, x, out);
        else f3_(t, x, out);
    }

    Mat value(double t, const Vec& x) const {
        std::vector<double> buf(n_ * n_);
        f0_(t, std::span<const double>(x.data(), n_), std::span<double>(buf.data(), buf.size()));
        return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            buf.data(), static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_));
    }

private:
    template <class S>
    using Fn = std::function<void(const S&, std::span<const S>, std::span<S>)>;

    std::size_t n_;
    Box domain_;
    Fn<double> f0_;
    Fn<Dual1> f1_;
    Fn<T2> f2_;
    Fn<T2D> f3_;
};

/// Scalar potential U(t, x).
class PotentialField {
public:
    template <class F>
    PotentialField(std::size_t n, Box domain, F f)
        : n_(n), domain_(std::move(domain)), f0_(f), f1_(f), f2_(f), f3_(std::move(f)) {
        if (domain_.dim() != 1 + n_)
            throw ValidationError("potential domain must cover (t, x)");
    }

    std::size_t dim() const { return n_; }
    const Box& domain() const { return domain_; }

    template <class S>
    S eval(const S& t, std::span<const S> x) const {
        if constexpr (std::is_same_v<S, double>) return f0_(t, x);
        else if constexpr (std::is_same_v<S, Dual1>) return f1_(t, x);
        else if constexpr (std::is_same_v<S, T2>) return f2_(t, x);
        else return f3_(t, x);
    }

    double value(double t, const Vec& x) const {
        return f0_(t, std::span<const double>(x.data(), n_));
    }

private:
    template <class S>
    using Fn = std::function<S(const S&, std::span<const S>)>;

    std::size_t n_;
    Box domain_;
    Fn<double> f0_;
    Fn<Dual1> f1_;
    Fn<T2> f2_;
    Fn<T2D> f3_;
};

/// Holonomic constraint as a level set N = c^{-1}(0) with dc of full rank k
/// along N.
class LevelSetConstraint {
public:
    explicit LevelSetConstraint(VectorMap c) : c_(std::move(c)) {
        if (c_.dim_out() >= c_.dim_in())
            throw ValidationError("constraint codimension must be smaller than the ambient dimension");
    }

    std::size_t ambient_dim() const { return c_.dim_in(); }
    std::size_t codim() const { return c_.dim_out(); }
    const VectorMap& map() const { return c_; }

    Vec value(const Vec& x) const { return c_.value(x); }

    bool on_constraint(const Vec& x, double tol = 1e-9) const {
        return value(x).lpNorm<Eigen::Infinity>() <= tol;
    }

    void require_on_constraint(const Vec& x, const Vec& y, double tol = 1e-9) const {
        if (!on_constraint(x, tol))
            throw ValidationError("initial position is off the constraint set");
        DerivativeBundle d = map_jet(c_, x, /*want_second=*/false);
        if ((d.jacobian * y).lpNorm<Eigen::Infinity>() > tol)
            throw ValidationError("initial velocity is not tangent to the constraint set");
    }

private:
    VectorMap c_;
};

namespace detail {

template <class S>
std::vector<S> matvec(const std::vector<S>& A, const std::vector<S>& v, std::size_t rows, std::size_t cols) {
    std::vector<S> out(rows, S(0.0));
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) out[i] = out[i] + A[i * cols + j] * v[j];
    return out;
}

/// Metric value and its n space-derivative matrices at base scalar S.
template <class S>
void metric_with_derivatives(const MetricField& g, const S& t, std::span<const S> x,
                             std::vector<S>& value, std::vector<std::vector<S>>& dg) {
    const std::size_t n = g.dim();
    using TS = Taylor2<S>;
    std::vector<TS> xx(n), out(n * n);
    value.assign(n * n, S(0.0));
    dg.assign(n, std::vector<S>(n * n, S(0.0)));
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < n; ++i) xx[i] = TS{x[i], S(i == k ? 1.0 : 0.0), S(0.0)};
        TS tt{t, S(0.0), S(0.0)};
        g.eval(tt, std::span<const TS>(xx.data(), n), std::span<TS>(out.data(), out.size()));
        for (std::size_t e = 0; e < n * n; ++e) {
            if (k == 0) value[e] = out[e].v;
            dg[k][e] = out[e].d;
        }
    }
}

template <class S>
std::vector<S> metric_value(const MetricField& g, const S& t, std::span<const S> x) {
    std::vector<S> out(g.dim() * g.dim());
    g.eval(t, x, std::span<S>(out.data(), out.size()));
    return out;
}

/// Spray coefficients of the kinetic Lagrangian of g at frozen t:
///   g(K2, z) = (1/2) (d_z g)(y, y) - (d_y g)(y, z)  for all z.
template <class S>
std::vector<S> metric_k2(const MetricField& g, const S& t, std::span<const S> x, std::span<const S> y) {
    const std::size_t n = g.dim();
    std::vector<S> gm;
    std::vector<std::vector<S>> dg;
    metric_with_derivatives(g, t, x, gm, dg);

    std::vector<S> rhs(n, S(0.0));
    for (std::size_t j = 0; j < n; ++j) {
        S quad = S(0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < n; ++k) quad = quad + dg[j][i * n + k] * y[i] * y[k];
        S drift = S(0.0);
        for (std::size_t k = 0; k < n; ++k) {
            S row = S(0.0);
            for (std::size_t i = 0; i < n; ++i) row = row + dg[k][i * n + j] * y[i];
            drift = drift + y[k] * row;
        }
        rhs[j] = 0.5 * quad - drift;
    }
    return lu_solve(std::move(gm), std::move(rhs), n);
}

/// Gradient of U in the metric g: solve g grad = dU/dx.
template <class S>
std::vector<S> metric_grad(const MetricField& g, const PotentialField& U, const S& t, std::span<const S> x) {
    const std::size_t n = g.dim();
    using TS = Taylor2<S>;
    std::vector<S> du(n);
    std::vector<TS> xx(n);
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < n; ++i) xx[i] = TS{x[i], S(i == k ? 1.0 : 0.0), S(0.0)};
        du[k] = U.eval(TS{t, S(0.0), S(0.0)}, std::span<const TS>(xx.data(), n)).d;
    }
    return lu_solve(metric_value(g, t, x), std::move(du), n);
}

/// Shared constraint geometry at one state: dc, d2c, X = g^{-1} dc^T and the
/// Gram matrix Lambda = dc g^{-1} dc^T.
template <class S>
struct ConstraintFrame {
    std::size_t n = 0, k = 0;
    MapJetT<S> cjet;
    std::vector<S> gm;      // n*n
    std::vector<S> X;       // n*k, columns g^{-1} dc^T
    std::vector<S> gram;    // k*k
};

template <class S>
ConstraintFrame<S> constraint_frame(const MetricField& g, const LevelSetConstraint& cst,
                                    const S& t, std::span<const S> x, bool want_second) {
    ConstraintFrame<S> fr;
    fr.n = cst.ambient_dim();
    fr.k = cst.codim();
    fr.cjet = map_jet_t<S>(cst.map(), x, want_second);
    fr.gm = metric_value(g, t, x);
    fr.X.assign(fr.n * fr.k, S(0.0));
    for (std::size_t c = 0; c < fr.k; ++c) {
        std::vector<S> col(fr.n);
        for (std::size_t i = 0; i < fr.n; ++i) col[i] = fr.cjet.jac[c * fr.n + i];
        std::vector<S> sol = lu_solve(std::vector<S>(fr.gm), std::move(col), fr.n);
        for (std::size_t i = 0; i < fr.n; ++i) fr.X[i * fr.k + c] = sol[i];
    }
    fr.gram.assign(fr.k * fr.k, S(0.0));
    for (std::size_t r = 0; r < fr.k; ++r)
        for (std::size_t c = 0; c < fr.k; ++c) {
            S acc = S(0.0);
            for (std::size_t i = 0; i < fr.n; ++i) acc = acc + fr.cjet.jac[r * fr.n + i] * fr.X[i * fr.k + c];
            fr.gram[r * fr.k + c] = acc;
        }
    return fr;
}

/// Normal correction X * Lambda^{-1} * rhs_k.
template <class S>
std::vector<S> normal_lift(const ConstraintFrame<S>& fr, std::vector<S> rhs) {
    std::vector<S> lam = lu_solve(std::vector<S>(fr.gram), std::move(rhs), fr.k);
    std::vector<S> out(fr.n, S(0.0));
    for (std::size_t i = 0; i < fr.n; ++i)
        for (std::size_t c = 0; c < fr.k; ++c) out[i] = out[i] + fr.X[i * fr.k + c] * lam[c];
    return out;
}

template <class S>
std::vector<S> dc_times(const ConstraintFrame<S>& fr, std::span<const S> w) {
    std::vector<S> out(fr.k, S(0.0));
    for (std::size_t c = 0; c < fr.k; ++c)
        for (std::size_t i = 0; i < fr.n; ++i) out[c] = out[c] + fr.cjet.jac[c * fr.n + i] * w[i];
    return out;
}

/// g-orthogonal projection onto ker dc: w - X Lambda^{-1} dc w.
template <class S>
std::vector<S> project_tangent(const ConstraintFrame<S>& fr, std::span<const S> w) {
    std::vector<S> corr = normal_lift(fr, dc_times(fr, w));
    std::vector<S> out(fr.n);
    for (std::size_t i = 0; i < fr.n; ++i) out[i] = w[i] - corr[i];
    return out;
}

/// Normal-valued second fundamental form contracted with (v, v): the normal
/// part of the ambient acceleration of constrained motion,
///   B(v, v) = -X Lambda^{-1} [ d2c(v, v) + dc K2(t, x, v) ].
template <class S>
std::vector<S> second_form(const MetricField& g, const ConstraintFrame<S>& fr,
                           const S& t, std::span<const S> x, std::span<const S> v) {
    std::vector<S> k2 = metric_k2(g, t, x, v);
    std::vector<S> rhs = dc_times(fr, std::span<const S>(k2.data(), fr.n));
    for (std::size_t c = 0; c < fr.k; ++c) {
        S quad = S(0.0);
        for (std::size_t i = 0; i < fr.n; ++i)
            for (std::size_t j = 0; j < fr.n; ++j)
                quad = quad + fr.cjet.second[c * fr.n * fr.n + i * fr.n + j] * v[i] * v[j];
        rhs[c] = rhs[c] + quad;
    }
    std::vector<S> lift = normal_lift(fr, std::move(rhs));
    for (S& e : lift) e = -e;
    return lift;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Public double-precision surface

inline void require_positive_definite(const Mat& g) {
    Eigen::SelfAdjointEigenSolver<Mat> es(g);
    if (es.eigenvalues()(0) <= 0.0)
        throw ValidationError("metric is not positive definite at the evaluation point");
}

/// Spray coefficients K2 of the kinetic Lagrangian (1/2) g(x)(y, y); the
/// Lagrangian vector field of that Lagrangian satisfies c'' = K2.
inline Vec metric_spray_K2(const MetricField& g, double t, const Vec& x, const Vec& y) {
    require_positive_definite(g.value(t, x));
    std::vector<double> k2 = detail::metric_k2<double>(
        g, t, std::span<const double>(x.data(), x.size()), std::span<const double>(y.data(), y.size()));
    return Eigen::Map<const Vec>(k2.data(), static_cast<Eigen::Index>(g.dim()));
}

inline Vec grad_U(const MetricField& g, const PotentialField& U, double t, const Vec& x) {
    require_positive_definite(g.value(t, x));
    std::vector<double> gr = detail::metric_grad<double>(g, U, t, std::span<const double>(x.data(), x.size()));
    return Eigen::Map<const Vec>(gr.data(), static_cast<Eigen::Index>(g.dim()));
}

/// Second-order field of the mechanical system (g, U): X2 = K2 - grad U.
inline Vec potential_spray(const MetricField& g, const PotentialField& U, const TangentSample& v) {
    return metric_spray_K2(g, v.t, v.x, v.y) - grad_U(g, U, v.t, v.x);
}

/// Kinetic-minus-potential Lagrangian (1/2) g(t,x)(y,y) - U(t,x) as an
/// evaluator; the downstream spray and connection pipeline applies unchanged.
inline TimeLagrangian metric_lagrangian(const MetricField& g,
                                        std::optional<PotentialField> U = std::nullopt,
                                        std::string chart = "main") {
    const std::size_t n = g.dim();
    Interval t_iv = g.domain()[0];
    std::vector<Interval> xiv(n);
    for (std::size_t i = 0; i < n; ++i) xiv[i] = g.domain()[1 + i];
    Box dom = phase_box(t_iv, Box(xiv), Box::unbounded(n));
    MetricField gc = g;
    ScalarField L(n, std::move(dom), [gc, U, n](const auto& t, auto x, auto y) {
        using S = std::remove_cvref_t<decltype(t)>;
        std::vector<S> gm(n * n);
        gc.eval(t, x, std::span<S>(gm.data(), gm.size()));
        S acc = S(0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) acc = acc + gm[i * n + j] * y[i] * y[j];
        acc = 0.5 * acc;
        if (U) acc = acc - U->eval(t, x);
        return acc;
    });
    return TimeLagrangian(std::move(L), std::move(chart));
}

/// Lagrangian of a time-dependent metric family (no potential term).
inline TimeLagrangian time_metric_lagrangian(const MetricField& g, std::string chart = "main") {
    return metric_lagrangian(g, std::nullopt, std::move(chart));
}

/// Musical isomorphisms of g at (t, x).
inline Vec musical_flat(const MetricField& g, double t, const Vec& x, const Vec& y) {
    Mat gm = g.value(t, x);
    require_positive_definite(gm);
    return gm * y;
}
inline Vec musical_sharp(const MetricField& g, double t, const Vec& x, const Vec& p) {
    Mat gm = g.value(t, x);
    require_positive_definite(gm);
    return solve(gm, p);
}

namespace detail {

inline void require_frame_ok(const LevelSetConstraint& cst, const Vec& x) {
    DerivativeBundle d = map_jet(cst.map(), x, /*want_second=*/false);
    if (singular_value_proxy(d.jacobian).sigma_min <= 1e-10)
        throw ValidationError("constraint Jacobian is rank deficient at the evaluation point");
}

}  // namespace detail

/// g-orthogonal projection of w onto the tangent space of N at x.
inline Vec tangent_project(const LevelSetConstraint& cst, const MetricField& g,
                           double t, const Vec& x, const Vec& w) {
    if (!cst.on_constraint(x)) throw ValidationError("projection point is off the constraint set");
    detail::require_frame_ok(cst, x);
    auto fr = detail::constraint_frame<double>(g, cst, t, std::span<const double>(x.data(), x.size()),
                                               /*want_second=*/false);
    std::vector<double> p = detail::project_tangent(fr, std::span<const double>(w.data(), w.size()));
    return Eigen::Map<const Vec>(p.data(), static_cast<Eigen::Index>(cst.ambient_dim()));
}

/// B(v, v): normal component of the ambient acceleration of constrained
/// motion; for g = I this is -dc^T (dc dc^T)^{-1} d2c(v, v).
inline Vec second_fundamental_form(const LevelSetConstraint& cst, const MetricField& g,
                                   double t, const Vec& x, const Vec& v) {
    if (!cst.on_constraint(x)) throw ValidationError("evaluation point is off the constraint set");
    detail::require_frame_ok(cst, x);
    auto fr = detail::constraint_frame<double>(g, cst, t, std::span<const double>(x.data(), x.size()),
                                               /*want_second=*/true);
    std::vector<double> dcv = detail::dc_times(fr, std::span<const double>(v.data(), v.size()));
    for (double e : dcv)
        if (std::abs(e) > 1e-8 * (1.0 + v.lpNorm<Eigen::Infinity>()))
            throw ValidationError("direction is not tangent to the constraint set");
    std::vector<double> b = detail::second_form(g, fr, t, std::span<const double>(x.data(), x.size()),
                                                std::span<const double>(v.data(), v.size()));
    return Eigen::Map<const Vec>(b.data(), static_cast<Eigen::Index>(cst.ambient_dim()));
}

/// Perfect reaction force R(t, v) = flat(B(v, v)) - flat(normal part of
/// sharp F(t, v)); a covector whose sharp is g-normal to N.
inline Vec reaction_force(const LevelSetConstraint& cst, const MetricField& g, const ExternalForce& F,
                          double t, const Vec& x, const Vec& v) {
    if (!cst.on_constraint(x)) throw ValidationError("evaluation point is off the constraint set");
    detail::require_frame_ok(cst, x);
    auto fr = detail::constraint_frame<double>(g, cst, t, std::span<const double>(x.data(), x.size()),
                                               /*want_second=*/true);
    std::vector<double> b = detail::second_form(g, fr, t, std::span<const double>(x.data(), x.size()),
                                                std::span<const double>(v.data(), v.size()));
    Vec f = F.covector(TangentSample{t, x, v});
    std::vector<double> sharp = lu_solve(std::vector<double>(fr.gm),
                                         std::vector<double>(f.data(), f.data() + f.size()), fr.n);
    std::vector<double> nf = detail::normal_lift(fr, detail::dc_times(fr, std::span<const double>(sharp.data(), fr.n)));
    Mat gm = g.value(t, x);
    Vec bv = Eigen::Map<const Vec>(b.data(), static_cast<Eigen::Index>(fr.n));
    Vec nv = Eigen::Map<const Vec>(nf.data(), static_cast<Eigen::Index>(fr.n));
    return gm * (bv - nv);
}

/// Ambient-coordinate spray of the constrained system (N, g|_N, F|_N),
/// realized as X2 = K2 + Y2 + W2 with W2 the vertical field of the reaction
/// force evaluated on the tangentially projected velocity. Trajectories keep
/// |c(x)| and |dc x'| small up to integrator drift; no stabilization is
/// applied unless a post-step projection hook is installed.
inline SemisprayField constrained_spray(const MetricField& g, const ExternalForce& F,
                                        const LevelSetConstraint& cst, std::string chart = "ambient") {
    const std::size_t n = cst.ambient_dim();
    if (g.dim() != n || F.dim() != n)
        throw ValidationError("metric, force and constraint dimensions must agree");
    Interval t_iv = g.domain()[0];
    std::vector<Interval> xiv(n);
    for (std::size_t i = 0; i < n; ++i) xiv[i] = g.domain()[1 + i];
    Box dom = phase_box(t_iv, Box(xiv), Box::unbounded(n));
    MetricField gc = g;
    ExternalForce fc = F;
    LevelSetConstraint cc = cst;

    auto eval = [gc, fc, cc, n](const auto& t, auto x, auto w, auto out) {
        using S = std::remove_cvref_t<decltype(t)>;
        auto fr = detail::constraint_frame<S>(gc, cc, t, x, /*want_second=*/true);
        std::vector<S> k2 = detail::metric_k2(gc, t, x, w);
        std::vector<S> fcov(n);
        fc.eval(t, x, w, std::span<S>(fcov.data(), n));
        std::vector<S> y2 = lu_solve(std::vector<S>(fr.gm), std::vector<S>(fcov), n);

        std::vector<S> v = detail::project_tangent(fr, w);
        std::vector<S> b = detail::second_form(gc, fr, t, x, std::span<const S>(v.data(), n));
        std::vector<S> fv(n);
        fc.eval(t, x, std::span<const S>(v.data(), n), std::span<S>(fv.data(), n));
        std::vector<S> sharp_fv = lu_solve(std::vector<S>(fr.gm), std::move(fv), n);
        std::vector<S> nf = detail::normal_lift(fr, detail::dc_times(fr, std::span<const S>(sharp_fv.data(), n)));

        for (std::size_t i = 0; i < n; ++i) out[i] = -(k2[i] + y2[i] + b[i] - nf[i]);
    };

    if (F.has_derivatives())
        return SemisprayField::from_generic(std::move(chart), n, std::move(dom), Provenance::constrained, eval);
    return SemisprayField::from_double(std::move(chart), n, std::move(dom), Provenance::constrained, eval);
}

/// Post-step hook that re-projects the state onto the constraint (Newton step
/// along the g-normal bundle for x, tangent projection for y). Off by
/// default; acceptance runs measure raw drift.
inline std::function<void(double, Vec&, Vec&)> constraint_projection_hook(const MetricField& g,
                                                                          const LevelSetConstraint& cst,
                                                                          double t0, double s0) {
    MetricField gc = g;
    LevelSetConstraint cc = cst;
    return [gc, cc, t0, s0](double s, Vec& x, Vec& y) {
        double t = t0 + (s - s0);
        for (int pass = 0; pass < 2; ++pass) {
            auto fr = detail::constraint_frame<double>(gc, cc, t, std::span<const double>(x.data(), x.size()),
                                                       /*want_second=*/false);
            std::vector<double> cval(cc.codim());
            cc.map().eval(std::span<const double>(x.data(), x.size()), std::span<double>(cval.data(), cval.size()));
            std::vector<double> corr = detail::normal_lift(fr, std::move(cval));
            for (std::size_t i = 0; i < cc.ambient_dim(); ++i) x(static_cast<Eigen::Index>(i)) -= corr[i];
        }
        auto fr = detail::constraint_frame<double>(gc, cc, t, std::span<const double>(x.data(), x.size()),
                                                   /*want_second=*/false);
        std::vector<double> py = detail::project_tangent(fr, std::span<const double>(y.data(), y.size()));
        for (std::size_t i = 0; i < cc.ambient_dim(); ++i) y(static_cast<Eigen::Index>(i)) = py[i];
    };
}

}  // namespace tdmech
