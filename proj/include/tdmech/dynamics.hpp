#pragma once

#include <cstdio>
#include <ostream>
#include <vector>

#include "tdmech/semispray.hpp"

namespace tdmech {

enum class StepMethod { rk4, dp54 };

/// Fixed-step classical Runge-Kutta or an adaptive embedded 5(4) pair.
/// The curve parameter s is identified with the time slot: t = t0 + (s - s0).
struct IntegratorConfig {
    StepMethod method = StepMethod::rk4;
    double h = 1e-3;          // fixed step (rk4)
    double abs_tol = 1e-10;   // adaptive tolerances (dp54)
    double rel_tol = 1e-10;
    double s0 = 0.0;
    double s1 = 1.0;
    std::size_t max_steps = 10'000'000;
    // optional stabilization applied after each accepted step (s, x, y)
    std::function<void(double, Vec&, Vec&)> post_step;
};

struct TrajectorySample {
    double s = 0.0;
    Vec x, y;
};

struct Trajectory {
    std::vector<TrajectorySample> samples;  // s strictly increasing
    std::string chart;
    Provenance provenance = Provenance::user;
    double t0 = 0.0, s0 = 0.0;
    StepMethod method = StepMethod::rk4;
    double h = 0.0;
    std::size_t steps = 0, rejected = 0;

    double t_of(double s) const { return t0 + (s - s0); }
};

namespace detail {

struct Rhs {
    const SemisprayField* S;
    double t0, s0;
    std::size_t n;
    mutable std::vector<double> g;

    void operator()(double s, const Vec& x, const Vec& y, Vec& dx, Vec& dy) const {
        double t = t0 + (s - s0);
        S->eval(t, std::span<const double>(x.data(), n), std::span<const double>(y.data(), n),
                std::span<double>(g.data(), n));
        dx = y;
        for (std::size_t i = 0; i < n; ++i) dy(static_cast<Eigen::Index>(i)) = -g[i];
    }
};

inline void check_state(const SemisprayField& S, double t, const Vec& x, const Vec& y) {
    if (!x.allFinite() || !y.allFinite())
        throw IntegrationError("state became non-finite during integration");
    std::vector<double> flat;
    flat.reserve(1 + 2 * x.size());
    flat.push_back(t);
    flat.insert(flat.end(), x.data(), x.data() + x.size());
    flat.insert(flat.end(), y.data(), y.data() + y.size());
    if (!S.domain().contains(flat, 1e-12))
        throw IntegrationError("trajectory escaped the declared coefficient domain");
}

}  // namespace detail

/// Solve x'' + G(t, x, x') = 0 from (t0, x0, y0) over cfg's span, advancing
/// t with s. Every accepted step is recorded as a sample.
inline Trajectory integrate(const SemisprayField& S, double t0, const Vec& x0, const Vec& y0,
                            const IntegratorConfig& cfg) {
    if (!(cfg.s1 > cfg.s0)) throw ValidationError("integration span must be increasing");
    if (!(cfg.h > 0.0)) throw ValidationError("step size must be positive");
    const std::size_t n = S.dim();
    detail::Rhs rhs{&S, t0, cfg.s0, n, std::vector<double>(n)};

    Trajectory traj;
    traj.chart = S.chart();
    traj.provenance = S.provenance();
    traj.t0 = t0;
    traj.s0 = cfg.s0;
    traj.method = cfg.method;
    traj.h = cfg.h;

    double s = cfg.s0;
    Vec x = x0, y = y0;
    detail::check_state(S, t0, x, y);
    traj.samples.push_back({s, x, y});

    Vec k1x(x.size()), k1y(x.size()), k2x(x.size()), k2y(x.size()),
        k3x(x.size()), k3y(x.size()), k4x(x.size()), k4y(x.size());

    if (cfg.method == StepMethod::rk4) {
        const double span = cfg.s1 - cfg.s0;
        const std::size_t nsteps = static_cast<std::size_t>(std::ceil(span / cfg.h - 1e-9));
        if (nsteps > cfg.max_steps) throw IntegrationError("step budget exhausted before reaching the end of the span");
        for (std::size_t k = 0; k < nsteps; ++k) {
            double h = std::min(cfg.h, cfg.s1 - s);
            rhs(s, x, y, k1x, k1y);
            rhs(s + 0.5 * h, x + 0.5 * h * k1x, y + 0.5 * h * k1y, k2x, k2y);
            rhs(s + 0.5 * h, x + 0.5 * h * k2x, y + 0.5 * h * k2y, k3x, k3y);
            rhs(s + h, x + h * k3x, y + h * k3y, k4x, k4y);
            x += (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
            y += (h / 6.0) * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
            s = (k + 1 == nsteps) ? cfg.s1 : cfg.s0 + cfg.h * static_cast<double>(k + 1);
            if (cfg.post_step) cfg.post_step(s, x, y);
            detail::check_state(S, t0 + (s - cfg.s0), x, y);
            traj.samples.push_back({s, x, y});
            ++traj.steps;
        }
        return traj;
    }

    // Dormand-Prince 5(4) embedded pair with step rejection.
    static const double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static const double a21 = 1.0 / 5;
    static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                        a65 = -5103.0 / 18656;
    static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static const double e1 = 5179.0 / 57600, e3 = 7571.0 / 16695, e4 = 393.0 / 640, e5 = -92097.0 / 339200,
                        e6 = 187.0 / 2100, e7 = 1.0 / 40;

    double h = cfg.h;
    const Eigen::Index m = x.size();
    std::vector<Vec> kx(7, Vec(m)), ky(7, Vec(m));
    while (s < cfg.s1 - 1e-14) {
        if (traj.steps + traj.rejected >= cfg.max_steps)
            throw IntegrationError("step budget exhausted before reaching the end of the span");
        h = std::min(h, cfg.s1 - s);

        rhs(s, x, y, kx[0], ky[0]);
        rhs(s + c2 * h, x + h * (a21 * kx[0]), y + h * (a21 * ky[0]), kx[1], ky[1]);
        rhs(s + c3 * h, x + h * (a31 * kx[0] + a32 * kx[1]), y + h * (a31 * ky[0] + a32 * ky[1]), kx[2], ky[2]);
        rhs(s + c4 * h, x + h * (a41 * kx[0] + a42 * kx[1] + a43 * kx[2]),
            y + h * (a41 * ky[0] + a42 * ky[1] + a43 * ky[2]), kx[3], ky[3]);
        rhs(s + c5 * h, x + h * (a51 * kx[0] + a52 * kx[1] + a53 * kx[2] + a54 * kx[3]),
            y + h * (a51 * ky[0] + a52 * ky[1] + a53 * ky[2] + a54 * ky[3]), kx[4], ky[4]);
        rhs(s + h, x + h * (a61 * kx[0] + a62 * kx[1] + a63 * kx[2] + a64 * kx[3] + a65 * kx[4]),
            y + h * (a61 * ky[0] + a62 * ky[1] + a63 * ky[2] + a64 * ky[3] + a65 * ky[4]), kx[5], ky[5]);

        Vec x5 = x + h * (b1 * kx[0] + b3 * kx[2] + b4 * kx[3] + b5 * kx[4] + b6 * kx[5]);
        Vec y5 = y + h * (b1 * ky[0] + b3 * ky[2] + b4 * ky[3] + b5 * ky[4] + b6 * ky[5]);
        rhs(s + h, x5, y5, kx[6], ky[6]);
        Vec x4 = x + h * (e1 * kx[0] + e3 * kx[2] + e4 * kx[3] + e5 * kx[4] + e6 * kx[5] + e7 * kx[6]);
        Vec y4 = y + h * (e1 * ky[0] + e3 * ky[2] + e4 * ky[3] + e5 * ky[4] + e6 * ky[5] + e7 * ky[6]);

        double err = 0.0;
        for (Eigen::Index i = 0; i < m; ++i) {
            double sx = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(x(i)), std::abs(x5(i)));
            double sy = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y(i)), std::abs(y5(i)));
            err += std::pow((x5(i) - x4(i)) / sx, 2) + std::pow((y5(i) - y4(i)) / sy, 2);
        }
        err = std::sqrt(err / static_cast<double>(2 * m));

        if (err <= 1.0) {
            s += h;
            x = std::move(x5);
            y = std::move(y5);
            if (cfg.post_step) cfg.post_step(s, x, y);
            detail::check_state(S, t0 + (s - cfg.s0), x, y);
            traj.samples.push_back({s, x, y});
            ++traj.steps;
        } else {
            ++traj.rejected;
        }
        double factor = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
        h *= std::min(5.0, std::max(0.2, factor));
        if (!(h > 1e-15)) throw IntegrationError("step size underflow");
    }
    return traj;
}

// ---------------------------------------------------------------------------
// Residual audits along a trajectory

struct ResidualSeries {
    std::vector<double> s;
    std::vector<double> value;
    double max_abs = 0.0;

    void record(double si, double r) {
        s.push_back(si);
        value.push_back(r);
        max_abs = std::max(max_abs, std::abs(r));
    }
};

namespace detail {

/// Three-point first derivative on a possibly non-uniform grid,
/// second-order accurate.
inline Vec deriv3(const Vec& fm, const Vec& f0, const Vec& fp, double h1, double h2) {
    double a = -h2 / (h1 * (h1 + h2));
    double b = (h2 - h1) / (h1 * h2);
    double c = h1 / (h2 * (h1 + h2));
    return a * fm + b * f0 + c * fp;
}

inline TangentSample at(const Trajectory& traj, std::size_t i) {
    const TrajectorySample& p = traj.samples[i];
    return TangentSample{traj.t_of(p.s), p.x, p.y};
}

}  // namespace detail

/// Euler-Lagrange audit: numerically differentiate the Legendre covector
/// p(s) = dL/dy(s, c, c') along the sampled curve and compare with dL/dx.
/// An F covector (optional) is subtracted for forced systems. Differencing
/// the sampled series keeps the audit sensitive to corrupted trajectories.
inline ResidualSeries el_residual(const TimeLagrangian& L, const Trajectory& traj,
                                  const ExternalForce* force = nullptr) {
    if (traj.samples.size() < 3) throw ValidationError("trajectory too short for a derivative audit");
    ResidualSeries out;
    std::vector<Vec> p(traj.samples.size());
    for (std::size_t i = 0; i < traj.samples.size(); ++i) p[i] = L.jet(detail::at(traj, i)).d_y;
    for (std::size_t i = 1; i + 1 < traj.samples.size(); ++i) {
        double h1 = traj.samples[i].s - traj.samples[i - 1].s;
        double h2 = traj.samples[i + 1].s - traj.samples[i].s;
        TangentSample v = detail::at(traj, i);
        Vec dpds = detail::deriv3(p[i - 1], p[i], p[i + 1], h1, h2);
        Vec r = dpds - L.jet(v).d_x;
        if (force) r -= force->covector(v);
        out.record(traj.samples[i].s, r.lpNorm<Eigen::Infinity>());
    }
    return out;
}

/// Pointwise variant: d/ds { dL/dy } is expanded by the chain rule with the
/// curve's second derivative reconstructed from the spray. This measures the
/// consistency of the trajectory's generating field with the Euler-Lagrange
/// field of L at the sampled states.
inline ResidualSeries el_residual_spray(const TimeLagrangian& L, const Trajectory& traj,
                                        const SemisprayField& S,
                                        const ExternalForce* force = nullptr) {
    ResidualSeries out;
    for (std::size_t i = 0; i < traj.samples.size(); ++i) {
        TangentSample v = detail::at(traj, i);
        LagrangianJet j = L.jet(v);
        Vec acc = -S.G(v);
        Vec r = j.dy_dt + j.dy_dx * v.y + j.dy_dy * acc - j.d_x;
        if (force) r -= force->covector(v);
        out.record(traj.samples[i].s, r.lpNorm<Eigen::Infinity>());
    }
    return out;
}

/// dE/ds + dL/dt along the trajectory; near zero for true unforced solutions.
inline ResidualSeries energy_rate_audit(const TimeLagrangian& L, const Trajectory& traj) {
    if (traj.samples.size() < 3) throw ValidationError("trajectory too short for a derivative audit");
    ResidualSeries out;
    std::vector<double> e(traj.samples.size());
    for (std::size_t i = 0; i < traj.samples.size(); ++i) e[i] = energy(L, detail::at(traj, i));
    for (std::size_t i = 1; i + 1 < traj.samples.size(); ++i) {
        double h1 = traj.samples[i].s - traj.samples[i - 1].s;
        double h2 = traj.samples[i + 1].s - traj.samples[i].s;
        double a = -h2 / (h1 * (h1 + h2));
        double b = (h2 - h1) / (h1 * h2);
        double c = h1 / (h2 * (h1 + h2));
        double dEds = a * e[i - 1] + b * e[i] + c * e[i + 1];
        out.record(traj.samples[i].s, dEds + L.jet(detail::at(traj, i)).d_t);
    }
    return out;
}

// ---------------------------------------------------------------------------
// External forces

/// Vertical field of a force: solve dy_dy(v) Y2 = F(v); the covector is
/// identified with its coordinate row.
inline Vec vertical_from_force(const TimeLagrangian& L, const ExternalForce& F, const TangentSample& v) {
    LagrangianJet j = L.jet(v);
    Vec f = F.covector(v);
    return solve(j.dy_dy, f);
}

/// Forced motion: G_forced = G - Y2, i.e. X2_forced = X2 + Y2. Requires a
/// Lagrangian-derived base spray; forcing anything else is undefined.
inline SemisprayField forced_spray(const SemisprayField& S, const TimeLagrangian& L, const ExternalForce& F) {
    if (S.provenance() != Provenance::lagrangian_vector_field &&
        S.provenance() != Provenance::canonical_from_lagrangian)
        throw ProvenanceError("forced_spray requires a spray derived from a Lagrangian");
    const std::size_t n = S.dim();
    ScalarField Lf = L.field();
    SemisprayField base = S;
    ExternalForce force = F;

    auto g = [base, Lf, force, n](const auto& t, auto x, auto y, auto out) {
        using S_ = std::remove_cvref_t<decltype(t)>;
        base.eval(t, x, y, out);
        JetT<S_> j = lagrangian_jet_t<S_>(Lf, t, x, y);
        std::vector<S_> f(n);
        force.eval(t, x, y, std::span<S_>(f.data(), n));
        std::vector<S_> y2 = lu_solve(std::move(j.dy_dy), std::move(f), n);
        for (std::size_t i = 0; i < n; ++i) out[i] = out[i] - y2[i];
    };
    if (S.has_derivatives() && F.has_derivatives())
        return SemisprayField::from_generic(S.chart(), n, S.domain(), Provenance::forced, g);
    return SemisprayField::from_double(S.chart(), n, S.domain(), Provenance::forced, g);
}

// ---------------------------------------------------------------------------
// CSV export

namespace detail {

inline void print_num(std::ostream& os, double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << buf;
}

}  // namespace detail

/// Header: s,t,x0..x{n-1},y0..y{n-1}; one row per sample.
inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    const std::size_t n = traj.samples.empty() ? 0 : static_cast<std::size_t>(traj.samples.front().x.size());
    os << "s,t";
    for (std::size_t i = 0; i < n; ++i) os << ",x" << i;
    for (std::size_t i = 0; i < n; ++i) os << ",y" << i;
    os << "\n";
    for (const TrajectorySample& p : traj.samples) {
        detail::print_num(os, p.s);
        os << ',';
        detail::print_num(os, traj.t_of(p.s));
        for (Eigen::Index i = 0; i < p.x.size(); ++i) { os << ','; detail::print_num(os, p.x(i)); }
        for (Eigen::Index i = 0; i < p.y.size(); ++i) { os << ','; detail::print_num(os, p.y(i)); }
        os << "\n";
    }
}

inline void write_residual_csv(std::ostream& os, const ResidualSeries& series) {
    os << "s,residual\n";
    for (std::size_t i = 0; i < series.s.size(); ++i) {
        detail::print_num(os, series.s[i]);
        os << ',';
        detail::print_num(os, series.value[i]);
        os << "\n";
    }
}

}  // namespace tdmech
