#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "tdmech/coefficients.hpp"
#include "tdmech/jets.hpp"
#include "tdmech/linsolve.hpp"

namespace tdmech {

struct Chart {
    std::string id;
    Box domain;
    std::size_t n = 0;
};

/// Chart transition on an overlap: a diffeomorphism with an explicitly stored
/// inverse (the catalog uses closed-form inverses; no iterative inversion).
/// Construction samples the overlap and rejects maps whose round trip exceeds
/// 1e-10 or whose Jacobian is numerically singular.
class Transition {
public:
    Transition(std::string from, std::string to, VectorMap forward, VectorMap inverse, Box overlap)
        : from_(std::move(from)), to_(std::move(to)),
          fwd_(std::move(forward)), inv_(std::move(inverse)), overlap_(std::move(overlap)) {
        if (fwd_.dim_in() != fwd_.dim_out() || inv_.dim_in() != inv_.dim_out() ||
            fwd_.dim_in() != inv_.dim_in() || overlap_.dim() != fwd_.dim_in())
            throw ValidationError("transition maps must be square and of matching dimension");
        validate();
    }

    const std::string& from() const { return from_; }
    const std::string& to() const { return to_; }
    std::size_t dim() const { return fwd_.dim_in(); }
    const VectorMap& forward() const { return fwd_; }
    const VectorMap& inverse() const { return inv_; }
    const Box& overlap() const { return overlap_; }

    // overlap membership with a 1e-12 boundary margin against floating drift
    bool in_overlap(const Vec& x) const {
        return overlap_.contains(std::span<const double>(x.data(), x.size()), 1e-12);
    }
    void require_overlap(const Vec& x) const {
        overlap_.require_inside(std::span<const double>(x.data(), x.size()), 1e-12);
    }

private:
    void validate() const {
        for (const auto& p : probe_points()) {
            Vec x = Eigen::Map<const Vec>(p.data(), static_cast<Eigen::Index>(p.size()));
            Vec image = fwd_.value(x);
            Vec back = inv_.value(image);
            if ((back - x).lpNorm<Eigen::Infinity>() > 1e-10)
                throw ValidationError("transition inverse fails the round-trip check");
            DerivativeBundle d = map_jet(fwd_, x, /*want_second=*/false);
            if (singular_value_proxy(d.jacobian).sigma_min <= 1e-12)
                throw ValidationError("transition Jacobian is singular at a probe point");
        }
    }

    std::vector<std::vector<double>> probe_points() const {
        const std::size_t n = overlap_.dim();
        std::vector<double> c = overlap_.center();
        std::vector<std::vector<double>> pts{c};
        for (std::size_t k = 0; k < n; ++k) {
            double half = std::isfinite(overlap_[k].hi) && std::isfinite(overlap_[k].lo)
                              ? 0.5 * (overlap_[k].hi - overlap_[k].lo)
                              : 1.0;
            for (double s : {-0.8, 0.8}) {
                std::vector<double> p = c;
                p[k] += s * half;
                pts.push_back(std::move(p));
            }
        }
        return pts;
    }

    std::string from_, to_;
    VectorMap fwd_, inv_;
    Box overlap_;
};

/// (t, x, y) -> (t, phi(x), dphi(x) y)
inline TangentSample push_tangent(const Transition& tr, const TangentSample& v) {
    tr.require_overlap(v.x);
    DerivativeBundle d = map_jet(tr.forward(), v.x, /*want_second=*/false);
    return TangentSample{v.t, d.value, d.jacobian * v.y};
}

/// (t, x, y, z) -> (t, phi(x), dphi(x) y, dphi(x) z + d2phi(x)(y, y))
inline Jet2 push_jet2(const Transition& tr, const Jet2& j) {
    tr.require_overlap(j.x);
    DerivativeBundle d = map_jet(tr.forward(), j.x, /*want_second=*/true);
    const std::size_t n = tr.dim();
    Vec zp = d.jacobian * j.z;
    for (std::size_t i = 0; i < n; ++i)
        zp(static_cast<Eigen::Index>(i)) += j.y.dot(d.second[i] * j.y);
    return Jet2{j.t, d.value, d.jacobian * j.y, zp};
}

// ---------------------------------------------------------------------------
// Residual reports

struct ResidualReport {
    std::string law;
    std::size_t samples = 0;
    double max_residual = 0.0;
    std::size_t argmax_index = 0;
    TangentSample argmax_sample;
    std::vector<double> residuals;

    void record(const TangentSample& v, double r) {
        if (residuals.empty() || r > max_residual) {
            max_residual = r;
            argmax_index = residuals.size();
            argmax_sample = v;
        }
        residuals.push_back(r);
        samples = residuals.size();
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["law"] = law;
        j["samples"] = samples;
        j["max_residual"] = max_residual;
        j["argmax_index"] = argmax_index;
        j["argmax_sample"] = {
            {"t", argmax_sample.t},
            {"x", std::vector<double>(argmax_sample.x.data(), argmax_sample.x.data() + argmax_sample.x.size())},
            {"y", std::vector<double>(argmax_sample.y.data(), argmax_sample.y.data() + argmax_sample.y.size())}};
        j["residuals"] = residuals;
        return j;
    }
};

/// Residual of the semispray change-of-coordinates law,
///   G_b(t, phi(x), dphi(x) y) + d2phi(x)(y, y) = dphi(x) G_a(t, x, y),
/// in the max norm at each sample.
inline ResidualReport check_semispray_compat(const SemisprayField& a, const SemisprayField& b,
                                             const Transition& tr,
                                             std::span<const TangentSample> samples) {
    ResidualReport rep;
    rep.law = "semispray-compat";
    const std::size_t n = tr.dim();
    for (const TangentSample& v : samples) {
        tr.require_overlap(v.x);
        DerivativeBundle d = map_jet(tr.forward(), v.x, /*want_second=*/true);
        TangentSample vp{v.t, d.value, d.jacobian * v.y};
        Vec lhs = b.G(vp);
        for (std::size_t i = 0; i < n; ++i)
            lhs(static_cast<Eigen::Index>(i)) += v.y.dot(d.second[i] * v.y);
        Vec rhs = d.jacobian * a.G(v);
        rep.record(v, (lhs - rhs).lpNorm<Eigen::Infinity>());
    }
    return rep;
}

struct ConnectionCompatReport {
    ResidualReport n0;  // dphi N0_a(v) s = N0_b(v') s
    ResidualReport n1;  // dphi N1_a(v) a = N1_b(v') dphi a + d2phi(a, y)
};

/// Residuals of both connection-coefficient laws over the probe basis
/// s = 1, a in {e_1, ..., e_n}.
inline ConnectionCompatReport check_connection_compat(const ConnectionField& a, const ConnectionField& b,
                                                      const Transition& tr,
                                                      std::span<const TangentSample> samples) {
    ConnectionCompatReport rep;
    rep.n0.law = "connection-compat-N0";
    rep.n1.law = "connection-compat-N1";
    const std::size_t n = tr.dim();
    for (const TangentSample& v : samples) {
        tr.require_overlap(v.x);
        DerivativeBundle d = map_jet(tr.forward(), v.x, /*want_second=*/true);
        TangentSample vp{v.t, d.value, d.jacobian * v.y};

        Vec r0 = d.jacobian * a.N0(v) - b.N0(vp);
        rep.n0.record(v, r0.lpNorm<Eigen::Infinity>());

        Mat n1a = a.N1(v), n1b = b.N1(vp);
        double worst = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            Vec e = Vec::Zero(static_cast<Eigen::Index>(n));
            e(static_cast<Eigen::Index>(k)) = 1.0;
            Vec lhs = d.jacobian * (n1a * e);
            Vec rhs = n1b * (d.jacobian * e);
            for (std::size_t i = 0; i < n; ++i)
                rhs(static_cast<Eigen::Index>(i)) += e.dot(d.second[i] * v.y);
            worst = std::max(worst, (lhs - rhs).lpNorm<Eigen::Infinity>());
        }
        rep.n1.record(v, worst);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Construct-by-the-law factories; the usual oracle pattern is to build the
// target-chart field this way and verify the checker reports ~0.

/// Semispray on the target chart defined by transporting `a` through `tr`.
inline SemisprayField pushforward_spray(const SemisprayField& a, const Transition& tr) {
    const std::size_t n = tr.dim();
    Box dom = phase_box(a.domain()[0], tr.inverse().domain(), Box::unbounded(n));
    VectorMap inv = tr.inverse();
    VectorMap fwd = tr.forward();

    auto g = [a, inv, fwd, n](const auto& t, auto xp, auto yp, auto out) {
        using S = std::remove_cvref_t<decltype(t)>;
        std::vector<S> x(n);
        inv.eval(xp, std::span<S>(x.data(), n));
        MapJetT<S> dj = map_jet_t<S>(fwd, std::span<const S>(x.data(), n), /*want_second=*/true);
        // y = dphi(x)^{-1} y'
        std::vector<S> jac = dj.jac;
        std::vector<S> rhs(yp.begin(), yp.end());
        std::vector<S> y = lu_solve(std::move(jac), std::move(rhs), n);
        std::vector<S> ga(n);
        a.eval(t, std::span<const S>(x.data(), n), std::span<const S>(y.data(), n),
               std::span<S>(ga.data(), n));
        for (std::size_t i = 0; i < n; ++i) {
            S acc = S(0.0);
            for (std::size_t j = 0; j < n; ++j) acc = acc + dj.jac[i * n + j] * ga[j];
            S quad = S(0.0);
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t k = 0; k < n; ++k)
                    quad = quad + dj.second[i * n * n + j * n + k] * y[j] * y[k];
            out[i] = acc - quad;
        }
    };

    if (a.has_derivatives())
        return SemisprayField::from_generic(tr.to(), n, std::move(dom), a.provenance(), g);
    return SemisprayField::from_double(tr.to(), n, std::move(dom), a.provenance(), g);
}

/// Connection on the target chart defined by transporting `a` through `tr`.
inline ConnectionField pushforward_connection(const ConnectionField& a, const Transition& tr) {
    const std::size_t n = tr.dim();
    Box dom = phase_box(a.domain()[0], tr.inverse().domain(), Box::unbounded(n));
    VectorMap inv = tr.inverse();
    VectorMap fwd = tr.forward();

    auto pulled_sample = [inv, fwd, n](double t, std::span<const double> xp, std::span<const double> yp) {
        Vec xpv = Eigen::Map<const Vec>(xp.data(), static_cast<Eigen::Index>(n));
        Vec x = inv.value(xpv);
        DerivativeBundle d = map_jet(fwd, x, /*want_second=*/true);
        Vec y = d.jacobian.partialPivLu().solve(Eigen::Map<const Vec>(yp.data(), static_cast<Eigen::Index>(n)));
        return std::tuple<TangentSample, DerivativeBundle>{TangentSample{t, x, y}, std::move(d)};
    };

    auto n0 = [a, pulled_sample, n](double t, std::span<const double> xp, std::span<const double> yp,
                                    std::span<double> out) {
        auto [v, d] = pulled_sample(t, xp, yp);
        Vec r = d.jacobian * a.N0(v);
        for (std::size_t i = 0; i < n; ++i) out[i] = r(static_cast<Eigen::Index>(i));
    };
    auto n1 = [a, pulled_sample, n](double t, std::span<const double> xp, std::span<const double> yp,
                                    std::span<double> out) {
        auto [v, d] = pulled_sample(t, xp, yp);
        // N1_b = (dphi N1_a - C) dphi^{-1},  C(:, j) = d2phi(e_j, y)
        Mat C(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                C(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = (d.second[i].row(static_cast<Eigen::Index>(j)) * v.y).value();
        Mat M = d.jacobian * a.N1(v) - C;
        Mat res = d.jacobian.transpose().partialPivLu().solve(M.transpose()).transpose();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                out[i * n + j] = res(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    };

    return ConnectionField(tr.to(), n, std::move(dom), n0, n1);
}

}  // namespace tdmech
