#pragma once

#include <functional>
#include <span>
#include <string>

#include "tdmech/fields.hpp"

namespace tdmech {

namespace detail {

template <class S>
using CoeffFn = std::function<void(const S&, std::span<const S>, std::span<const S>, std::span<S>)>;

}  // namespace detail

/// Semispray coefficient field G(t, x, y) on one chart. The sign convention
/// is fixed engine-wide: geodesics solve x'' + G(t, x, x') = 0.
///
/// Built `from_generic`, the field also evaluates on first-order dual
/// scalars, which is what coefficient-derivative operations consume; built
/// `from_double` those operations raise CapabilityError.
class SemisprayField {
public:
    template <class F>
    static SemisprayField from_generic(std::string chart, std::size_t n, Box domain,
                                       Provenance provenance, F g) {
        SemisprayField s(std::move(chart), n, std::move(domain), provenance);
        s.g0_ = g;
        s.g1_ = std::move(g);
        return s;
    }

    static SemisprayField from_double(std::string chart, std::size_t n, Box domain,
                                      Provenance provenance, detail::CoeffFn<double> g) {
        SemisprayField s(std::move(chart), n, std::move(domain), provenance);
        s.g0_ = std::move(g);
        return s;
    }

    const std::string& chart() const { return chart_; }
    std::size_t dim() const { return n_; }
    const Box& domain() const { return domain_; }
    Provenance provenance() const { return provenance_; }
    bool has_derivatives() const { return static_cast<bool>(g1_); }

    /// Checked evaluation at a sample.
    Vec G(const TangentSample& v) const {
        domain_.require_inside(v.flat());
        Vec out(static_cast<Eigen::Index>(n_));
        g0_(v.t, std::span<const double>(v.x.data(), n_), std::span<const double>(v.y.data(), n_),
            std::span<double>(out.data(), n_));
        return out;
    }

    void eval(double t, std::span<const double> x, std::span<const double> y, std::span<double> out) const {
        g0_(t, x, y, out);
    }
    void eval(const Dual1& t, std::span<const Dual1> x, std::span<const Dual1> y, std::span<Dual1> out) const {
        if (!g1_) throw CapabilityError("semispray field was built without derivative support");
        g1_(t, x, y, out);
    }

private:
    SemisprayField(std::string chart, std::size_t n, Box domain, Provenance p)
        : chart_(std::move(chart)), n_(n), domain_(std::move(domain)), provenance_(p) {
        if (domain_.dim() != 1 + 2 * n_)
            throw ValidationError("semispray domain must cover (t, x, y)");
    }

    std::string chart_;
    std::size_t n_;
    Box domain_;
    Provenance provenance_;
    detail::CoeffFn<double> g0_;
    detail::CoeffFn<Dual1> g1_;
};

/// Nonlinear connection coefficients on one chart: N0(t,x,y) acts on the time
/// slot as N0 * s, N1(t,x,y) on the space slot as the matrix N1 * a.
class ConnectionField {
public:
    using N0Fn = std::function<void(double, std::span<const double>, std::span<const double>, std::span<double>)>;
    // out is n*n row-major
    using N1Fn = std::function<void(double, std::span<const double>, std::span<const double>, std::span<double>)>;

    ConnectionField(std::string chart, std::size_t n, Box domain, N0Fn n0, N1Fn n1)
        : chart_(std::move(chart)), n_(n), domain_(std::move(domain)),
          n0_(std::move(n0)), n1_(std::move(n1)) {
        if (domain_.dim() != 1 + 2 * n_)
            throw ValidationError("connection domain must cover (t, x, y)");
    }

    const std::string& chart() const { return chart_; }
    std::size_t dim() const { return n_; }
    const Box& domain() const { return domain_; }

    Vec N0(const TangentSample& v) const {
        domain_.require_inside(v.flat());
        Vec out(static_cast<Eigen::Index>(n_));
        n0_(v.t, std::span<const double>(v.x.data(), n_), std::span<const double>(v.y.data(), n_),
            std::span<double>(out.data(), n_));
        return out;
    }
    Mat N1(const TangentSample& v) const {
        domain_.require_inside(v.flat());
        std::vector<double> buf(n_ * n_);
        n1_(v.t, std::span<const double>(v.x.data(), n_), std::span<const double>(v.y.data(), n_),
            std::span<double>(buf.data(), buf.size()));
        return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            buf.data(), static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_));
    }

private:
    std::string chart_;
    std::size_t n_;
    Box domain_;
    N0Fn n0_;
    N1Fn n1_;
};

/// Time-dependent external force: a covector F(t, x, y) in the coordinates of
/// the chart, paired against velocity directions.
class ExternalForce {
public:
    template <class F>
    static ExternalForce from_generic(std::size_t n, Box domain, F f) {
        ExternalForce e(n, std::move(domain));
        e.f0_ = f;
        e.f1_ = std::move(f);
        return e;
    }
    static ExternalForce from_double(std::size_t n, Box domain, detail::CoeffFn<double> f) {
        ExternalForce e(n, std::move(domain));
        e.f0_ = std::move(f);
        return e;
    }

    std::size_t dim() const { return n_; }
    const Box& domain() const { return domain_; }
    bool has_derivatives() const { return static_cast<bool>(f1_); }

    Vec covector(const TangentSample& v) const {
        domain_.require_inside(v.flat());
        Vec out(static_cast<Eigen::Index>(n_));
        f0_(v.t, std::span<const double>(v.x.data(), n_), std::span<const double>(v.y.data(), n_),
            std::span<double>(out.data(), n_));
        return out;
    }

    void eval(double t, std::span<const double> x, std::span<const double> y, std::span<double> out) const {
        f0_(t, x, y, out);
    }
    void eval(const Dual1& t, std::span<const Dual1> x, std::span<const Dual1> y, std::span<Dual1> out) const {
        if (!f1_) throw CapabilityError("external force was built without derivative support");
        f1_(t, x, y, out);
    }

private:
    ExternalForce(std::size_t n, Box domain) : n_(n), domain_(std::move(domain)) {
        if (domain_.dim() != 1 + 2 * n_)
            throw ValidationError("external force domain must cover (t, x, y)");
    }
    std::size_t n_;
    Box domain_;
    detail::CoeffFn<double> f0_;
    detail::CoeffFn<Dual1> f1_;
};

}  // namespace tdmech
