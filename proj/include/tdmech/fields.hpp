#pragma once

#include <functional>
#include <span>
#include <utility>

#include "tdmech/domain.hpp"
#include "tdmech/dual.hpp"
#include "tdmech/types.hpp"

namespace tdmech {

using Dual1 = Dual<double>;
using T2 = Taylor2<double>;
using T2D = Taylor2<Dual<double>>;

/// Scalar field L(t, x, y) on an open box of R x R^n x R^n.
///
/// The defining callable is generic over the scalar type; construction
/// instantiates it at double and at the forward-mode scalars so the same
/// definition serves plain evaluation, first derivatives and directional
/// second derivatives. Evaluation is pure and the object is immutable, so
/// concurrent use is safe.
class ScalarField {
public:
    template <class F>
    ScalarField(std::size_t n, Box domain, F f)
        : n_(n), domain_(std::move(domain)),
          f0_(f), f1_(f), f2_(f), f3_(std::move(f)) {
        if (domain_.dim() != 1 + 2 * n_)
            throw ValidationError("scalar field domain must cover (t, x, y)");
    }

    std::size_t dim() const { return n_; }
    const Box& domain() const { return domain_; }

    double operator()(double t, std::span<const double> x, std::span<const double> y) const { return f0_(t, x, y); }
    Dual1 operator()(const Dual1& t, std::span<const Dual1> x, std::span<const Dual1> y) const { return f1_(t, x, y); }
    T2 operator()(const T2& t, std::span<const T2> x, std::span<const T2> y) const { return f2_(t, x, y); }
    T2D operator()(const T2D& t, std::span<const T2D> x, std::span<const T2D> y) const { return f3_(t, x, y); }

    /// Checked evaluation at a sample point.
    double value(const TangentSample& v) const {
        domain_.require_inside(v.flat());
        return f0_(v.t, std::span<const double>(v.x.data(), v.x.size()),
                   std::span<const double>(v.y.data(), v.y.size()));
    }

private:
    template <class S>
    using Fn = std::function<S(const S&, std::span<const S>, std::span<const S>)>;

    std::size_t n_;
    Box domain_;
    Fn<double> f0_;
    Fn<Dual1> f1_;
    Fn<T2> f2_;
    Fn<T2D> f3_;
};

/// Map R^n -> R^m, twice continuously differentiable on its declared box.
/// Houses chart transitions, diffeomorphisms and constraint defining maps.
class VectorMap {
public:
    template <class F>
    VectorMap(std::size_t n_in, std::size_t n_out, Box domain, F f)
        : n_in_(n_in), n_out_(n_out), domain_(std::move(domain)),
          f0_(f), f1_(f), f2_(f), f3_(std::move(f)) {
        if (domain_.dim() != n_in_)
            throw ValidationError("vector map domain dimension mismatch");
    }

    std::size_t dim_in() const { return n_in_; }
    std::size_t dim_out() const { return n_out_; }
    const Box& domain() const { return domain_; }

    template <class S>
    void eval(std::span<const S> in, std::span<S> out) const {
        if constexpr (std::is_same_v<S, double>) f0_(in, out);
        else if constexpr (std::is_same_v<S, Dual1>) f1_(in, out);
        else if constexpr (std::is_same_v<S, T2>) f2_(in, out);
        else f3_(in, out);
    }

    /// Checked evaluation at a point.
    Vec value(const Vec& x) const {
        domain_.require_inside(std::span<const double>(x.data(), x.size()));
        Vec out(n_out_);
        f0_(std::span<const double>(x.data(), x.size()), std::span<double>(out.data(), out.size()));
        return out;
    }

private:
    template <class S>
    using Fn = std::function<void(std::span<const S>, std::span<S>)>;

    std::size_t n_in_, n_out_;
    Box domain_;
    Fn<double> f0_;
    Fn<Dual1> f1_;
    Fn<T2> f2_;
    Fn<T2D> f3_;
};

/// Identity map on an n-dimensional box.
inline VectorMap identity_map(std::size_t n, Box domain) {
    return VectorMap(n, n, std::move(domain), [](auto in, auto out) {
        for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i];
    });
}

/// Composition g(f(x)); domain is f's.
inline VectorMap compose(const VectorMap& g, const VectorMap& f) {
    if (f.dim_out() != g.dim_in())
        throw ValidationError("compose: inner output dimension must match outer input");
    std::size_t mid = f.dim_out(), out_n = g.dim_out();
    return VectorMap(f.dim_in(), out_n, f.domain(),
                     [g, f, mid](auto in, auto out) {
                         using S = std::remove_cvref_t<decltype(in[0])>;
                         std::vector<S> tmp(mid);
                         f.eval(in, std::span<S>(tmp.data(), tmp.size()));
                         g.eval(std::span<const S>(tmp.data(), tmp.size()), out);
                     });
}

}  // namespace tdmech
