#pragma once

#include <cmath>
#include <type_traits>

namespace tdmech {

/// First-order forward-mode scalar: value and one directional derivative.
/// Nested instantiations (e.g. Taylor2<Dual<double>>) raise the derivative order.
template <class S>
struct Dual {
    S v{};  // value
    S d{};  // directional derivative

    constexpr Dual() = default;
    constexpr Dual(double value) : v(value), d() {}
    constexpr Dual(S value, S deriv) : v(std::move(value)), d(std::move(deriv)) {}

    static constexpr Dual variable(S value) { return Dual(std::move(value), S(1.0)); }
    static constexpr Dual constant(S value) { return Dual(std::move(value), S(0.0)); }

    Dual& operator+=(const Dual& o) { v += o.v; d += o.d; return *this; }
    Dual& operator-=(const Dual& o) { v -= o.v; d -= o.d; return *this; }
};

/// Second-order directional Taylor scalar along one seed direction u:
/// f(p + e*u) = v + d*e + 0.5*h*e^2.  h is the full second directional
/// derivative, not the halved Taylor coefficient.
template <class S>
struct Taylor2 {
    S v{};  // value
    S d{};  // first directional coefficient
    S h{};  // second directional coefficient (u^T Hess u)

    constexpr Taylor2() = default;
    constexpr Taylor2(double value) : v(value), d(), h() {}
    constexpr Taylor2(S value, S first, S second)
        : v(std::move(value)), d(std::move(first)), h(std::move(second)) {}
};

// ---------------------------------------------------------------------------
// innermost double of a (possibly nested) forward-mode scalar; used for
// pivot selection and domain checks
inline double value_of(double x) { return x; }
template <class S> double value_of(const Dual<S>& x) { return value_of(x.v); }
template <class S> double value_of(const Taylor2<S>& x) { return value_of(x.v); }

// ---------------------------------------------------------------------------
// Dual arithmetic

template <class S> Dual<S> operator+(const Dual<S>& a, const Dual<S>& b) { return {a.v + b.v, a.d + b.d}; }
template <class S> Dual<S> operator-(const Dual<S>& a, const Dual<S>& b) { return {a.v - b.v, a.d - b.d}; }
template <class S> Dual<S> operator-(const Dual<S>& a) { return {-a.v, -a.d}; }
template <class S> Dual<S> operator+(const Dual<S>& a) { return a; }

template <class S> Dual<S> operator*(const Dual<S>& a, const Dual<S>& b) {
    return {a.v * b.v, a.d * b.v + a.v * b.d};
}
template <class S> Dual<S> operator/(const Dual<S>& a, const Dual<S>& b) {
    S q = a.v / b.v;
    return {q, (a.d - q * b.d) / b.v};
}

template <class S> Dual<S> operator+(const Dual<S>& a, double c) { return {a.v + c, a.d}; }
template <class S> Dual<S> operator+(double c, const Dual<S>& a) { return {a.v + c, a.d}; }
template <class S> Dual<S> operator-(const Dual<S>& a, double c) { return {a.v - c, a.d}; }
template <class S> Dual<S> operator-(double c, const Dual<S>& a) { return {c - a.v, -a.d}; }
template <class S> Dual<S> operator*(const Dual<S>& a, double c) { return {a.v * c, a.d * c}; }
template <class S> Dual<S> operator*(double c, const Dual<S>& a) { return {a.v * c, a.d * c}; }
template <class S> Dual<S> operator/(const Dual<S>& a, double c) { return {a.v / c, a.d / c}; }
template <class S> Dual<S> operator/(double c, const Dual<S>& a) { return Dual<S>(c) / a; }

// ---------------------------------------------------------------------------
// Dual math functions (chain rule; inner functions resolve by ADL for
// nested scalars, via std:: for double)

using std::cbrt;
using std::cos;
using std::exp;
using std::log;
using std::pow;
using std::sin;
using std::sqrt;

template <class S> Dual<S> sin(const Dual<S>& x) { return {sin(x.v), cos(x.v) * x.d}; }
template <class S> Dual<S> cos(const Dual<S>& x) { return {cos(x.v), -sin(x.v) * x.d}; }
template <class S> Dual<S> exp(const Dual<S>& x) { S e = exp(x.v); return {e, e * x.d}; }
template <class S> Dual<S> log(const Dual<S>& x) { return {log(x.v), x.d / x.v}; }
template <class S> Dual<S> sqrt(const Dual<S>& x) { S r = sqrt(x.v); return {r, x.d / (2.0 * r)}; }
template <class S> Dual<S> cbrt(const Dual<S>& x) {
    S r = cbrt(x.v);
    return {r, x.d / (3.0 * r * r)};
}
template <class S> Dual<S> pow(const Dual<S>& x, double p) {
    S f = pow(x.v, p);
    return {f, p * pow(x.v, p - 1.0) * x.d};
}

// ---------------------------------------------------------------------------
// Taylor2 arithmetic

template <class S> Taylor2<S> operator+(const Taylor2<S>& a, const Taylor2<S>& b) {
    return {a.v + b.v, a.d + b.d, a.h + b.h};
}
template <class S> Taylor2<S> operator-(const Taylor2<S>& a, const Taylor2<S>& b) {
    return {a.v - b.v, a.d - b.d, a.h - b.h};
}
template <class S> Taylor2<S> operator-(const Taylor2<S>& a) { return {-a.v, -a.d, -a.h}; }
template <class S> Taylor2<S> operator+(const Taylor2<S>& a) { return a; }

template <class S> Taylor2<S> operator*(const Taylor2<S>& a, const Taylor2<S>& b) {
    return {a.v * b.v, a.d * b.v + a.v * b.d, a.h * b.v + 2.0 * a.d * b.d + a.v * b.h};
}
template <class S> Taylor2<S> operator/(const Taylor2<S>& a, const Taylor2<S>& b) {
    // r = 1/b, then a*r:  r' = -b'/b^2,  r'' = (2 b'^2 - b b'')/b^3
    S iv = S(1.0) / b.v;
    S rd = -b.d * iv * iv;
    S rh = (2.0 * b.d * b.d - b.v * b.h) * iv * iv * iv;
    Taylor2<S> r{iv, rd, rh};
    return a * r;
}

template <class S> Taylor2<S> operator+(const Taylor2<S>& a, double c) { return {a.v + c, a.d, a.h}; }
template <class S> Taylor2<S> operator+(double c, const Taylor2<S>& a) { return {a.v + c, a.d, a.h}; }
template <class S> Taylor2<S> operator-(const Taylor2<S>& a, double c) { return {a.v - c, a.d, a.h}; }
template <class S> Taylor2<S> operator-(double c, const Taylor2<S>& a) { return {c - a.v, -a.d, -a.h}; }
template <class S> Taylor2<S> operator*(const Taylor2<S>& a, double c) { return {a.v * c, a.d * c, a.h * c}; }
template <class S> Taylor2<S> operator*(double c, const Taylor2<S>& a) { return {a.v * c, a.d * c, a.h * c}; }
template <class S> Taylor2<S> operator/(const Taylor2<S>& a, double c) { return {a.v / c, a.d / c, a.h / c}; }
template <class S> Taylor2<S> operator/(double c, const Taylor2<S>& a) { return Taylor2<S>(c) / a; }

// ---------------------------------------------------------------------------
// Taylor2 math functions: lift f through (f, f', f'') at the value point

template <class S> Taylor2<S> compose_taylor(const Taylor2<S>& u, S f, S f1, S f2) {
    return {std::move(f), f1 * u.d, f2 * u.d * u.d + f1 * u.h};
}

template <class S> Taylor2<S> sin(const Taylor2<S>& x) {
    S s = sin(x.v), c = cos(x.v);
    return compose_taylor(x, s, c, -s);
}
template <class S> Taylor2<S> cos(const Taylor2<S>& x) {
    S c = cos(x.v), s = sin(x.v);
    return compose_taylor(x, c, -s, -c);
}
template <class S> Taylor2<S> exp(const Taylor2<S>& x) {
    S e = exp(x.v);
    return compose_taylor(x, e, e, e);
}
template <class S> Taylor2<S> log(const Taylor2<S>& x) {
    S iv = S(1.0) / x.v;
    return compose_taylor(x, log(x.v), iv, -iv * iv);
}
template <class S> Taylor2<S> sqrt(const Taylor2<S>& x) {
    S r = sqrt(x.v);
    S f1 = S(0.5) / r;
    return compose_taylor(x, r, f1, S(-0.5) * f1 / x.v);
}
template <class S> Taylor2<S> cbrt(const Taylor2<S>& x) {
    S r = cbrt(x.v);
    S r2 = r * r;
    S f1 = S(1.0) / (3.0 * r2);
    S f2 = S(-2.0) / (9.0 * r2 * r2 * r);
    return compose_taylor(x, r, f1, f2);
}
template <class S> Taylor2<S> pow(const Taylor2<S>& x, double p) {
    S f = pow(x.v, p);
    S f1 = p * pow(x.v, p - 1.0);
    S f2 = p * (p - 1.0) * pow(x.v, p - 2.0);
    return compose_taylor(x, f, f1, f2);
}

}  // namespace tdmech
