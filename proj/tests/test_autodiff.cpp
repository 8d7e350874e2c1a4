#include <catch2/catch_amalgamated.hpp>

#include "tdmech/dual.hpp"

using namespace tdmech;

using D = Dual<double>;
using T = Taylor2<double>;
using TD = Taylor2<Dual<double>>;

namespace {

// f(x) evaluated with a seeded Taylor2 gives (f, f', f'') at once
T seed(double a) { return T{a, 1.0, 0.0}; }

}  // namespace

TEST_CASE("dual arithmetic matches hand derivatives") {
    D x = D::variable(3.0);

    auto sq = x * x;
    CHECK(sq.v == 9.0);
    CHECK(sq.d == 6.0);

    auto r = 1.0 / x;
    CHECK_THAT(r.v, Catch::Matchers::WithinAbs(1.0 / 3.0, 1e-15));
    CHECK_THAT(r.d, Catch::Matchers::WithinAbs(-1.0 / 9.0, 1e-15));

    auto s = sin(x) * cos(x);
    CHECK_THAT(s.d, Catch::Matchers::WithinAbs(std::cos(6.0), 1e-14));  // d/dx sin x cos x = cos 2x

    auto e = exp(2.0 * x);
    CHECK_THAT(e.d, Catch::Matchers::WithinAbs(2.0 * std::exp(6.0), 1e-10));

    auto p = pow(x, 1.5);
    CHECK_THAT(p.d, Catch::Matchers::WithinAbs(1.5 * std::sqrt(3.0), 1e-13));

    auto c = cbrt(x);
    CHECK_THAT(c.d, Catch::Matchers::WithinAbs(1.0 / (3.0 * std::cbrt(9.0)), 1e-14));
}

TEST_CASE("taylor2 carries exact second directional coefficients") {
    SECTION("cubic") {
        // f = x^3: f'(2) = 12, f''(2) = 12
        auto f = seed(2.0) * seed(2.0) * seed(2.0);
        CHECK(f.v == 8.0);
        CHECK(f.d == 12.0);
        CHECK(f.h == 12.0);
    }
    SECTION("quotient") {
        // f = 1/x: f'' = 2/x^3
        auto f = 1.0 / seed(2.0);
        CHECK_THAT(f.v, Catch::Matchers::WithinAbs(0.5, 1e-15));
        CHECK_THAT(f.d, Catch::Matchers::WithinAbs(-0.25, 1e-15));
        CHECK_THAT(f.h, Catch::Matchers::WithinAbs(0.25, 1e-15));
    }
    SECTION("transcendentals") {
        auto f = exp(seed(1.0));
        CHECK_THAT(f.h, Catch::Matchers::WithinAbs(std::exp(1.0), 1e-14));

        auto g = log(seed(2.0));
        CHECK_THAT(g.h, Catch::Matchers::WithinAbs(-0.25, 1e-15));

        auto s = sin(seed(0.7));
        CHECK_THAT(s.h, Catch::Matchers::WithinAbs(-std::sin(0.7), 1e-15));

        auto q = sqrt(seed(4.0));
        CHECK_THAT(q.h, Catch::Matchers::WithinAbs(-1.0 / 32.0, 1e-15));

        auto c = cbrt(seed(8.0));
        // (x^{1/3})'' = -2/9 x^{-5/3}
        CHECK_THAT(c.h, Catch::Matchers::WithinAbs(-2.0 / (9.0 * 32.0), 1e-15));
    }
    SECTION("composition") {
        // f = exp(x^2) at 1: f' = 2e, f'' = 6e
        auto x = seed(1.0);
        auto f = exp(x * x);
        CHECK_THAT(f.d, Catch::Matchers::WithinAbs(2.0 * std::exp(1.0), 1e-13));
        CHECK_THAT(f.h, Catch::Matchers::WithinAbs(6.0 * std::exp(1.0), 1e-13));
    }
}

TEST_CASE("taylor2 over dual scalars yields third-order information") {
    // f(a, b) = a^2 b at (2, 3); Taylor2 direction seeds a, the dual layer
    // seeds b: h.d = d/db (f_aa) = 2
    TD a{D{2.0, 0.0}, D{1.0, 0.0}, D{0.0, 0.0}};
    TD b{D{3.0, 1.0}, D{0.0, 0.0}, D{0.0, 0.0}};
    TD f = a * a * b;
    CHECK(f.v.v == 12.0);   // value
    CHECK(f.v.d == 4.0);    // df/db
    CHECK(f.d.v == 12.0);   // df/da
    CHECK(f.d.d == 4.0);    // d2f/dadb
    CHECK(f.h.v == 6.0);    // d2f/da2
    CHECK(f.h.d == 2.0);    // d3f/da2 db
}

TEST_CASE("directional polarization recovers mixed partials") {
    // f(u, w) = sin(u) w^2: d2f/dudw = 2 cos(u) w
    double u = 0.4, w = 1.3;
    auto eval = [&](double du, double dw) {
        T tu{u, du, 0.0}, tw{w, dw, 0.0};
        return sin(tu) * tw * tw;
    };
    double huu = eval(1, 0).h;
    double hww = eval(0, 1).h;
    double hboth = eval(1, 1).h;
    double mixed = (hboth - huu - hww) / 2.0;
    CHECK_THAT(mixed, Catch::Matchers::WithinAbs(2.0 * std::cos(u) * w, 1e-14));
}
