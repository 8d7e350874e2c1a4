#include <catch2/catch_amalgamated.hpp>

#include <numbers>

#include "catalog_fixtures.hpp"
#include "tdmech/riemann.hpp"

using namespace tdmech;
using namespace fixtures;
using Catch::Matchers::WithinAbs;

namespace {

constexpr double kPi = std::numbers::pi;

MetricField euclidean(std::size_t n) {
    return MetricField(n, Box::cube(1 + n, -100.0, 100.0), [n](const auto& t, auto, auto out) {
        using S = std::remove_cvref_t<decltype(t)>;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) out[i * n + j] = S(i == j ? 1.0 : 0.0);
    });
}

/// diag(1, x0^2) on the half-space x0 > 0 (polar-style metric).
MetricField polar_like() {
    Box dom(std::vector<Interval>{{-10.0, 10.0}, {0.5, 3.0}, {-10.0, 10.0}});
    return MetricField(2, std::move(dom), [](const auto& t, auto x, auto out) {
        using S = std::remove_cvref_t<decltype(t)>;
        out[0] = S(1.0);
        out[1] = S(0.0);
        out[2] = S(0.0);
        out[3] = x[0] * x[0];
    });
}

MetricField diag_1_4() {
    return MetricField(2, Box::cube(3, -100.0, 100.0), [](const auto& t, auto, auto out) {
        using S = std::remove_cvref_t<decltype(t)>;
        out[0] = S(1.0); out[1] = S(0.0); out[2] = S(0.0); out[3] = S(4.0);
    });
}

PotentialField sin_t_x0(std::size_t n) {
    return PotentialField(n, Box::cube(1 + n, -100.0, 100.0), [](const auto& t, auto x) {
        return sin(t) * x[0];
    });
}

LevelSetConstraint unit_sphere() {
    return LevelSetConstraint(VectorMap(3, 1, Box::cube(3, -2.0, 2.0), [](auto in, auto out) {
        out[0] = 0.5 * (in[0] * in[0] + in[1] * in[1] + in[2] * in[2] - 1.0);
    }));
}

ExternalForce zero_force(std::size_t n) {
    return ExternalForce::from_generic(n, Box::cube(1 + 2 * n, -100.0, 100.0),
                                       [n](const auto& t, auto, auto, auto out) {
                                           using S = std::remove_cvref_t<decltype(t)>;
                                           (void)t;
                                           for (std::size_t i = 0; i < n; ++i) out[i] = S(0.0);
                                       });
}

Vec e(int i) {
    Vec v = Vec::Zero(3);
    v(i) = 1.0;
    return v;
}

}  // namespace

TEST_CASE("metric spray coefficients") {
    SECTION("euclidean metric is flat") {
        Vec k2 = metric_spray_K2(euclidean(2), 0.0, Vec::Constant(2, 0.7), (Vec(2) << 1.0, -2.0).finished());
        CHECK(k2.lpNorm<Eigen::Infinity>() <= 1e-14);
    }
    SECTION("polar-style metric reproduces r'' = r theta'^2") {
        Vec x = (Vec(2) << 2.0, 0.0).finished();
        Vec y = (Vec(2) << 0.0, 1.0).finished();
        Vec k2 = metric_spray_K2(polar_like(), 0.0, x, y);
        CHECK_THAT(k2(0), WithinAbs(2.0, 1e-12));
        CHECK_THAT(k2(1), WithinAbs(0.0, 1e-12));
    }
    SECTION("quadratic homogeneity in the velocity") {
        Vec x = (Vec(2) << 1.3, 0.4).finished();
        Vec y = (Vec(2) << 0.6, -0.9).finished();
        Vec base = metric_spray_K2(polar_like(), 0.0, x, y);
        Vec scaled = metric_spray_K2(polar_like(), 0.0, x, 3.0 * y);
        CHECK((scaled - 9.0 * base).lpNorm<Eigen::Infinity>() <= 1e-10);
    }
    SECTION("degenerate metric is rejected") {
        MetricField bad(1, Box::cube(2, -10.0, 10.0), [](const auto& t, auto x, auto out) {
            (void)t;
            out[0] = x[0] * x[0];
        });
        CHECK_THROWS_AS(metric_spray_K2(bad, 0.0, Vec::Zero(1), Vec::Constant(1, 1.0)), ValidationError);
    }
}

TEST_CASE("metric gradient") {
    SECTION("euclidean gradient of a linear function") {
        PotentialField U(2, Box::cube(3, -100.0, 100.0), [](const auto& t, auto x) {
            (void)t;
            return x[0] + 0.0 * x[1];
        });
        Vec g = grad_U(euclidean(2), U, 0.0, Vec::Zero(2));
        CHECK_THAT(g(0), WithinAbs(1.0, 1e-13));
        CHECK_THAT(g(1), WithinAbs(0.0, 1e-13));
    }
    SECTION("diagonal metric rescales the components") {
        PotentialField U(2, Box::cube(3, -100.0, 100.0), [](const auto& t, auto x) {
            (void)t;
            return x[1];
        });
        Vec g = grad_U(diag_1_4(), U, 0.0, Vec::Zero(2));
        CHECK_THAT(g(0), WithinAbs(0.0, 1e-13));
        CHECK_THAT(g(1), WithinAbs(0.25, 1e-13));
    }
    SECTION("time-dependent potential") {
        Vec g = grad_U(euclidean(2), sin_t_x0(2), kPi / 2, Vec::Zero(2));
        CHECK_THAT(g(0), WithinAbs(1.0, 1e-12));
        CHECK_THAT(g(1), WithinAbs(0.0, 1e-12));
    }
}

TEST_CASE("potential sprays") {
    SECTION("no potential reduces to the metric spray") {
        PotentialField zero(2, Box::cube(3, -100.0, 100.0), [](const auto& t, auto) {
            using S = std::remove_cvref_t<decltype(t)>;
            (void)t;
            return S(0.0);
        });
        Vec x = (Vec(2) << 1.1, 0.2).finished();
        Vec y = (Vec(2) << -0.4, 0.9).finished();
        TangentSample v{0.7, x, y};
        Vec with = potential_spray(polar_like(), zero, v);
        Vec without = metric_spray_K2(polar_like(), v.t, x, y);
        CHECK((with - without).lpNorm<Eigen::Infinity>() <= 1e-13);
    }
    SECTION("isotropic oscillator") {
        PotentialField U(2, Box::cube(3, -100.0, 100.0), [](const auto& t, auto x) {
            (void)t;
            return 0.5 * (x[0] * x[0] + x[1] * x[1]);
        });
        Vec x = (Vec(2) << 0.3, -1.2).finished();
        Vec out = potential_spray(euclidean(2), U, {0.0, x, Vec::Zero(2)});
        CHECK((out + x).lpNorm<Eigen::Infinity>() <= 1e-12);
    }
    SECTION("matches the generic Lagrangian route at 100 random samples") {
        std::vector<MetricField> metrics{euclidean(2), polar_like()};
        for (const MetricField& g : metrics) {
            TimeLagrangian L = metric_lagrangian(g, sin_t_x0(2));
            SampleBox box;
            box.x_lo = 0.6;  // keep x0 inside the polar-like domain
            box.x_hi = 2.9;
            auto samples = random_samples(2, 100, 149, box);
            double worst = 0.0;
            for (const TangentSample& v : samples) {
                Vec a = potential_spray(g, sin_t_x0(2), v);
                Vec b = lagrangian_vector_field(L, v);
                worst = std::max(worst, (a - b).lpNorm<Eigen::Infinity>());
            }
            CHECK(worst <= 1e-10);
        }
    }
}

TEST_CASE("time-dependent metric families") {
    SECTION("exponential family reproduces the damped equation") {
        MetricField g(1, Box::cube(2, -10.0, 10.0), [](const auto& t, auto, auto out) {
            out[0] = exp(2.0 * t);
        });
        TimeLagrangian L = time_metric_lagrangian(g);
        auto samples = random_samples(1, 25, 151);
        for (const TangentSample& v : samples) {
            Vec x2 = lagrangian_vector_field(L, v);
            CHECK_THAT(x2(0), WithinAbs(-2.0 * v.y(0), 1e-11));
        }
    }
    SECTION("quadratic-in-time conformal family moves the time slot into N0") {
        MetricField g(2, Box::cube(3, -10.0, 10.0), [](const auto& t, auto, auto out) {
            using S = std::remove_cvref_t<decltype(t)>;
            auto c = 1.0 + t * t;
            out[0] = c; out[1] = S(0.0); out[2] = S(0.0); out[3] = c;
        });
        TimeLagrangian L = time_metric_lagrangian(g);
        TangentSample v{1.0, Vec::Zero(2), (Vec(2) << 1.0, 0.0).finished()};
        ConnectionCoeffs c = connection_from_lagrangian(L, v);
        CHECK_THAT(c.N0(0), WithinAbs(1.0, 1e-11));  // 2t/(1+t^2) y0 at t = 1
        CHECK_THAT(c.N0(1), WithinAbs(0.0, 1e-11));
    }
    SECTION("identity family is the free particle") {
        TimeLagrangian L = time_metric_lagrangian(euclidean(2));
        Vec x2 = lagrangian_vector_field(L, {0.4, Vec::Constant(2, 0.3), Vec::Constant(2, -1.0)});
        CHECK(x2.lpNorm<Eigen::Infinity>() <= 1e-12);
    }
}

TEST_CASE("musical isomorphisms") {
    SECTION("euclidean metric is the identity pair") {
        Vec y = (Vec(2) << 0.3, -0.8).finished();
        CHECK((musical_flat(euclidean(2), 0.0, Vec::Zero(2), y) - y).isZero());
        CHECK((musical_sharp(euclidean(2), 0.0, Vec::Zero(2), y) - y).lpNorm<Eigen::Infinity>() <= 1e-14);
    }
    SECTION("diagonal example") {
        Vec y = (Vec(2) << 1.0, 1.0).finished();
        Vec p = musical_flat(diag_1_4(), 0.0, Vec::Zero(2), y);
        CHECK(p(0) == 1.0);
        CHECK(p(1) == 4.0);
        Vec back = musical_sharp(diag_1_4(), 0.0, Vec::Zero(2), p);
        CHECK((back - y).lpNorm<Eigen::Infinity>() <= 1e-14);
    }
    SECTION("round trip on random data") {
        std::mt19937 rng(157);
        std::uniform_real_distribution<double> u(0.6, 2.9);
        for (int trial = 0; trial < 30; ++trial) {
            Vec x = (Vec(2) << u(rng), u(rng)).finished();
            Vec y = (Vec(2) << u(rng) - 1.5, u(rng) - 1.5).finished();
            Vec round = musical_sharp(polar_like(), 0.0, x, musical_flat(polar_like(), 0.0, x, y));
            CHECK((round - y).lpNorm<Eigen::Infinity>() <= 1e-12);
        }
    }
}

TEST_CASE("tangent projection on a level set") {
    LevelSetConstraint sphere = unit_sphere();
    MetricField g = euclidean(3);
    SECTION("tangent vectors are fixed") {
        Vec w = e(1);
        Vec p = tangent_project(sphere, g, 0.0, e(0), w);
        CHECK((p - w).lpNorm<Eigen::Infinity>() <= 1e-14);
    }
    SECTION("normal vectors are annihilated") {
        Vec p = tangent_project(sphere, g, 0.0, e(0), e(0));
        CHECK(p.lpNorm<Eigen::Infinity>() <= 1e-14);
    }
    SECTION("mixed vector") {
        Vec w = (Vec(3) << 1.0, 1.0, 0.0).finished();
        Vec p = tangent_project(sphere, g, 0.0, e(0), w);
        CHECK_THAT(p(0), WithinAbs(0.0, 1e-14));
        CHECK_THAT(p(1), WithinAbs(1.0, 1e-14));
        CHECK_THAT(p(2), WithinAbs(0.0, 1e-14));
    }
    SECTION("off-constraint points are rejected") {
        CHECK_THROWS_AS(tangent_project(sphere, g, 0.0, 1.5 * e(0), e(1)), ValidationError);
    }
    SECTION("rank-deficient constraints are rejected") {
        LevelSetConstraint degenerate(VectorMap(3, 1, Box::cube(3, -2.0, 2.0), [](auto in, auto out) {
            auto q = 0.5 * (in[0] * in[0] + in[1] * in[1] + in[2] * in[2] - 1.0);
            out[0] = q * q;
        }));
        CHECK_THROWS_AS(tangent_project(degenerate, g, 0.0, e(0), e(1)), ValidationError);
    }
}

TEST_CASE("second fundamental form") {
    MetricField g = euclidean(3);
    SECTION("affine constraints are flat") {
        LevelSetConstraint plane(VectorMap(3, 1, Box::cube(3, -5.0, 5.0), [](auto in, auto out) {
            out[0] = in[2] - 1.0 + 0.0 * in[0];
        }));
        Vec x = (Vec(3) << 0.3, -0.7, 1.0).finished();
        Vec v = (Vec(3) << 1.0, 0.5, 0.0).finished();
        CHECK(second_fundamental_form(plane, g, 0.0, x, v).lpNorm<Eigen::Infinity>() <= 1e-14);
    }
    SECTION("unit sphere curves toward the center") {
        Vec b = second_fundamental_form(unit_sphere(), g, 0.0, e(0), e(1));
        CHECK((b + e(0)).lpNorm<Eigen::Infinity>() <= 1e-12);
    }
    SECTION("polarization is bilinear and symmetric") {
        LevelSetConstraint sphere = unit_sphere();
        Vec x = e(0);
        auto B = [&](const Vec& u, const Vec& v) {
            Vec upv = u + v;
            Vec a = second_fundamental_form(sphere, g, 0.0, x, upv);
            Vec bu = second_fundamental_form(sphere, g, 0.0, x, u);
            Vec bv = second_fundamental_form(sphere, g, 0.0, x, v);
            return Vec(0.5 * (a - bu - bv));
        };
        Vec u = e(1), v = e(2), u2 = (Vec(3) << 0.0, 0.4, -0.3).finished();
        CHECK((B(u, v) - B(v, u)).lpNorm<Eigen::Infinity>() <= 1e-10);
        CHECK((B(u + u2, v) - B(u, v) - B(u2, v)).lpNorm<Eigen::Infinity>() <= 1e-10);
    }
    SECTION("non-tangent directions are rejected") {
        CHECK_THROWS_AS(second_fundamental_form(unit_sphere(), g, 0.0, e(0), e(0)), ValidationError);
    }
}

TEST_CASE("reaction forces") {
    MetricField g = euclidean(3);
    LevelSetConstraint sphere = unit_sphere();
    SECTION("unforced bead on the sphere") {
        Vec r = reaction_force(sphere, g, zero_force(3), 0.0, e(0), e(1));
        CHECK((r + e(0)).lpNorm<Eigen::Infinity>() <= 1e-12);
    }
    SECTION("tangent forces do not contribute") {
        ExternalForce tangent = ExternalForce::from_generic(3, Box::cube(7, -100.0, 100.0),
                                                            [](const auto& t, auto x, auto, auto out) {
                                                                (void)t;
                                                                // covector e3 - (x.e3) x, tangent on the sphere
                                                                out[0] = -x[2] * x[0];
                                                                out[1] = -x[2] * x[1];
                                                                out[2] = 1.0 - x[2] * x[2];
                                                            });
        Vec r = reaction_force(sphere, g, tangent, 0.0, e(0), e(1));
        Vec mb = musical_flat(g, 0.0, e(0), second_fundamental_form(sphere, g, 0.0, e(0), e(1)));
        CHECK((r - mb).lpNorm<Eigen::Infinity>() <= 1e-12);
    }
    SECTION("normal covector on an affine constraint returns its negative") {
        LevelSetConstraint plane(VectorMap(3, 1, Box::cube(3, -5.0, 5.0), [](auto in, auto out) {
            out[0] = in[2] + 0.0 * in[0];
        }));
        ExternalForce normal = ExternalForce::from_generic(3, Box::cube(7, -100.0, 100.0),
                                                           [](const auto& t, auto, auto, auto out) {
                                                               using S = std::remove_cvref_t<decltype(t)>;
                                                               (void)t;
                                                               out[0] = S(0.0);
                                                               out[1] = S(0.0);
                                                               out[2] = S(0.7);
                                                           });
        Vec x = (Vec(3) << 0.4, -0.2, 0.0).finished();
        Vec v = (Vec(3) << 1.0, 2.0, 0.0).finished();
        Vec r = reaction_force(plane, g, normal, 0.0, x, v);
        CHECK_THAT(r(2), WithinAbs(-0.7, 1e-13));
        CHECK_THAT(r(0), WithinAbs(0.0, 1e-13));
    }
    SECTION("perfectness: the sharp of R is normal to the constraint") {
        ExternalForce mixed = ExternalForce::from_generic(3, Box::cube(7, -100.0, 100.0),
                                                          [](const auto& t, auto x, auto, auto out) {
                                                              out[0] = 0.3 * sin(t) + 0.2 * x[1];
                                                              out[1] = cos(t) * 0.1;
                                                              out[2] = 0.5 + 0.0 * x[0];
                                                          });
        std::mt19937 rng(163);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        double worst = 0.0;
        for (int trial = 0; trial < 40; ++trial) {
            Vec x = (Vec(3) << u(rng), u(rng), u(rng)).finished();
            x.normalize();
            Vec raw = (Vec(3) << u(rng), u(rng), u(rng)).finished();
            Vec v = tangent_project(unit_sphere(), g, 0.0, x, raw);
            Vec w = tangent_project(unit_sphere(), g, 0.0, x, Vec((Vec(3) << u(rng), u(rng), u(rng)).finished()));
            Vec r = reaction_force(unit_sphere(), g, mixed, u(rng), x, v);
            Vec sharp = musical_sharp(g, 0.0, x, r);
            worst = std::max(worst, std::abs(sharp.dot(musical_flat(g, 0.0, x, w))));
        }
        CHECK(worst <= 1e-8);
    }
}

TEST_CASE("constrained motion") {
    MetricField g = euclidean(3);
    LevelSetConstraint sphere = unit_sphere();
    SECTION("unforced bead follows a great circle") {
        SemisprayField s = constrained_spray(g, zero_force(3), sphere);
        sphere.require_on_constraint(e(0), e(1));
        IntegratorConfig cfg;
        cfg.s1 = kPi / 2;
        Trajectory tr = integrate(s, 0.0, e(0), e(1), cfg);
        CHECK((tr.samples.back().x - e(1)).lpNorm<Eigen::Infinity>() <= 1e-6);
    }
    SECTION("affine constraint keeps straight lines in the plane") {
        LevelSetConstraint plane(VectorMap(3, 1, Box::cube(3, -5.0, 5.0), [](auto in, auto out) {
            out[0] = in[2] + 0.0 * in[0];
        }));
        SemisprayField s = constrained_spray(g, zero_force(3), plane);
        Vec x0 = (Vec(3) << 0.1, -0.2, 0.0).finished();
        Vec y0 = (Vec(3) << 0.5, 1.0, 0.0).finished();
        IntegratorConfig cfg;
        cfg.s1 = 2.0;
        Trajectory tr = integrate(s, 0.0, x0, y0, cfg);
        CHECK((tr.samples.back().x - (x0 + 2.0 * y0)).lpNorm<Eigen::Infinity>() <= 1e-9);
    }
    SECTION("forced bead drifts within budget over a full revolution") {
        ExternalForce tangent_force = ExternalForce::from_generic(
            3, Box::cube(7, -100.0, 100.0), [](const auto& t, auto x, auto, auto out) {
                auto amp = 1e-3 * sin(t);
                out[0] = amp * (-x[2] * x[0]);
                out[1] = amp * (-x[2] * x[1]);
                out[2] = amp * (1.0 - x[2] * x[2]);
            });
        SemisprayField s = constrained_spray(g, tangent_force, sphere);
        IntegratorConfig cfg;
        cfg.s1 = 2.0 * kPi;
        Trajectory tr = integrate(s, 0.0, e(0), e(1), cfg);
        double drift = 0.0, vel_drift = 0.0;
        for (const TrajectorySample& p : tr.samples) {
            drift = std::max(drift, std::abs(p.x.norm() - 1.0));
            vel_drift = std::max(vel_drift, std::abs(p.x.dot(p.y)));
        }
        CHECK(drift <= 1e-7);
        CHECK(vel_drift <= 1e-6);
    }
    SECTION("ambient and intrinsic descriptions agree on the equator") {
        // intrinsic chart: colatitude/longitude with metric diag(1, sin^2)
        MetricField chart_metric(2, Box(std::vector<Interval>{{-10.0, 10.0}, {0.2, kPi - 0.2}, {-10.0, 10.0}}),
                                 [](const auto& t, auto x, auto out) {
                                     using S = std::remove_cvref_t<decltype(t)>;
                                     (void)t;
                                     auto s = sin(x[0]);
                                     out[0] = S(1.0);
                                     out[1] = S(0.0);
                                     out[2] = S(0.0);
                                     out[3] = s * s;
                                 });
        TimeLagrangian L = metric_lagrangian(chart_metric);
        IntegratorConfig cfg;
        cfg.s1 = kPi / 2;
        Trajectory intrinsic = integrate(lagrangian_spray(L), 0.0,
                                         (Vec(2) << kPi / 2, 0.0).finished(),
                                         (Vec(2) << 0.0, 1.0).finished(), cfg);
        SemisprayField ambient = constrained_spray(g, zero_force(3), sphere);
        Trajectory constrained = integrate(ambient, 0.0, e(0), e(1), cfg);
        REQUIRE(intrinsic.samples.size() == constrained.samples.size());
        double worst = 0.0;
        for (std::size_t i = 0; i < intrinsic.samples.size(); ++i) {
            double th = intrinsic.samples[i].x(0), ph = intrinsic.samples[i].x(1);
            Vec embedded = (Vec(3) << std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th)).finished();
            worst = std::max(worst, (embedded - constrained.samples[i].x).lpNorm<Eigen::Infinity>());
        }
        CHECK(worst <= 1e-6);
    }
    SECTION("off-constraint initial data is refused") {
        CHECK_THROWS_AS(sphere.require_on_constraint(1.01 * e(0), e(1)), ValidationError);
        CHECK_THROWS_AS(sphere.require_on_constraint(e(0), e(0)), ValidationError);
    }
    SECTION("optional post-step projection pins the constraint") {
        SemisprayField s = constrained_spray(g, zero_force(3), sphere);
        IntegratorConfig cfg;
        cfg.s1 = 2.0 * kPi;
        cfg.h = 1e-2;
        cfg.post_step = constraint_projection_hook(g, sphere, 0.0, 0.0);
        Trajectory tr = integrate(s, 0.0, e(0), e(1), cfg);
        double drift = 0.0;
        for (const TrajectorySample& p : tr.samples) drift = std::max(drift, std::abs(p.x.norm() - 1.0));
        CHECK(drift <= 1e-12);
    }
}
