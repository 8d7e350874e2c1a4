#include <catch2/catch_amalgamated.hpp>

#include "catalog_fixtures.hpp"
#include "tdmech/semispray.hpp"

using namespace tdmech;
using namespace fixtures;
using Catch::Matchers::WithinAbs;

TEST_CASE("push_tangent") {
    SECTION("identity transition leaves samples alone") {
        Transition tr = identity_transition();
        TangentSample v{1.0, Vec::Constant(1, 0.5), Vec::Constant(1, 3.0)};
        TangentSample p = push_tangent(tr, v);
        CHECK(p.t == 1.0);
        CHECK(p.x(0) == 0.5);
        CHECK(p.y(0) == 3.0);
    }
    SECTION("linear scaling doubles both slots") {
        Transition tr = scaling_transition(2.0);
        TangentSample p = push_tangent(tr, {1.0, Vec::Constant(1, 0.5), Vec::Constant(1, 3.0)});
        CHECK_THAT(p.x(0), WithinAbs(1.0, 1e-15));
        CHECK_THAT(p.y(0), WithinAbs(6.0, 1e-15));
    }
    SECTION("cubic diffeomorphism") {
        Transition tr = cubic_transition();
        TangentSample p = push_tangent(tr, {0.0, Vec::Constant(1, 0.5), Vec::Constant(1, 1.0)});
        CHECK_THAT(p.x(0), WithinAbs(0.5125, 1e-15));
        CHECK_THAT(p.y(0), WithinAbs(1.075, 1e-15));
    }
    SECTION("outside the overlap") {
        Transition tr = cubic_transition();
        CHECK_THROWS_AS(push_tangent(tr, {0.0, Vec::Constant(1, 1.4), Vec::Zero(1)}), DomainError);
    }
}

TEST_CASE("push_jet2") {
    SECTION("cubic second-derivative term") {
        Transition tr = cubic_transition();
        Jet2 j{0.0, Vec::Constant(1, 0.5), Vec::Constant(1, 1.0), Vec::Zero(1)};
        Jet2 p = push_jet2(tr, j);
        CHECK_THAT(p.z(0), WithinAbs(0.3, 1e-14));
    }
    SECTION("linear map drops the second-derivative term") {
        Transition tr = scaling_transition(-1.5);
        Jet2 j{0.0, Vec::Constant(1, 0.5), Vec::Constant(1, 2.0), Vec::Constant(1, 0.7)};
        Jet2 p = push_jet2(tr, j);
        CHECK_THAT(p.z(0), WithinAbs(-1.05, 1e-15));
    }
    SECTION("cocycle property under composition") {
        double a = 0.1;
        Transition t1 = cubic_transition(a);
        VectorMap f2(1, 1, Box::cube(1, -2.0, 2.0), [](auto in, auto out) { out[0] = 2.0 * in[0]; });
        VectorMap i2(1, 1, Box::cube(1, -4.0, 4.0), [](auto in, auto out) { out[0] = 0.5 * in[0]; });
        Transition t2("B", "C", f2, i2, Box::cube(1, -1.9, 1.9));
        Transition t21("A", "C", compose(f2, t1.forward()), compose(t1.inverse(), i2),
                       Box::cube(1, -1.2, 1.2));
        for (double x : {-0.9, -0.2, 0.6, 1.1}) {
            Jet2 j{0.3, Vec::Constant(1, x), Vec::Constant(1, 1.4), Vec::Constant(1, -0.8)};
            Jet2 two_step = push_jet2(t2, push_jet2(t1, j));
            Jet2 one_step = push_jet2(t21, j);
            CHECK_THAT(two_step.x(0), WithinAbs(one_step.x(0), 1e-10));
            CHECK_THAT(two_step.y(0), WithinAbs(one_step.y(0), 1e-10));
            CHECK_THAT(two_step.z(0), WithinAbs(one_step.z(0), 1e-10));
        }
    }
    SECTION("restricted to y = 0 the law is linear in z") {
        Transition tr = cubic_transition();
        auto push_z = [&](double z) {
            Jet2 j{0.0, Vec::Constant(1, 0.4), Vec::Zero(1), Vec::Constant(1, z)};
            return push_jet2(tr, j).z(0);
        };
        CHECK_THAT(push_z(1.0) + 0.5 * push_z(-3.0), WithinAbs(push_z(1.0 - 1.5), 1e-14));
    }
}

TEST_CASE("push_tangent is fiberwise linear in y") {
    Transition tr = cubic_transition();
    double lambda = 0.7;
    Vec y1 = Vec::Constant(1, 1.3), y2 = Vec::Constant(1, -0.4);
    TangentSample base{0.0, Vec::Constant(1, 0.6), Vec::Zero(1)};
    auto push_y = [&](const Vec& y) {
        return push_tangent(tr, {base.t, base.x, y}).y;
    };
    Vec combined = push_y(y1 + lambda * y2);
    Vec split = push_y(y1) + lambda * push_y(y2);
    CHECK((combined - split).lpNorm<Eigen::Infinity>() <= 1e-14);
}

TEST_CASE("charts carry an id, a domain box and a dimension") {
    Chart base{"A", Box::cube(1, -1.5, 1.5), 1};
    Chart image{"B", Box::cube(1, -2.0, 2.0), 1};
    Transition tr = cubic_transition();
    CHECK(tr.from() == base.id);
    CHECK(tr.to() == image.id);
    CHECK(base.domain.contains(std::vector<double>{0.7}));
    CHECK_FALSE(base.domain.contains(std::vector<double>{1.7}));
    CHECK(image.n == 1);
}

TEST_CASE("transition construction validates the stored inverse") {
    VectorMap fwd = cubic_map(0.1, Box::cube(1, -1.5, 1.5));
    VectorMap bad_inv(1, 1, Box::cube(1, -2.0, 2.0), [](auto in, auto out) { out[0] = in[0]; });
    CHECK_THROWS_AS(Transition("A", "B", fwd, bad_inv, Box::cube(1, -1.2, 1.2)), ValidationError);
}

TEST_CASE("semispray compatibility checker") {
    SECTION("zero sprays under a linear transition") {
        Transition tr = scaling_transition(2.0);
        SemisprayField a = SemisprayField::from_generic("A", 1, Box::cube(3, -50.0, 50.0), Provenance::user,
                                                        [](const auto& t, auto, auto, auto out) {
                                                            using S = std::remove_cvref_t<decltype(t)>;
                                                            out[0] = S(0.0);
                                                        });
        SemisprayField b = SemisprayField::from_generic("B", 1, Box::cube(3, -50.0, 50.0), Provenance::user,
                                                        [](const auto& t, auto, auto, auto out) {
                                                            using S = std::remove_cvref_t<decltype(t)>;
                                                            out[0] = S(0.0);
                                                        });
        auto samples = random_samples(1, 20, 11);
        ResidualReport rep = check_semispray_compat(a, b, tr, samples);
        CHECK(rep.max_residual == 0.0);
    }
    SECTION("transported harmonic spray satisfies the law") {
        Transition tr = cubic_transition();
        SemisprayField a = lagrangian_spray(harmonic_1d());
        SemisprayField b = pushforward_spray(a, tr);
        auto samples = random_samples(1, 100, 23);
        ResidualReport rep = check_semispray_compat(a, b, tr, samples);
        CHECK(rep.max_residual <= 1e-10);
        CHECK(rep.samples == 100);
    }
    SECTION("forced mismatch reports residual one") {
        Transition tr = identity_transition();
        SemisprayField a = SemisprayField::from_generic("A", 1, Box::cube(3, -50.0, 50.0), Provenance::user,
                                                        [](const auto& t, auto, auto, auto out) {
                                                            using S = std::remove_cvref_t<decltype(t)>;
                                                            out[0] = S(0.0);
                                                        });
        SemisprayField b = SemisprayField::from_generic("A", 1, Box::cube(3, -50.0, 50.0), Provenance::user,
                                                        [](const auto& t, auto, auto, auto out) {
                                                            using S = std::remove_cvref_t<decltype(t)>;
                                                            out[0] = S(1.0);
                                                        });
        auto samples = random_samples(1, 10, 5);
        ResidualReport rep = check_semispray_compat(a, b, tr, samples);
        CHECK_THAT(rep.max_residual, WithinAbs(1.0, 1e-15));
    }
}

TEST_CASE("connection compatibility checker") {
    SECTION("zero connections under a linear transition") {
        Transition tr = scaling_transition(3.0);
        auto zero_n0 = [](double, auto, auto, std::span<double> out) { out[0] = 0.0; };
        ConnectionField a("A", 1, Box::cube(3, -50.0, 50.0), zero_n0, zero_n0);
        ConnectionField b("B", 1, Box::cube(3, -50.0, 50.0), zero_n0, zero_n0);
        auto samples = random_samples(1, 20, 31);
        ConnectionCompatReport rep = check_connection_compat(a, b, tr, samples);
        CHECK(rep.n0.max_residual == 0.0);
        CHECK(rep.n1.max_residual == 0.0);
    }
    SECTION("transported Lagrangian connection satisfies both laws") {
        Transition tr = cubic_transition();
        ConnectionField a = lagrangian_connection(caldirola_1d());
        ConnectionField b = pushforward_connection(a, tr);
        auto samples = random_samples(1, 50, 37);
        ConnectionCompatReport rep = check_connection_compat(a, b, tr, samples);
        CHECK(rep.n0.max_residual <= 1e-10);
        CHECK(rep.n1.max_residual <= 1e-10);
    }
    SECTION("mismatched space coefficients under the identity") {
        Transition tr = identity_transition();
        auto zero = [](double, auto, auto, std::span<double> out) { out[0] = 0.0; };
        auto one = [](double, auto, auto, std::span<double> out) { out[0] = 1.0; };
        ConnectionField a("A", 1, Box::cube(3, -50.0, 50.0), zero, one);   // N1 = I
        ConnectionField b("A", 1, Box::cube(3, -50.0, 50.0), zero, zero);  // N1 = 0
        auto samples = random_samples(1, 10, 41);
        ConnectionCompatReport rep = check_connection_compat(a, b, tr, samples);
        CHECK(rep.n0.max_residual == 0.0);
        CHECK_THAT(rep.n1.max_residual, WithinAbs(1.0, 1e-15));
    }
}

TEST_CASE("residual reports serialize with the documented fields") {
    Transition tr = identity_transition();
    SemisprayField a = lagrangian_spray(harmonic_1d());
    auto samples = random_samples(1, 5, 3);
    ResidualReport rep = check_semispray_compat(a, a, tr, samples);
    nlohmann::json j = rep.to_json();
    CHECK(j.at("law") == "semispray-compat");
    CHECK(j.at("samples") == 5);
    CHECK(j.at("residuals").size() == 5);
    CHECK(j.contains("max_residual"));
    CHECK(j.at("argmax_sample").contains("x"));
}
