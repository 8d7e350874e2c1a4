#include <catch2/catch_amalgamated.hpp>

#include "tdmech/checks.hpp"
#include "tdmech/dynamics.hpp"

using namespace tdmech;
using Catch::Matchers::WithinAbs;

TEST_CASE("catalog lists the seven built-in systems") {
    const auto& entries = catalog();
    REQUIRE(entries.size() == 7);
    std::vector<std::string> names;
    for (const auto& e : entries) names.push_back(e.name);
    CHECK(names == std::vector<std::string>{"free-particle", "harmonic-td", "caldirola", "potential-td",
                                            "forced-oscillator", "bead-on-sphere-forced", "frelated-demo"});
    for (const auto& e : entries) CHECK_FALSE(e.description.empty());
}

TEST_CASE("unknown scenarios and parameters are rejected") {
    CHECK_THROWS_AS(make_scenario("does-not-exist", nlohmann::json::object()), ValidationError);
    CHECK_THROWS_AS(make_scenario("harmonic-td", nlohmann::json{{"stiffness", 2.0}}), ValidationError);
    CHECK_NOTHROW(make_scenario("harmonic-td", nlohmann::json{{"k0", 2.0}}));
}

TEST_CASE("every catalog scenario passes its default laws") {
    CheckOptions opts;
    opts.samples = 40;
    for (const auto& entry : catalog()) {
        Scenario sc = make_scenario(entry.name, nlohmann::json::object());
        InvariantReport rep = run_laws(sc.default_laws, sc, opts);
        INFO(entry.name);
        for (const LawRecord& r : rep.records) {
            INFO(r.law << " residual " << r.max_residual);
            CHECK(r.pass);
        }
    }
}

TEST_CASE("every catalog scenario integrates over a short span") {
    for (const auto& entry : catalog()) {
        Scenario sc = make_scenario(entry.name, nlohmann::json::object());
        sc.integrator.s1 = sc.integrator.s0 + 0.25;
        Trajectory tr = integrate(*sc.motion, sc.initial.t, sc.initial.x, sc.initial.y, sc.integrator);
        INFO(entry.name);
        CHECK(tr.samples.size() >= 3);
        CHECK(tr.samples.back().x.allFinite());
    }
}

TEST_CASE("scenario parameters feed through to the dynamics") {
    Scenario stiff = make_scenario("harmonic-td", nlohmann::json{{"k0", 4.0}});
    IntegratorConfig cfg = stiff.integrator;
    cfg.s1 = std::numbers::pi / 4.0;  // quarter period at k = 4
    Trajectory tr = integrate(*stiff.motion, 0.0, Vec::Constant(1, 1.0), Vec::Zero(1), cfg);
    CHECK_THAT(tr.samples.back().x(0), WithinAbs(0.0, 1e-6));
}

TEST_CASE("laws hold with genuinely time-dependent stiffness") {
    Scenario wobble = make_scenario("harmonic-td", nlohmann::json{{"k0", 1.0}, {"k1", 0.4}, {"omega", 2.0}});
    CheckOptions opts;
    opts.samples = 30;
    for (const std::string& law : wobble.default_laws) {
        LawRecord rec = run_law(law, wobble, opts);
        INFO(law << " residual " << rec.max_residual);
        CHECK(rec.pass);
    }
}

TEST_CASE("laws report missing fixtures as validation errors") {
    Scenario sc = make_scenario("free-particle", nlohmann::json::object());
    CheckOptions opts;
    opts.samples = 5;
    CHECK_THROWS_AS(run_law("f-related", sc, opts), ValidationError);
    CHECK_THROWS_AS(run_law("perfectness", sc, opts), ValidationError);
    CHECK_THROWS_AS(run_law("semispray-compat", sc, opts), ValidationError);
    CHECK_THROWS_AS(run_law("not-a-law", sc, opts), ExprError);
}

TEST_CASE("tolerance overrides flip the verdict") {
    Scenario sc = make_scenario("harmonic-td", nlohmann::json::object());
    CheckOptions opts;
    opts.samples = 10;
    opts.tolerances["semispray-compat"] = 1e-30;  // below the rounding floor
    LawRecord rec = run_law("semispray-compat", sc, opts);
    CHECK_FALSE(rec.pass);
    CHECK(rec.tolerance == 1e-30);
}

TEST_CASE("inline scenarios") {
    SECTION("explicit Lagrangian with a forced mismatch pair") {
        nlohmann::json spec{{"kind", "lagrangian"},
                            {"n", 1},
                            {"lagrangian", "0.5*y0^2"},
                            {"chart_change", {{"map", "identity"}}},
                            {"compat_pair", {{"G_a", {"0"}}, {"G_b", {"1"}}}}};
        Scenario sc = make_inline_scenario(spec);
        CheckOptions opts;
        opts.samples = 10;
        LawRecord rec = run_law("semispray-compat", sc, opts);
        CHECK_FALSE(rec.pass);
        CHECK_THAT(rec.max_residual, WithinAbs(1.0, 1e-14));
    }
    SECTION("kinetic scenario with a constraint") {
        nlohmann::json spec{{"kind", "kinetic"},
                            {"n", 2},
                            {"constraint", {"0.5*(x0^2 + x1^2 - 1)"}},
                            {"force", {"0", "0"}}};
        Scenario sc = make_inline_scenario(spec);
        REQUIRE(sc.constraint.has_value());
        sc.initial = {0.0, (Vec(2) << 1.0, 0.0).finished(), (Vec(2) << 0.0, 1.0).finished()};
        sc.constraint->require_on_constraint(sc.initial.x, sc.initial.y);
        IntegratorConfig cfg;
        cfg.s1 = std::numbers::pi / 2;
        Trajectory tr = integrate(*sc.motion, 0.0, sc.initial.x, sc.initial.y, cfg);
        CHECK_THAT(tr.samples.back().x(0), WithinAbs(0.0, 1e-6));  // circle motion
        CHECK_THAT(tr.samples.back().x(1), WithinAbs(1.0, 1e-6));
    }
    SECTION("pullback through the cubic chart change is f-related") {
        nlohmann::json spec{{"kind", "lagrangian"},
                            {"n", 1},
                            {"lagrangian", "0.5*(1 + 0.3*x0^2)^2 * y0^2"},
                            {"chart_change", {{"map", "cubic"}, {"param", 0.1}}}};
        Scenario sc = make_inline_scenario(spec);
        CheckOptions opts;
        opts.samples = 30;
        CHECK(run_law("semispray-compat", sc, opts).pass);
        CHECK(run_law("f-related", sc, opts).pass);
    }
    SECTION("schema violations") {
        CHECK_THROWS_AS(make_inline_scenario(nlohmann::json{{"n", 1}}), ValidationError);
        CHECK_THROWS_AS(make_inline_scenario(nlohmann::json{{"n", 1}, {"lagrangian", "y0"}, {"bogus", 1}}),
                        ValidationError);
        CHECK_THROWS_AS(make_inline_scenario(nlohmann::json{{"kind", "kinetic"},
                                                            {"n", 1},
                                                            {"potential", "x0"},
                                                            {"constraint", {"x0"}}}),
                        ValidationError);
    }
}

TEST_CASE("forced oscillator scenario satisfies its forced audit") {
    Scenario sc = make_scenario("forced-oscillator", nlohmann::json::object());
    Trajectory tr = integrate(*sc.motion, sc.initial.t, sc.initial.x, sc.initial.y, sc.integrator);
    CHECK(el_residual(*sc.lagrangian, tr, &*sc.force).max_abs <= 1e-6);
}
