#pragma once

#include <random>

#include "tdmech/scenario.hpp"

namespace tdmech {

struct LawRecord {
    std::string law;
    std::string statement;
    std::size_t samples = 0;
    double max_residual = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct InvariantReport {
    std::vector<LawRecord> records;

    bool all_pass() const {
        for (const LawRecord& r : records)
            if (!r.pass) return false;
        return true;
    }

    nlohmann::json to_json() const {
        nlohmann::json laws = nlohmann::json::array();
        for (const LawRecord& r : records)
            laws.push_back({{"law", r.law},
                            {"statement", r.statement},
                            {"samples", r.samples},
                            {"max_residual", r.max_residual},
                            {"tolerance", r.tolerance},
                            {"pass", r.pass}});
        return nlohmann::json{{"laws", laws}, {"all_pass", all_pass()}};
    }
};

struct CheckOptions {
    std::size_t samples = 100;
    unsigned seed = 7193;
    std::map<std::string, double> tolerances;  // per-law overrides
};

inline const std::vector<std::string>& known_laws() {
    static const std::vector<std::string> laws{
        "semispray-compat",      "connection-compat-N0", "connection-compat-N1",
        "trivialized-transition-block", "iZ-Omega-zero",  "sign-ledger",
        "f-related",             "perfectness",          "recover-G-roundtrip"};
    return laws;
}

inline double default_tolerance(const std::string& law) {
    if (law == "iZ-Omega-zero" || law == "f-related" || law == "perfectness") return 1e-8;
    if (law == "recover-G-roundtrip") return 1e-12;
    return 1e-10;
}

inline const char* law_statement(const std::string& law) {
    if (law == "semispray-compat") return "G_b(t, phi(x), dphi y) + d2phi(y, y) = dphi G_a(t, x, y)";
    if (law == "connection-compat-N0") return "dphi N0_a(v) = N0_b(v')";
    if (law == "connection-compat-N1") return "dphi N1_a(v) a = N1_b(v') dphi a + d2phi(a, y)";
    if (law == "trivialized-transition-block") return "Phi2_b o Phi2_a^{-1} = (t, phi(x), dphi y, dphi w)";
    if (law == "iZ-Omega-zero") return "omega_L(Z, w) + dE(Z) dt(w) - dE(w) dt(Z) = 0 with Z = (1, y, X2)";
    if (law == "sign-ledger") return "X2 + G + N0 = 0";
    if (law == "f-related") return "X2_N(t, f(x), df y) = d2f(y, y) + df X2_M(t, x, y)";
    if (law == "perfectness") return "g(sharp R(t, v), w) = 0 for tangent w";
    if (law == "recover-G-roundtrip") return "proj4(Phi2(t, x, y, 0)) = G(t, x, y)";
    return "?";
}

namespace detail {

inline std::vector<TangentSample> probe_samples(const Scenario& sc, std::size_t count, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> ut(sc.probes.t.lo, sc.probes.t.hi),
        ux(sc.probes.x.lo, sc.probes.x.hi), uy(sc.probes.y.lo, sc.probes.y.hi);
    std::vector<TangentSample> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
        out.push_back({ut(rng), Vec::NullaryExpr(static_cast<Eigen::Index>(sc.n), [&](Eigen::Index) { return ux(rng); }),
                       Vec::NullaryExpr(static_cast<Eigen::Index>(sc.n), [&](Eigen::Index) { return uy(rng); })});
    return out;
}

[[noreturn]] inline void missing(const std::string& law, const char* what) {
    throw ValidationError("law '" + law + "' needs " + what + ", which this scenario does not define");
}

inline double run_trivialized_block(const Scenario& sc, std::span<const TangentSample> samples,
                                    std::mt19937& rng) {
    const SemisprayField& a = *sc.compat_spray_a;
    const SemisprayField& b = *sc.compat_spray_b;
    const Transition& tr = *sc.transition;
    std::uniform_real_distribution<double> uw(-2.0, 2.0);
    double worst = 0.0;
    for (const TangentSample& v : samples) {
        DerivativeBundle d = map_jet(tr.forward(), v.x, false);
        for (double t : {0.0, 1.0, 7.0}) {
            Vec w = Vec::NullaryExpr(v.y.size(), [&](Eigen::Index) { return uw(rng); });
            Trivialized out = transition_trivialized(a, b, tr, {t, v.x, v.y, w});
            worst = std::max(worst, std::abs(out.t - t));
            worst = std::max(worst, (out.x - d.value).lpNorm<Eigen::Infinity>());
            worst = std::max(worst, (out.y - d.jacobian * v.y).lpNorm<Eigen::Infinity>());
            worst = std::max(worst, (out.w - d.jacobian * w).lpNorm<Eigen::Infinity>());

            // superposition probe in the (y, w) fiber
            Vec y2 = Vec::NullaryExpr(v.y.size(), [&](Eigen::Index) { return uw(rng); });
            Vec w2 = Vec::NullaryExpr(v.y.size(), [&](Eigen::Index) { return uw(rng); });
            Trivialized o1 = transition_trivialized(a, b, tr, {t, v.x, v.y, w});
            Trivialized o2 = transition_trivialized(a, b, tr, {t, v.x, y2, w2});
            Trivialized os = transition_trivialized(a, b, tr, {t, v.x, v.y + y2, w + w2});
            worst = std::max(worst, (os.y - o1.y - o2.y).lpNorm<Eigen::Infinity>());
            worst = std::max(worst, (os.w - o1.w - o2.w).lpNorm<Eigen::Infinity>());
        }
    }
    return worst;
}

inline double run_iz_omega(const Scenario& sc, std::span<const TangentSample> samples, std::mt19937& rng) {
    const TimeLagrangian& L = *sc.lagrangian;
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    double worst = 0.0;
    for (const TangentSample& v : samples) {
        LagrangianJet j = L.jet(v);
        TangentVec Z{1.0, v.y, lagrangian_vector_field(L, v)};
        TangentVec w{u(rng), Vec::NullaryExpr(v.y.size(), [&](Eigen::Index) { return u(rng); }),
                     Vec::NullaryExpr(v.y.size(), [&](Eigen::Index) { return u(rng); })};
        double r = lagrange_two_form(j, Z, w) + energy_differential(j, v.y, Z) * w.s
                 - energy_differential(j, v.y, w);
        worst = std::max(worst, std::abs(r));
    }
    return worst;
}

inline double run_perfectness(const Scenario& sc, std::size_t count, std::mt19937& rng) {
    const LevelSetConstraint& cst = *sc.constraint;
    const MetricField& g = *sc.metric;
    const ExternalForce& F = *sc.force;
    std::uniform_real_distribution<double> u(-1.0, 1.0),
        ut(sc.probes.t.lo, sc.probes.t.hi);
    const std::size_t n = cst.ambient_dim();
    double worst = 0.0;
    std::size_t accepted = 0, attempts = 0;
    auto hook = constraint_projection_hook(g, cst, 0.0, 0.0);
    while (accepted < count) {
        if (++attempts > 50 * count + 100)
            throw ValidationError("could not draw enough on-constraint probe points");
        Vec x = Vec::NullaryExpr(static_cast<Eigen::Index>(n), [&](Eigen::Index) { return u(rng); });
        Vec dummy = Vec::Zero(static_cast<Eigen::Index>(n));
        for (int pass = 0; pass < 6; ++pass) hook(0.0, x, dummy);
        if (!cst.on_constraint(x, 1e-10)) continue;
        ++accepted;
        double t = ut(rng);
        Vec v = tangent_project(cst, g, t, x, Vec::NullaryExpr(static_cast<Eigen::Index>(n), [&](Eigen::Index) { return u(rng); }));
        Vec w = tangent_project(cst, g, t, x, Vec::NullaryExpr(static_cast<Eigen::Index>(n), [&](Eigen::Index) { return u(rng); }));
        Vec r = reaction_force(cst, g, F, t, x, v);
        Vec sharp = musical_sharp(g, t, x, r);
        Mat gm = g.value(t, x);
        worst = std::max(worst, std::abs(sharp.dot(gm * w)));
    }
    return worst;
}

}  // namespace detail

/// Evaluate one named law against a scenario's fixtures.
inline LawRecord run_law(const std::string& law, const Scenario& sc, const CheckOptions& opts) {
    if (std::find(known_laws().begin(), known_laws().end(), law) == known_laws().end())
        throw ExprError("unknown law name '" + law + "'");  // parse-level error for the CLI

    LawRecord rec;
    rec.law = law;
    rec.statement = law_statement(law);
    rec.samples = opts.samples;
    auto tol_it = opts.tolerances.find(law);
    rec.tolerance = tol_it != opts.tolerances.end() ? tol_it->second : default_tolerance(law);

    std::mt19937 rng(opts.seed);
    std::vector<TangentSample> samples = detail::probe_samples(sc, opts.samples, opts.seed + 1);

    if (law == "semispray-compat") {
        if (!sc.transition || !sc.compat_spray_a || !sc.compat_spray_b)
            detail::missing(law, "a chart change with a spray pair");
        rec.max_residual = check_semispray_compat(*sc.compat_spray_a, *sc.compat_spray_b,
                                                  *sc.transition, samples).max_residual;
    } else if (law == "connection-compat-N0" || law == "connection-compat-N1") {
        if (!sc.transition || !sc.compat_conn_a || !sc.compat_conn_b)
            detail::missing(law, "a chart change with a connection pair");
        ConnectionCompatReport rep = check_connection_compat(*sc.compat_conn_a, *sc.compat_conn_b,
                                                             *sc.transition, samples);
        rec.max_residual = law == "connection-compat-N0" ? rep.n0.max_residual : rep.n1.max_residual;
    } else if (law == "trivialized-transition-block") {
        if (!sc.transition || !sc.compat_spray_a || !sc.compat_spray_b)
            detail::missing(law, "a chart change with a spray pair");
        rec.max_residual = detail::run_trivialized_block(sc, samples, rng);
    } else if (law == "iZ-Omega-zero") {
        if (!sc.lagrangian) detail::missing(law, "a Lagrangian");
        rec.max_residual = detail::run_iz_omega(sc, samples, rng);
    } else if (law == "sign-ledger") {
        if (!sc.lagrangian) detail::missing(law, "a Lagrangian");
        double worst = 0.0;
        for (const TangentSample& v : samples) {
            Vec x2 = lagrangian_vector_field(*sc.lagrangian, v);
            Vec g = canonical_G(*sc.lagrangian, v);
            Vec n0 = connection_from_lagrangian(*sc.lagrangian, v).N0;
            worst = std::max(worst, (x2 + g + n0).lpNorm<Eigen::Infinity>());
        }
        rec.max_residual = worst;
    } else if (law == "f-related") {
        if (!sc.related_map || !sc.related_spray_m || !sc.related_spray_n)
            detail::missing(law, "a diffeomorphism with a spray pair");
        FRelatedReport rep = check_f_related(*sc.related_spray_m, *sc.related_spray_n,
                                             *sc.related_map, samples);
        rec.max_residual = std::max(rep.x2_form.max_residual, rep.g_form.max_residual);
    } else if (law == "perfectness") {
        if (!sc.constraint || !sc.metric || !sc.force)
            detail::missing(law, "a constraint, a metric and a force");
        rec.max_residual = detail::run_perfectness(sc, opts.samples, rng);
    } else if (law == "recover-G-roundtrip") {
        double worst = 0.0;
        for (const TangentSample& v : samples) {
            Vec g = recover_G(trivializer(*sc.motion), v);
            worst = std::max(worst, (g - sc.motion->G(v)).lpNorm<Eigen::Infinity>());
        }
        if (sc.lagrangian) {
            ConnectionField conn = lagrangian_connection(*sc.lagrangian);
            for (const TangentSample& v : samples) {
                Vec g = recover_G(trivializer(conn), v);
                Vec p = conn.N0(v) + conn.N1(v) * v.y;
                worst = std::max(worst, (g - p).lpNorm<Eigen::Infinity>());
            }
        }
        rec.max_residual = worst;
    }

    rec.pass = rec.max_residual <= rec.tolerance;
    return rec;
}

inline InvariantReport run_laws(const std::vector<std::string>& laws, const Scenario& sc,
                                const CheckOptions& opts) {
    InvariantReport rep;
    for (const std::string& law : laws) rep.records.push_back(run_law(law, sc, opts));
    return rep;
}

}  // namespace tdmech
