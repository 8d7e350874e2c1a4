#pragma once

#include <algorithm>
#include <json.hpp>
#include <map>
#include <numbers>
#include <optional>

#include "tdmech/expression.hpp"
#include "tdmech/riemann.hpp"

namespace tdmech {

/// Ranges for random probe samples used by the law runners.
struct ProbeBox {
    Interval t{0.0, 2.0};
    Interval x{-1.1, 1.1};
    Interval y{-2.0, 2.0};
};

enum class ResidualKind { euler_lagrange, euler_lagrange_forced, constraint_drift };

/// A fully assembled system: the field to integrate, the objects the audits
/// and law checkers consume, and scenario defaults.
struct Scenario {
    std::string name;
    std::string description;
    std::size_t n = 1;

    std::optional<SemisprayField> motion;
    std::optional<TimeLagrangian> lagrangian;    // audit Lagrangian (ambient one for constrained systems)
    std::optional<ExternalForce> force;
    std::optional<LevelSetConstraint> constraint;
    std::optional<MetricField> metric;

    // chart-change fixtures for the compatibility laws
    std::optional<Transition> transition;
    std::optional<SemisprayField> compat_spray_a, compat_spray_b;
    std::optional<ConnectionField> compat_conn_a, compat_conn_b;

    // f-relatedness fixtures
    std::optional<VectorMap> related_map;
    std::optional<SemisprayField> related_spray_m, related_spray_n;

    TangentSample initial;
    IntegratorConfig integrator;
    ResidualKind residual_kind = ResidualKind::euler_lagrange;
    ProbeBox probes;
    std::vector<std::string> default_laws;
};

namespace detail {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline Box line_phase_box() { return Box::cube(3, -10.0, 10.0); }

inline VectorMap cubic_forward(double a) {
    return VectorMap(1, 1, Box::cube(1, -1.5, 1.5), [a](auto in, auto out) {
        out[0] = in[0] + a * in[0] * in[0] * in[0];
    });
}

inline VectorMap cubic_backward(double a) {
    // real root of a x^3 + x = b by the depressed-cubic formula
    return VectorMap(1, 1, Box::cube(1, -2.0, 2.0), [a](auto in, auto out) {
        auto half_q = 0.5 * in[0] / a;
        auto disc = half_q * half_q + 1.0 / (27.0 * a * a * a);
        auto root = sqrt(disc);
        out[0] = cbrt(half_q + root) + cbrt(half_q - root);
    });
}

inline Transition cubic_chart_change(double a = 0.1) {
    return Transition("base", "image", cubic_forward(a), cubic_backward(a), Box::cube(1, -1.2, 1.2));
}

/// Install the standard 1-d chart-change fixtures derived from a Lagrangian.
inline void attach_cubic_fixtures(Scenario& sc, const TimeLagrangian& L) {
    sc.transition = cubic_chart_change();
    sc.compat_spray_a = lagrangian_spray(L);
    sc.compat_spray_b = pushforward_spray(*sc.compat_spray_a, *sc.transition);
    sc.compat_conn_a = lagrangian_connection(L);
    sc.compat_conn_b = pushforward_connection(*sc.compat_conn_a, *sc.transition);
    sc.related_map = sc.transition->forward();
    sc.related_spray_m = sc.compat_spray_a;
    sc.related_spray_n = sc.compat_spray_b;
}

inline double param(const nlohmann::json& params, const std::string& key, double fallback) {
    if (!params.contains(key)) return fallback;
    if (!params.at(key).is_number()) throw ValidationError("parameter '" + key + "' must be a number");
    return params.at(key).get<double>();
}

inline void reject_unknown_params(const nlohmann::json& params, std::initializer_list<const char*> known) {
    for (const auto& [key, value] : params.items()) {
        bool ok = false;
        for (const char* k : known) ok = ok || key == k;
        if (!ok) throw ValidationError("unknown parameter '" + key + "'");
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Catalog

inline Scenario make_free_particle(const nlohmann::json& params) {
    detail::reject_unknown_params(params, {});
    Scenario sc;
    sc.name = "free-particle";
    sc.description = "flat 2-d kinetic Lagrangian; straight-line motion";
    sc.n = 2;
    TimeLagrangian L(ScalarField(2, Box::cube(5, -100.0, 100.0), [](const auto& t, auto x, auto y) {
        (void)t; (void)x;
        return 0.5 * (y[0] * y[0] + y[1] * y[1]);
    }));
    sc.motion = lagrangian_spray(L);
    sc.lagrangian = L;
    sc.initial = {0.0, Vec::Zero(2), (Vec(2) << 1.0, 0.5).finished()};
    sc.integrator.s1 = 2.0;
    sc.default_laws = {"sign-ledger", "iZ-Omega-zero", "recover-G-roundtrip"};
    return sc;
}

inline Scenario make_harmonic_td(const nlohmann::json& params) {
    detail::reject_unknown_params(params, {"k0", "k1", "omega"});
    double k0 = detail::param(params, "k0", 1.0);
    double k1 = detail::param(params, "k1", 0.0);
    double om = detail::param(params, "omega", 1.0);
    Scenario sc;
    sc.name = "harmonic-td";
    sc.description = "oscillator with time-dependent stiffness k(t) = k0 + k1 sin(omega t)";
    sc.n = 1;
    TimeLagrangian L(ScalarField(1, detail::line_phase_box(), [k0, k1, om](const auto& t, auto x, auto y) {
        auto k = k0 + k1 * sin(om * t);
        return 0.5 * y[0] * y[0] - 0.5 * k * x[0] * x[0];
    }), "base");
    sc.motion = lagrangian_spray(L);
    sc.lagrangian = L;
    detail::attach_cubic_fixtures(sc, L);
    sc.initial = {0.0, Vec::Constant(1, 1.0), Vec::Zero(1)};
    sc.integrator.s1 = detail::kTwoPi;
    sc.default_laws = {"semispray-compat", "connection-compat-N0", "connection-compat-N1",
                       "trivialized-transition-block", "iZ-Omega-zero", "sign-ledger",
                       "f-related", "recover-G-roundtrip"};
    return sc;
}

inline Scenario make_caldirola(const nlohmann::json& params) {
    detail::reject_unknown_params(params, {"gamma"});
    double gamma = detail::param(params, "gamma", 1.0);
    Scenario sc;
    sc.name = "caldirola";
    sc.description = "exponential time-dependent metric family g(t) = e^{2 gamma t}";
    sc.n = 1;
    MetricField g(1, Box::cube(2, -10.0, 10.0), [gamma](const auto& t, auto, auto out) {
        out[0] = exp(2.0 * gamma * t);
    });
    TimeLagrangian L = time_metric_lagrangian(g, "base");
    sc.motion = lagrangian_spray(L);
    sc.lagrangian = L;
    sc.metric = g;
    detail::attach_cubic_fixtures(sc, L);
    sc.initial = {0.0, Vec::Zero(1), Vec::Constant(1, 1.0)};
    sc.integrator.s1 = 1.0;
    sc.default_laws = {"semispray-compat", "connection-compat-N0", "connection-compat-N1",
                       "trivialized-transition-block", "iZ-Omega-zero", "sign-ledger",
                       "f-related", "recover-G-roundtrip"};
    return sc;
}

inline Scenario make_potential_td(const nlohmann::json& params) {
    detail::reject_unknown_params(params, {"amp", "omega"});
    double amp = detail::param(params, "amp", 1.0);
    double om = detail::param(params, "omega", 1.0);
    Scenario sc;
    sc.name = "potential-td";
    sc.description = "flat metric with time-dependent potential U = amp sin(omega t) x0";
    sc.n = 2;
    MetricField g(2, Box::cube(3, -100.0, 100.0), [](const auto& t, auto, auto out) {
        using S = std::remove_cvref_t<decltype(t)>;
        (void)t;
        out[0] = S(1.0); out[1] = S(0.0); out[2] = S(0.0); out[3] = S(1.0);
    });
    PotentialField U(2, Box::cube(3, -100.0, 100.0), [amp, om](const auto& t, auto x) {
        return amp * sin(om * t) * x[0];
    });
    TimeLagrangian L = metric_lagrangian(g, U);
    sc.motion = lagrangian_spray(L);
    sc.lagrangian = L;
    sc.metric = g;
    sc.initial = {0.0, Vec::Zero(2), Vec::Zero(2)};
    sc.integrator.s1 = detail::kTwoPi;
    sc.default_laws = {"sign-ledger", "iZ-Omega-zero", "recover-G-roundtrip"};
    return sc;
}

inline Scenario make_forced_oscillator(const nlohmann::json& params) {
    detail::reject_unknown_params(params, {"amp", "omega"});
    double amp = detail::param(params, "amp", 1.0);
    double om = detail::param(params, "omega", 1.0);
    Scenario sc;
    sc.name = "forced-oscillator";
    sc.description = "unit oscillator driven by the covector amp sin(omega t)";
    sc.n = 1;
    TimeLagrangian L(ScalarField(1, detail::line_phase_box(), [](const auto& t, auto x, auto y) {
        (void)t;
        return 0.5 * y[0] * y[0] - 0.5 * x[0] * x[0];
    }));
    ExternalForce F = ExternalForce::from_generic(1, detail::line_phase_box(),
                                                  [amp, om](const auto& t, auto, auto, auto out) {
                                                      out[0] = amp * sin(om * t);
                                                  });
    sc.motion = forced_spray(lagrangian_spray(L), L, F);
    sc.lagrangian = L;
    sc.force = F;
    sc.residual_kind = ResidualKind::euler_lagrange_forced;
    sc.initial = {0.0, Vec::Zero(1), Vec::Zero(1)};
    sc.integrator.s1 = detail::kTwoPi;
    sc.default_laws = {"sign-ledger", "iZ-Omega-zero", "recover-G-roundtrip"};
    return sc;
}

inline Scenario make_bead_on_sphere(const nlohmann::json& params) {
    detail::reject_unknown_params(params, {"eps", "omega"});
    double eps = detail::param(params, "eps", 1e-3);
    double om = detail::param(params, "omega", 1.0);
    Scenario sc;
    sc.name = "bead-on-sphere-forced";
    sc.description = "unit sphere constraint with a small tangent time-dependent force";
    sc.n = 3;
    MetricField g(3, Box::cube(4, -100.0, 100.0), [](const auto& t, auto, auto out) {
        using S = std::remove_cvref_t<decltype(t)>;
        (void)t;
        for (int i = 0; i < 9; ++i) out[static_cast<std::size_t>(i)] = S(i % 4 == 0 ? 1.0 : 0.0);
    });
    LevelSetConstraint sphere(VectorMap(3, 1, Box::cube(3, -2.0, 2.0), [](auto in, auto out) {
        out[0] = 0.5 * (in[0] * in[0] + in[1] * in[1] + in[2] * in[2] - 1.0);
    }));
    // tangent covector field: eps sin(omega t) (e3 - (x.e3) x)
    ExternalForce F = ExternalForce::from_generic(3, Box::cube(7, -100.0, 100.0),
                                                  [eps, om](const auto& t, auto x, auto, auto out) {
                                                      auto a = eps * sin(om * t);
                                                      out[0] = a * (-x[2] * x[0]);
                                                      out[1] = a * (-x[2] * x[1]);
                                                      out[2] = a * (1.0 - x[2] * x[2]);
                                                  });
    sc.motion = constrained_spray(g, F, sphere);
    sc.lagrangian = metric_lagrangian(g);
    sc.metric = g;
    sc.force = F;
    sc.constraint = sphere;
    sc.residual_kind = ResidualKind::constraint_drift;
    sc.initial = {0.0, (Vec(3) << 1.0, 0.0, 0.0).finished(), (Vec(3) << 0.0, 1.0, 0.0).finished()};
    sc.integrator.s1 = detail::kTwoPi;
    sc.probes.t = {0.0, detail::kTwoPi};
    sc.default_laws = {"perfectness"};
    return sc;
}

inline Scenario make_frelated_demo(const nlohmann::json& params) {
    detail::reject_unknown_params(params, {"a"});
    double a = detail::param(params, "a", 0.1);
    Scenario sc;
    sc.name = "frelated-demo";
    sc.description = "free particle and its pullback through x -> x + a x^3";
    sc.n = 1;
    TimeLagrangian L_N(ScalarField(1, detail::line_phase_box(), [](const auto& t, auto x, auto y) {
        (void)t; (void)x;
        return 0.5 * y[0] * y[0];
    }), "image");
    TimeLagrangian L_M(ScalarField(1, detail::line_phase_box(), [a](const auto& t, auto x, auto y) {
        (void)t;
        auto df = 1.0 + 3.0 * a * x[0] * x[0];
        auto v = df * y[0];
        return 0.5 * v * v;
    }), "base");
    sc.motion = lagrangian_spray(L_M);
    sc.lagrangian = L_M;
    sc.related_map = detail::cubic_forward(a);
    sc.related_spray_m = lagrangian_spray(L_M);
    sc.related_spray_n = lagrangian_spray(L_N);
    sc.initial = {0.0, Vec::Constant(1, 0.2), Vec::Constant(1, 0.4)};
    sc.integrator.s1 = 1.0;
    sc.default_laws = {"f-related", "sign-ledger", "iZ-Omega-zero", "recover-G-roundtrip"};
    return sc;
}

struct CatalogEntry {
    std::string name;
    std::string description;
    Scenario (*make)(const nlohmann::json&);
};

inline const std::vector<CatalogEntry>& catalog() {
    static const std::vector<CatalogEntry> entries = [] {
        auto describe = [](Scenario (*make)(const nlohmann::json&)) {
            return make(nlohmann::json::object()).description;
        };
        std::vector<CatalogEntry> v;
        v.push_back({"free-particle", describe(&make_free_particle), &make_free_particle});
        v.push_back({"harmonic-td", describe(&make_harmonic_td), &make_harmonic_td});
        v.push_back({"caldirola", describe(&make_caldirola), &make_caldirola});
        v.push_back({"potential-td", describe(&make_potential_td), &make_potential_td});
        v.push_back({"forced-oscillator", describe(&make_forced_oscillator), &make_forced_oscillator});
        v.push_back({"bead-on-sphere-forced", describe(&make_bead_on_sphere), &make_bead_on_sphere});
        v.push_back({"frelated-demo", describe(&make_frelated_demo), &make_frelated_demo});
        return v;
    }();
    return entries;
}

inline Scenario make_scenario(const std::string& name, const nlohmann::json& params) {
    for (const CatalogEntry& e : catalog())
        if (e.name == name) return e.make(params);
    throw ValidationError("unknown scenario '" + name + "'");
}

// ---------------------------------------------------------------------------
// Inline (config-defined) scenarios

/// Build a scenario from an expression-based definition. Two kinds exist:
///   kind = "lagrangian": full L(t, x, y) expression;
///   kind = "kinetic": flat metric, optional potential/constraint.
/// Optional force expressions apply to both; an optional named chart change
/// plus an optional explicit coefficient pair feed the compatibility laws.
inline Scenario make_inline_scenario(const nlohmann::json& definition) {
    for (const auto& [key, value] : definition.items()) {
        static const std::vector<std::string> known{"kind", "n", "lagrangian", "potential", "force",
                                                    "constraint", "chart_change", "compat_pair"};
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw ValidationError("unknown inline-scenario key '" + key + "'");
    }
    if (!definition.contains("n") || !definition.at("n").is_number_integer() || definition.at("n").get<long>() < 1)
        throw ValidationError("inline scenario needs a positive integer 'n'");
    const std::size_t n = definition.at("n").get<std::size_t>();
    if (n > 8) throw ValidationError("inline scenario dimension must be within 1..8");
    std::string kind = definition.value("kind", std::string("lagrangian"));

    Scenario sc;
    sc.name = "inline";
    sc.description = "config-defined system";
    sc.n = n;
    Box phase = phase_box({-100.0, 100.0}, Box::cube(n, -100.0, 100.0), Box::cube(n, -100.0, 100.0));

    std::optional<TimeLagrangian> L;
    if (kind == "lagrangian") {
        if (!definition.contains("lagrangian")) throw ValidationError("inline kind 'lagrangian' needs an 'lagrangian' expression");
        if (definition.contains("potential") || definition.contains("constraint"))
            throw ValidationError("an explicit Lagrangian cannot be combined with potential/constraint blocks");
        Expression e = Expression::parse(definition.at("lagrangian").get<std::string>());
        L = TimeLagrangian(expression_scalar_field(e, n, phase), "base");
    } else if (kind == "kinetic") {
        if (definition.contains("lagrangian"))
            throw ValidationError("inline kind 'kinetic' builds its own Lagrangian");
        MetricField g(n, Box::cube(1 + n, -100.0, 100.0), [n](const auto& t, auto, auto out) {
            using S = std::remove_cvref_t<decltype(t)>;
            (void)t;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) out[i * n + j] = S(i == j ? 1.0 : 0.0);
        });
        sc.metric = g;
        std::optional<PotentialField> U;
        if (definition.contains("potential")) {
            Expression e = Expression::parse(definition.at("potential").get<std::string>());
            if (e.max_y_index() >= 0) throw ValidationError("potential may not reference velocities");
            e.require_dimension(n);
            U = PotentialField(n, Box::cube(1 + n, -100.0, 100.0),
                               [e, n](const auto& t, auto x) {
                                   using S = std::remove_cvref_t<decltype(t)>;
                                   std::vector<S> none;
                                   return e.eval(t, x, std::span<const S>(none.data(), 0));
                               });
        }
        if (definition.contains("constraint")) {
            if (U) throw ValidationError("model a potential on a constrained system as a force covector");
            std::vector<Expression> comps;
            for (const auto& c : definition.at("constraint")) comps.push_back(Expression::parse(c.get<std::string>()));
            LevelSetConstraint cst(expression_constraint_map(comps, n, Box::cube(n, -100.0, 100.0)));
            sc.constraint = cst;
        }
        L = metric_lagrangian(g, U, "base");
    } else {
        throw ValidationError("inline scenario kind must be 'lagrangian' or 'kinetic'");
    }

    std::optional<ExternalForce> F;
    if (definition.contains("force")) {
        std::vector<Expression> comps;
        for (const auto& c : definition.at("force")) comps.push_back(Expression::parse(c.get<std::string>()));
        F = expression_force(comps, n, phase);
        sc.force = F;
    }

    if (sc.constraint) {
        sc.motion = constrained_spray(*sc.metric, F ? *F : ExternalForce::from_generic(
                                                             n, phase,
                                                             [n](const auto& t, auto, auto, auto out) {
                                                                 using S = std::remove_cvref_t<decltype(t)>;
                                                                 (void)t;
                                                                 for (std::size_t i = 0; i < n; ++i) out[i] = S(0.0);
                                                             }),
                                      *sc.constraint);
        sc.residual_kind = ResidualKind::constraint_drift;
        sc.default_laws = {"perfectness"};
    } else if (F) {
        sc.motion = forced_spray(lagrangian_spray(*L), *L, *F);
        sc.residual_kind = ResidualKind::euler_lagrange_forced;
        sc.default_laws = {"sign-ledger", "iZ-Omega-zero", "recover-G-roundtrip"};
    } else {
        sc.motion = lagrangian_spray(*L);
        sc.default_laws = {"sign-ledger", "iZ-Omega-zero", "recover-G-roundtrip"};
    }
    sc.lagrangian = L;

    if (definition.contains("chart_change")) {
        const nlohmann::json& cc = definition.at("chart_change");
        for (const auto& [key, value] : cc.items())
            if (key != "map" && key != "param")
                throw ValidationError("unknown chart_change key '" + key + "'");
        if (n != 1) throw ValidationError("chart changes are provided for one-dimensional systems");
        std::string map = cc.value("map", std::string("cubic"));
        double p = cc.value("param", map == "cubic" ? 0.1 : 2.0);
        if (map == "cubic") {
            sc.transition = detail::cubic_chart_change(p);
        } else if (map == "scale") {
            if (p == 0.0) throw ValidationError("scale factor must be nonzero");
            VectorMap fwd(1, 1, Box::cube(1, -5.0, 5.0), [p](auto in, auto out) { out[0] = p * in[0]; });
            VectorMap inv(1, 1, Box::cube(1, -5.0 * std::abs(p), 5.0 * std::abs(p)),
                          [p](auto in, auto out) { out[0] = in[0] / p; });
            sc.transition = Transition("base", "image", std::move(fwd), std::move(inv), Box::cube(1, -2.0, 2.0));
        } else if (map == "identity") {
            sc.transition = Transition("base", "base", identity_map(1, Box::cube(1, -5.0, 5.0)),
                                       identity_map(1, Box::cube(1, -5.0, 5.0)), Box::cube(1, -4.0, 4.0));
        } else {
            throw ValidationError("chart_change map must be cubic, scale or identity");
        }

        if (definition.contains("compat_pair")) {
            const nlohmann::json& cp = definition.at("compat_pair");
            for (const auto& [key, value] : cp.items())
                if (key != "G_a" && key != "G_b")
                    throw ValidationError("unknown compat_pair key '" + key + "'");
            auto parse_vec = [&](const char* key) {
                std::vector<Expression> comps;
                for (const auto& c : cp.at(key)) comps.push_back(Expression::parse(c.get<std::string>()));
                return comps;
            };
            sc.compat_spray_a = expression_spray(parse_vec("G_a"), "base", n, phase);
            sc.compat_spray_b = expression_spray(parse_vec("G_b"), "image", n, phase);
        } else {
            sc.compat_spray_a = lagrangian_spray(*L);
            sc.compat_spray_b = pushforward_spray(*sc.compat_spray_a, *sc.transition);
            sc.compat_conn_a = lagrangian_connection(*L);
            sc.compat_conn_b = pushforward_connection(*sc.compat_conn_a, *sc.transition);
        }
        sc.related_map = sc.transition->forward();
        sc.related_spray_m = sc.compat_spray_a;
        sc.related_spray_n = sc.compat_spray_b;
        sc.default_laws.push_back("semispray-compat");
        if (sc.compat_conn_a) {
            sc.default_laws.push_back("connection-compat-N0");
            sc.default_laws.push_back("connection-compat-N1");
        }
    }

    sc.initial = {0.0, Vec::Zero(n), Vec::Zero(n)};
    sc.integrator.s1 = 1.0;
    return sc;
}

}  // namespace tdmech
