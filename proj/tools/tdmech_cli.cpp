// Scenario runner and invariant checker for the time-dependent mechanics
// engine. Subcommands:
//   run <config>              integrate, export CSV/JSON artifacts, check laws
//   check <config> [--laws]   run the named law subset and report residuals
//   list-scenarios [--json]   print the built-in catalog
//
// Exit codes: 0 success, 1 failing law, 2 parse error (config text, unknown
// law, usage), 3 validation error, 4 runtime failure.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "tdmech/checks.hpp"
#include "tdmech/dynamics.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace tdmech;

namespace {

void reject_unknown(const json& obj, std::initializer_list<const char*> known, const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* k : known) ok = ok || key == k;
        if (!ok) throw ValidationError("unknown key '" + key + "' in " + where);
    }
}

struct LoadedConfig {
    Scenario scenario;
    std::vector<std::string> laws;       // empty: use scenario defaults
    CheckOptions check_opts;
    fs::path out_dir = "out";
    bool trajectory_csv = true;
    bool residual_csv = true;
    bool report_json = true;
    bool project_constraint = false;
};

LoadedConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file '" + path.string() + "'");
    json cfg = json::parse(in);  // json::parse_error maps to exit 2

    reject_unknown(cfg, {"version", "scenario", "initial", "integrator", "outputs", "checks"}, "config");
    if (!cfg.contains("version") || cfg.at("version") != 1)
        throw ValidationError("config must declare \"version\": 1");
    if (!cfg.contains("scenario")) throw ValidationError("config must name a scenario");

    LoadedConfig out;
    const json& sc = cfg.at("scenario");
    if (sc.is_string()) {
        out.scenario = make_scenario(sc.get<std::string>(), json::object());
    } else if (sc.is_object() && sc.contains("inline")) {
        reject_unknown(sc, {"inline"}, "scenario");
        out.scenario = make_inline_scenario(sc.at("inline"));
    } else if (sc.is_object()) {
        reject_unknown(sc, {"name", "params"}, "scenario");
        if (!sc.contains("name")) throw ValidationError("scenario object needs a 'name'");
        out.scenario = make_scenario(sc.at("name").get<std::string>(),
                                     sc.contains("params") ? sc.at("params") : json::object());
    } else {
        throw ValidationError("scenario must be a name or an object");
    }
    Scenario& s = out.scenario;

    if (cfg.contains("initial")) {
        const json& init = cfg.at("initial");
        reject_unknown(init, {"t0", "x", "y"}, "initial");
        if (init.contains("t0")) s.initial.t = init.at("t0").get<double>();
        auto read_vec = [&](const char* key, Vec& dst) {
            if (!init.contains(key)) return;
            std::vector<double> v = init.at(key).get<std::vector<double>>();
            if (v.size() != s.n)
                throw ValidationError(std::string("initial '") + key + "' must have dimension " + std::to_string(s.n));
            dst = Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
        };
        read_vec("x", s.initial.x);
        read_vec("y", s.initial.y);
    }

    if (cfg.contains("integrator")) {
        const json& ig = cfg.at("integrator");
        reject_unknown(ig, {"method", "h", "span", "max_steps", "abs_tol", "rel_tol", "project_constraint"},
                       "integrator");
        if (ig.contains("method")) {
            std::string m = ig.at("method").get<std::string>();
            if (m == "rk4") s.integrator.method = StepMethod::rk4;
            else if (m == "dp54") s.integrator.method = StepMethod::dp54;
            else throw ValidationError("integrator method must be rk4 or dp54");
        }
        if (ig.contains("h")) s.integrator.h = ig.at("h").get<double>();
        if (ig.contains("span")) {
            std::vector<double> span = ig.at("span").get<std::vector<double>>();
            if (span.size() != 2) throw ValidationError("span must be [s0, s1]");
            s.integrator.s0 = span[0];
            s.integrator.s1 = span[1];
        }
        if (ig.contains("max_steps")) s.integrator.max_steps = ig.at("max_steps").get<std::size_t>();
        if (ig.contains("abs_tol")) s.integrator.abs_tol = ig.at("abs_tol").get<double>();
        if (ig.contains("rel_tol")) s.integrator.rel_tol = ig.at("rel_tol").get<double>();
        if (ig.contains("project_constraint")) out.project_constraint = ig.at("project_constraint").get<bool>();
        if (!(s.integrator.h > 0.0)) throw ValidationError("step size must be positive");
        if (!(s.integrator.s1 > s.integrator.s0)) throw ValidationError("span must be increasing");
    }

    if (cfg.contains("outputs")) {
        const json& o = cfg.at("outputs");
        reject_unknown(o, {"dir", "trajectory_csv", "residual_csv", "report_json"}, "outputs");
        if (o.contains("dir")) out.out_dir = o.at("dir").get<std::string>();
        if (o.contains("trajectory_csv")) out.trajectory_csv = o.at("trajectory_csv").get<bool>();
        if (o.contains("residual_csv")) out.residual_csv = o.at("residual_csv").get<bool>();
        if (o.contains("report_json")) out.report_json = o.at("report_json").get<bool>();
    }

    if (cfg.contains("checks")) {
        const json& c = cfg.at("checks");
        reject_unknown(c, {"laws", "samples", "seed", "tolerances"}, "checks");
        if (c.contains("laws")) out.laws = c.at("laws").get<std::vector<std::string>>();
        if (c.contains("samples")) out.check_opts.samples = c.at("samples").get<std::size_t>();
        if (c.contains("seed")) out.check_opts.seed = c.at("seed").get<unsigned>();
        if (c.contains("tolerances"))
            for (const auto& [law, tol] : c.at("tolerances").items())
                out.check_opts.tolerances[law] = tol.get<double>();
    }

    if (out.project_constraint && !s.constraint)
        throw ValidationError("project_constraint needs a constrained scenario");
    return out;
}

fs::path resolve_out_dir(const fs::path& dir) {
    if (dir.is_absolute()) return dir;
    if (const char* root = std::getenv("TDMECH_OUTPUT_ROOT")) return fs::path(root) / dir;
    return dir;
}

ResidualSeries scenario_residual(const Scenario& s, const Trajectory& traj) {
    switch (s.residual_kind) {
        case ResidualKind::euler_lagrange:
            return el_residual(*s.lagrangian, traj);
        case ResidualKind::euler_lagrange_forced:
            return el_residual(*s.lagrangian, traj, &*s.force);
        case ResidualKind::constraint_drift: {
            ResidualSeries out;
            for (const TrajectorySample& p : traj.samples)
                out.record(p.s, s.constraint->value(p.x).lpNorm<Eigen::Infinity>());
            return out;
        }
    }
    throw ValidationError("unhandled residual kind");
}

void print_law_lines(const InvariantReport& rep) {
    for (const LawRecord& r : rep.records) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.3e (tol %.1e)", r.max_residual, r.tolerance);
        std::cout << (r.pass ? "PASS" : "FAIL") << "  " << r.law << "  max residual " << buf << "\n";
    }
}

int cmd_run(const fs::path& config_path) {
    LoadedConfig cfg = load_config(config_path);
    Scenario& s = cfg.scenario;

    if (s.constraint) s.constraint->require_on_constraint(s.initial.x, s.initial.y);
    if (cfg.project_constraint)
        s.integrator.post_step =
            constraint_projection_hook(*s.metric, *s.constraint, s.initial.t, s.integrator.s0);

    Trajectory traj = integrate(*s.motion, s.initial.t, s.initial.x, s.initial.y, s.integrator);

    fs::path dir = resolve_out_dir(cfg.out_dir);
    fs::create_directories(dir);
    if (cfg.trajectory_csv) {
        std::ofstream os(dir / "trajectory.csv", std::ios::binary);
        write_trajectory_csv(os, traj);
        std::cout << "wrote " << (dir / "trajectory.csv").string() << "\n";
    }
    if (cfg.residual_csv && s.lagrangian) {
        std::ofstream os(dir / "residual.csv", std::ios::binary);
        write_residual_csv(os, scenario_residual(s, traj));
        std::cout << "wrote " << (dir / "residual.csv").string() << "\n";
    }

    const std::vector<std::string>& laws = cfg.laws.empty() ? s.default_laws : cfg.laws;
    InvariantReport rep = run_laws(laws, s, cfg.check_opts);
    if (cfg.report_json) {
        json j = rep.to_json();
        j["scenario"] = s.name;
        j["samples"] = traj.samples.size();
        std::ofstream os(dir / "report.json", std::ios::binary);
        os << j.dump(2) << "\n";
        std::cout << "wrote " << (dir / "report.json").string() << "\n";
    }
    print_law_lines(rep);
    return rep.all_pass() ? 0 : 1;
}

int cmd_check(const fs::path& config_path, const std::vector<std::string>& law_flags, bool as_json) {
    LoadedConfig cfg = load_config(config_path);
    std::vector<std::string> laws = !law_flags.empty() ? law_flags
                                  : !cfg.laws.empty()  ? cfg.laws
                                                       : cfg.scenario.default_laws;
    InvariantReport rep = run_laws(laws, cfg.scenario, cfg.check_opts);
    if (as_json) {
        json j = rep.to_json();
        j["scenario"] = cfg.scenario.name;
        std::cout << j.dump(2) << "\n";
    } else {
        print_law_lines(rep);
    }
    return rep.all_pass() ? 0 : 1;
}

int cmd_list(bool as_json) {
    if (as_json) {
        json arr = json::array();
        for (const CatalogEntry& e : catalog()) arr.push_back({{"name", e.name}, {"description", e.description}});
        std::cout << arr.dump(2) << "\n";
    } else {
        for (const CatalogEntry& e : catalog()) std::cout << e.name << "  -  " << e.description << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"time-dependent Lagrangian mechanics scenario runner"};
    app.require_subcommand(1);

    std::string run_config, check_config;
    std::vector<std::string> laws;
    bool check_json = false, list_json = false;

    CLI::App* run = app.add_subcommand("run", "integrate a scenario and export artifacts");
    run->add_option("config", run_config, "path to a JSON scenario config")->required();

    CLI::App* check = app.add_subcommand("check", "evaluate invariance laws against a scenario");
    check->add_option("config", check_config, "path to a JSON scenario config")->required();
    check->add_option("--laws", laws, "comma-separated law names")->delimiter(',');
    check->add_flag("--json", check_json, "print the report as JSON");

    CLI::App* list = app.add_subcommand("list-scenarios", "print the built-in catalog");
    list->add_flag("--json", list_json, "machine-readable output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (run->parsed()) return cmd_run(run_config);
        if (check->parsed()) return cmd_check(check_config, laws, check_json);
        return cmd_list(list_json);
    } catch (const json::exception& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const ExprError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 3;
    } catch (const ProvenanceError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "runtime failure: " << e.what() << "\n";
        return 4;
    }
}
