// otlab: config-driven experiment runner for the semi-discrete entropic
// transport lab. Subcommands: solve, stability-pot, stability-map, verify,
// bench. Exit codes: 0 success, 1 verification failure, 2 config error,
// 3 solver failure.

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "otstab/otstab.hpp"
#include "otstab/verify.hpp"

namespace fs = std::filesystem;
using otstab::json;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Meta {
    std::string config_hash;
    std::uint64_t seed = 0;

    json to_json() const {
        return json{{"config_hash", config_hash}, {"seed", seed}, {"version", kVersion}};
    }
    std::string csv_trailer() const {
        return "# config_hash=" + config_hash + " seed=" + std::to_string(seed) +
               " version=" + kVersion + "\n";
    }
};

struct ConfigErrorWithPos : otstab::ConfigError {
    using ConfigError::ConfigError;
};

json load_config(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw otstab::ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    const std::string text = ss.str();
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        // translate the byte offset into a line/column diagnostic
        std::size_t line = 1, col = 1;
        for (std::size_t k = 0; k + 1 < e.byte && k < text.size(); ++k) {
            if (text[k] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ConfigErrorWithPos(path + ":" + std::to_string(line) + ":" + std::to_string(col) +
                                 ": malformed JSON: " + e.what());
    }
}

otstab::SourceQuadrature parse_source(const json& j, std::uint64_t seed) {
    using namespace otstab;
    const std::string kind_s = j.value("kind", "uniform-box");
    SourceKind kind;
    if (kind_s == "uniform-box")
        kind = SourceKind::uniform_box;
    else if (kind_s == "uniform-ball")
        kind = SourceKind::uniform_ball;
    else if (kind_s == "truncated-gaussian")
        kind = SourceKind::truncated_gaussian;
    else
        throw ConfigError("source.kind: unsupported kind '" + kind_s + "'");

    SourceParams params;
    const std::string rule = j.value("quadrature", "grid-1d");
    if (rule == "grid-1d")
        params.rule = QuadRule::grid_1d;
    else if (rule == "grid-tensor")
        params.rule = QuadRule::grid_tensor;
    else if (rule == "monte-carlo")
        params.rule = QuadRule::monte_carlo;
    else
        throw ConfigError("source.quadrature: unsupported rule '" + rule + "'");

    const int dim = j.value("dim", 1);
    const int m = j.value("m", 2048);
    if (j.contains("lo")) params.lo = j.at("lo").get<std::vector<double>>();
    if (j.contains("hi")) params.hi = j.at("hi").get<std::vector<double>>();
    if (j.contains("center")) params.center = j.at("center").get<std::vector<double>>();
    params.radius = j.value("radius", 1.0);
    if (j.contains("mean")) params.mean = j.at("mean").get<std::vector<double>>();
    params.stddev = j.value("stddev", 1.0);
    if (params.lo.empty() && kind != SourceKind::uniform_ball) {
        params.lo.assign(dim, 0.0);
        params.hi.assign(dim, 1.0);
    }
    return sample_source(kind, dim, m, params, seed);
}

otstab::SolverOptions parse_solver(const json& root, const otstab::DiscreteMeasure& targets,
                                   const otstab::CostSpec& spec) {
    using namespace otstab;
    SolverOptions opts;
    opts.schedule = EpsSchedule::defaults(targets, spec);
    if (!root.contains("solver")) return opts;
    const json& j = root.at("solver");
    const std::string method = j.value("method", "newton");
    if (method == "newton")
        opts.method = SolveMethod::newton;
    else if (method == "gradient-ascent")
        opts.method = SolveMethod::gradient_ascent;
    else
        throw ConfigError("solver.method: unknown method '" + method + "'");
    opts.tol_marginal = j.value("tol_marginal", opts.tol_marginal);
    opts.max_iters = j.value("max_iters", opts.max_iters);
    const std::string ls = j.value("line_search", "backtracking");
    opts.line_search = ls == "none" ? LineSearch::none : LineSearch::backtracking;
    if (j.contains("eps_schedule")) {
        const json& s = j.at("eps_schedule");
        opts.schedule.eps0 = s.value("eps0", opts.schedule.eps0);
        opts.schedule.factor = s.value("factor", opts.schedule.factor);
        opts.schedule.eps_min = s.value("eps_min", opts.schedule.eps_min);
    }
    return opts;
}

struct TargetSpec {
    otstab::DiscreteMeasure base;
    std::vector<std::string> families;
    std::string fit_family = "location-shift";
    int levels = 6;
    double delta = 0.25;
    double theta_margin = 0.5;
};

TargetSpec parse_targets(const json& root) {
    using namespace otstab;
    if (!root.contains("targets")) throw ConfigError("config: missing 'targets' section");
    const json& j = root.at("targets");
    TargetSpec t;
    t.base = measure_from_json(j.at("base"));
    if (j.contains("families")) t.families = j.at("families").get<std::vector<std::string>>();
    t.fit_family = j.value("fit_family", t.families.empty() ? "location-shift" : t.families[0]);
    t.levels = j.value("levels", 6);
    t.delta = j.value("delta", 0.25);
    t.theta_margin = j.value("theta_margin", 0.5);
    return t;
}

otstab::FamilyKind family_kind_of(const std::string& name) {
    if (name == "location-shift") return otstab::FamilyKind::location_shift;
    if (name == "mass-transfer") return otstab::FamilyKind::mass_transfer;
    if (name == "jitter") return otstab::FamilyKind::jitter;
    throw otstab::ConfigError("targets.families: unknown family '" + name + "'");
}

int cmd_solve(const json& cfg, const Meta& meta, const std::string& out_dir) {
    using namespace otstab;
    const std::uint64_t seed = meta.seed;
    const SourceQuadrature quad = parse_source(cfg.value("source", json::object()), seed);
    const CostSpec spec = cost_spec_from_json(cfg.value("cost", json::object()));
    const TargetSpec targets = parse_targets(cfg);
    SolverOptions opts = parse_solver(cfg, targets.base, spec);

    std::vector<DualSolution> ladder;
    try {
        ladder = solve_eps_schedule(quad, targets.base, spec, opts);
    } catch (const NonConvergence& e) {
        std::cerr << "otlab solve: " << e.what() << "\n";
        return 3;
    }
    const DualSolution& final_sol = ladder.back();

    json levels = json::array();
    for (std::size_t k = 0; k < ladder.size(); ++k) {
        double inc = 0.0;
        if (k > 0)
            for (std::size_t i = 0; i < ladder[k].psi.values.size(); ++i)
                inc = std::max(inc,
                               std::abs(ladder[k].psi.values[i] - ladder[k - 1].psi.values[i]));
        levels.push_back(json{{"eps", ladder[k].eps},
                              {"residual", ladder[k].marginal_residual},
                              {"iters", ladder[k].iterations},
                              {"psi_increment_sup", inc}});
    }
    json out = to_json(final_sol);
    out["levels"] = levels;
    out["meta"] = meta.to_json();
    write_file(out_dir + "/solution.json", out.dump(2) + "\n");
    write_file(out_dir + "/phi.csv", values_csv(final_sol.phi) + meta.csv_trailer());
    write_file(out_dir + "/psi.csv", values_csv(final_sol.psi.values) + meta.csv_trailer());
    std::cout << "solve: eps=" << final_sol.eps << " residual=" << final_sol.marginal_residual
              << " objective=" << final_sol.objective << "\n";
    return 0;
}

int cmd_stability(const json& cfg, const Meta& meta, const std::string& out_dir, bool map_mode,
                  bool oracle) {
    using namespace otstab;
    const SourceQuadrature quad = parse_source(cfg.value("source", json::object()), meta.seed);
    const CostSpec spec = cost_spec_from_json(cfg.value("cost", json::object()));
    const TargetSpec targets = parse_targets(cfg);
    if (targets.families.empty()) {
        std::cerr << "otlab stability: empty family list\n";
        return 2;
    }
    if (targets.levels < 4) {
        std::cerr << "otlab stability: need at least 4 levels for the exponent fit\n";
        return 2;
    }
    StabilityOptions opts;
    opts.solver = parse_solver(cfg, targets.base, spec);
    opts.use_oracle = oracle;
    opts.theta_margin = targets.theta_margin;

    StabilityReport merged;
    bool have_fit = false;
    int done = 0, total = 0;
    for (const std::string& fam_name : targets.families) {
        const FamilyKind kind = family_kind_of(fam_name);
        const auto family =
            make_family(targets.base, kind, targets.levels, targets.delta, meta.seed + 101);
        StabilityReport rep;
        try {
            rep = run_stability(quad, family, spec, opts, map_mode, family_tag(kind));
        } catch (const NonConvergence& e) {
            std::cerr << "otlab stability: family " << fam_name << " failed: " << e.what()
                      << "\n";
            total += targets.levels;
            continue;
        }
        for (const auto& r : rep.records) {
            ++total;
            if (r.converged) ++done;
        }
        merged.theta_theory = rep.theta_theory;
        merged.bound_violations += rep.bound_violations;
        merged.constant_fit = std::max(merged.constant_fit, rep.constant_fit);
        if (fam_name == targets.fit_family) {
            merged.fit = rep.fit;
            have_fit = true;
        }
        for (auto& r : rep.records) merged.records.push_back(std::move(r));
    }
    if (!have_fit && !merged.records.empty()) {
        std::vector<double> xs, ys;
        for (const auto& r : merged.records) {
            if (r.converged && r.w1_gap > 0.0) {
                xs.push_back(r.w1_gap);
                ys.push_back(map_mode ? r.map_l2_gap : r.pot_l2_gap);
            }
        }
        try {
            merged.fit = exponent_fit(xs, ys);
        } catch (const FitError&) {
            merged.fit = ExponentFit{};
        }
    }

    json out = to_json(merged);
    out["meta"] = meta.to_json();
    write_file(out_dir + "/report.json", out.dump(2) + "\n");
    write_file(out_dir + "/report.csv", report_csv(merged) + meta.csv_trailer());
    std::cout << (map_mode ? "stability-map" : "stability-pot")
              << ": records=" << merged.records.size() << " theta_theory=" << merged.theta_theory
              << " theta_fit=" << merged.fit.theta
              << " bound_violations=" << merged.bound_violations << "\n";
    if (total == 0) return 2;
    return (static_cast<double>(done) / total >= 0.75) ? 0 : 3;
}

int cmd_verify(const json& cfg, const Meta& meta, const std::string& out_dir,
               const std::string& suite) {
    using namespace otstab;
    VerifyConfig vcfg;
    vcfg.seed = meta.seed;
    if (cfg.contains("verify")) {
        const json& v = cfg.at("verify");
        vcfg.curvature_trials = v.value("curvature_trials", vcfg.curvature_trials);
        vcfg.logconcavity_instances = v.value("logconcavity_instances", vcfg.logconcavity_instances);
        vcfg.derivative_instances = v.value("derivative_instances", vcfg.derivative_instances);
        vcfg.poincare_instances = v.value("poincare_instances", vcfg.poincare_instances);
        vcfg.displacement_pairs = v.value("displacement_pairs", vcfg.displacement_pairs);
        vcfg.gamma_scale = v.value("gamma_scale", 1.0);
        vcfg.grid_n = v.value("grid_n", vcfg.grid_n);
        if (v.contains("suites")) vcfg.suites = v.at("suites").get<std::vector<std::string>>();
    }
    if (!suite.empty()) vcfg.suites = {suite};

    const auto results = run_verify_battery(vcfg);
    json jres = json::array();
    std::vector<std::string> failing;
    for (const auto& r : results) {
        std::printf("[%s] %-14s max violation = %.3e %s\n", r.pass ? "PASS" : "FAIL",
                    r.name.c_str(), r.max_violation, r.detail.c_str());
        jres.push_back(json{{"suite", r.name},
                            {"pass", r.pass},
                            {"max_violation", r.max_violation},
                            {"detail", r.detail}});
        if (!r.pass) failing.push_back(r.name);
    }
    json out{{"suites", jres}, {"meta", meta.to_json()}};
    write_file(out_dir + "/verify.json", out.dump(2) + "\n");
    if (!failing.empty()) {
        std::string names;
        for (const auto& n : failing) names += (names.empty() ? "" : ", ") + n;
        std::cerr << "verification failed: " << names << "\n";
        return 1;
    }
    return 0;
}

int cmd_bench(const json& cfg, const Meta& meta, const std::string& out_dir) {
    using namespace otstab;
    (void)cfg;
    std::string csv = "name,m,n,eps_min,iters_total,residual,seconds\n";
    Rng rng(meta.seed);
    for (int m : {256, 1024}) {
        for (int n : {8, 32}) {
            SourceParams params;
            params.lo = {0.0};
            params.hi = {1.0};
            const SourceQuadrature quad =
                sample_source(SourceKind::uniform_box, 1, m, params, meta.seed);
            std::vector<std::vector<double>> pts;
            std::vector<double> w;
            for (int i = 0; i < n; ++i) {
                pts.push_back({(i + 0.5) / n});
                w.push_back(0.5 + rng.uniform());
            }
            const DiscreteMeasure mu = make_discrete(pts, std::move(w));
            const CostSpec spec = CostSpec::power(2.0);
            SolverOptions opts;
            opts.schedule = EpsSchedule::defaults(mu, spec);
            const auto t0 = std::chrono::steady_clock::now();
            const auto ladder = solve_eps_schedule(quad, mu, spec, opts);
            const auto t1 = std::chrono::steady_clock::now();
            int iters = 0;
            for (const auto& s : ladder) iters += s.iterations;
            const double secs = std::chrono::duration<double>(t1 - t0).count();
            csv += "newton," + std::to_string(m) + "," + std::to_string(n) + "," +
                   fmt_g17(ladder.back().eps) + "," + std::to_string(iters) + "," +
                   fmt_g17(ladder.back().marginal_residual) + "," + fmt_g17(secs) + "\n";
        }
    }
    write_file(out_dir + "/bench.csv", csv + meta.csv_trailer());
    std::cout << "bench: wrote " << out_dir << "/bench.csv\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"otlab: semi-discrete entropic optimal transport stability lab"};
    app.require_subcommand(1);

    std::string config_path, out_dir, suite;
    long long seed_override = -1;
    bool oracle = false;

    auto add_common = [&](CLI::App* cmd, bool with_oracle, bool with_suite) {
        cmd->add_option("--config", config_path, "JSON run configuration")->required();
        cmd->add_option("--out", out_dir, "output directory (default: config output_dir)");
        cmd->add_option("--seed", seed_override, "override the config seed");
        if (with_oracle)
            cmd->add_flag("--oracle", oracle, "use exact LP duals instead of the entropic solve");
        if (with_suite) cmd->add_option("--suite", suite, "run a single verification suite");
    };

    CLI::App* solve = app.add_subcommand("solve", "solve one instance and dump potentials");
    add_common(solve, false, false);
    CLI::App* spot = app.add_subcommand("stability-pot", "potential stability experiment");
    add_common(spot, true, false);
    CLI::App* smap = app.add_subcommand("stability-map", "map stability experiment");
    add_common(smap, true, false);
    CLI::App* verify = app.add_subcommand("verify", "run the invariant battery");
    add_common(verify, false, true);
    CLI::App* bench = app.add_subcommand("bench", "timing runs");
    add_common(bench, false, false);

    CLI11_PARSE(app, argc, argv);

    try {
        const json cfg = load_config(config_path);
        Meta meta;
        meta.config_hash = otstab::config_hash(cfg);
        meta.seed = seed_override >= 0 ? static_cast<std::uint64_t>(seed_override)
                                       : cfg.value("seed", std::uint64_t{42});
        std::string dir = !out_dir.empty() ? out_dir : cfg.value("output_dir", std::string("out"));
        fs::create_directories(dir);

        if (solve->parsed()) return cmd_solve(cfg, meta, dir);
        if (spot->parsed()) return cmd_stability(cfg, meta, dir, false, oracle);
        if (smap->parsed()) return cmd_stability(cfg, meta, dir, true, oracle);
        if (verify->parsed()) return cmd_verify(cfg, meta, dir, suite);
        if (bench->parsed()) return cmd_bench(cfg, meta, dir);
        return 2;
    } catch (const otstab::NonConvergence& e) {
        std::cerr << "otlab: solver did not converge: " << e.what() << "\n";
        return 3;
    } catch (const otstab::SolverError& e) {
        std::cerr << "otlab: solver error: " << e.what() << "\n";
        return 3;
    } catch (const otstab::Error& e) {
        std::cerr << "otlab: " << e.what() << "\n";
        return 2;
    } catch (const json::exception& e) {
        std::cerr << "otlab: config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "otlab: " << e.what() << "\n";
        return 2;
    }
}
