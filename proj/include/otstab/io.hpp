// JSON serialization of the public types and CSV formatting helpers.
// Doubles are written with 17 significant digits so runs round-trip exactly.
#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "otstab/costs.hpp"
#include "otstab/dual_solver.hpp"
#include "otstab/measures.hpp"
#include "otstab/stability.hpp"

namespace otstab {

using json = nlohmann::json;

inline std::string fmt_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

// ---------------------------------------------------------------------------
// Measures
// ---------------------------------------------------------------------------

inline json to_json(const DiscreteMeasure& mu) {
    json pts = json::array();
    for (int i = 0; i < mu.size(); ++i) {
        json row = json::array();
        for (int k = 0; k < mu.dim; ++k) row.push_back(mu.points[static_cast<std::size_t>(i) * mu.dim + k]);
        pts.push_back(std::move(row));
    }
    return json{{"points", pts}, {"weights", mu.weights}, {"sigma", mu.sigma}};
}

inline DiscreteMeasure measure_from_json(const json& j) {
    std::vector<std::vector<double>> pts;
    for (const auto& row : j.at("points")) pts.push_back(row.get<std::vector<double>>());
    std::vector<double> w = j.at("weights").get<std::vector<double>>();
    std::vector<double> sigma;
    if (j.contains("sigma")) sigma = j.at("sigma").get<std::vector<double>>();
    return make_discrete(pts, std::move(w), std::move(sigma));
}

inline json to_json(const SourceQuadrature& q) {
    json pts = json::array();
    for (int i = 0; i < q.size(); ++i) {
        json row = json::array();
        for (int k = 0; k < q.dim; ++k) row.push_back(q.nodes[static_cast<std::size_t>(i) * q.dim + k]);
        pts.push_back(std::move(row));
    }
    json out{{"points", pts}, {"weights", q.weights}, {"kind", q.kind},
             {"seed", q.seed},  {"r_x", q.r_x},       {"diam", q.diam}};
    if (!q.density.empty()) out["density"] = q.density;
    return out;
}

inline SourceQuadrature quadrature_from_json(const json& j) {
    SourceQuadrature q;
    const auto& pts = j.at("points");
    q.dim = pts.empty() ? 1 : static_cast<int>(pts.front().size());
    for (const auto& row : pts)
        for (const auto& c : row) q.nodes.push_back(c.get<double>());
    q.weights = j.at("weights").get<std::vector<double>>();
    if (j.contains("density")) q.density = j.at("density").get<std::vector<double>>();
    q.kind = j.value("kind", "grid-1d");
    q.seed = j.value("seed", std::uint64_t{0});
    q.r_x = j.value("r_x", 0.0);
    q.diam = j.value("diam", 0.0);
    return q;
}

// ---------------------------------------------------------------------------
// Cost specs
// ---------------------------------------------------------------------------

inline json to_json(const CostSpec& spec) {
    json out{{"p", spec.p}};
    out["scale"] = spec.scale == CostScale::one_over_p ? "one_over_p" : "unit";
    switch (spec.variant) {
        case CostVariant::power: out["variant"] = "power"; break;
        case CostVariant::linear_ell: out["variant"] = "linear_ell"; break;
        case CostVariant::shifted:
            out["variant"] = "shifted";
            out["gamma"] = spec.gamma;
            break;
        case CostVariant::boundary:
            out["variant"] = "boundary";
            out["omega"] = json{{"lo", spec.omega.lo}, {"hi", spec.omega.hi}};
            break;
    }
    return out;
}

inline CostSpec cost_spec_from_json(const json& j) {
    const std::string variant = j.value("variant", "power");
    const std::string scale_s = j.value("scale", "one_over_p");
    if (scale_s != "one_over_p" && scale_s != "unit")
        throw ConfigError("cost spec: unknown scale '" + scale_s + "'");
    const CostScale scale = scale_s == "unit" ? CostScale::unit : CostScale::one_over_p;
    if (variant == "linear_ell") return CostSpec::linear();
    const double p = j.value("p", 2.0);
    if (variant == "power") return CostSpec::power(p, scale);
    if (variant == "shifted") return CostSpec::shifted(p, j.at("gamma").get<double>(), scale);
    if (variant == "boundary") {
        Box omega;
        omega.lo = j.at("omega").at("lo").get<std::vector<double>>();
        omega.hi = j.at("omega").at("hi").get<std::vector<double>>();
        return CostSpec::boundary(p, std::move(omega), scale);
    }
    throw ConfigError("cost spec: unknown variant '" + variant + "'");
}

// ---------------------------------------------------------------------------
// Solutions and reports
// ---------------------------------------------------------------------------

inline json to_json(const DualSolution& sol) {
    return json{{"psi", sol.psi.values}, {"phi", sol.phi},
                {"eps", sol.eps},        {"residual", sol.marginal_residual},
                {"objective", sol.objective}, {"iters", sol.iterations}};
}

inline json to_json(const StabilityReport& rep) {
    json records = json::array();
    for (const auto& r : rep.records)
        records.push_back(json{{"instance_id", r.instance_id},
                               {"p", r.p},
                               {"eps_final", r.eps_final},
                               {"w1_gap", r.w1_gap},
                               {"pot_l2_gap", r.pot_l2_gap},
                               {"var_gap", r.var_gap},
                               {"map_l2_gap", r.map_l2_gap},
                               {"pairing", r.pairing},
                               {"m_bound", r.m_bound},
                               {"bound_ok", r.bound_ok},
                               {"converged", r.converged}});
    return json{{"records", records},
                {"theta_theory", rep.theta_theory},
                {"theta_fit", rep.fit.theta},
                {"theta_stderr", rep.fit.stderr_},
                {"c_fit", rep.fit.c_fit},
                {"constant_fit", rep.constant_fit},
                {"bound_violations", rep.bound_violations}};
}

inline constexpr const char* kReportCsvHeader =
    "instance_id,p,eps_final,w1_gap,pot_l2_gap,var_gap,map_l2_gap,pairing,m_bound,bound_ok";

inline std::string report_csv(const StabilityReport& rep) {
    std::string out = kReportCsvHeader;
    out += "\n";
    for (const auto& r : rep.records) {
        out += r.instance_id;
        out += "," + fmt_g17(r.p);
        out += "," + fmt_g17(r.eps_final);
        out += "," + fmt_g17(r.w1_gap);
        out += "," + fmt_g17(r.pot_l2_gap);
        out += "," + fmt_g17(r.var_gap);
        out += "," + fmt_g17(r.map_l2_gap);
        out += "," + fmt_g17(r.pairing);
        out += "," + fmt_g17(r.m_bound);
        out += r.bound_ok ? ",1" : ",0";
        out += "\n";
    }
    return out;
}

inline std::string values_csv(const std::vector<double>& values) {
    std::string out = "index,value\n";
    for (std::size_t i = 0; i < values.size(); ++i)
        out += std::to_string(i) + "," + fmt_g17(values[i]) + "\n";
    return out;
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open output file: " + path);
    f << content;
}

// FNV-1a over the canonical dump; good enough to fingerprint a config.
inline std::string config_hash(const json& j) {
    const std::string dump = j.dump();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace otstab
