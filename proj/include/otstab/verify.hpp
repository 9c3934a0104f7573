// Invariant battery behind `otlab verify`: finite-difference derivative
// checks, log-concavity of the partition functional, curvature certificates,
// and the one-dimensional functional inequalities. Each suite reports its
// worst violation so a failure is immediately quantified.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "otstab/common.hpp"
#include "otstab/costs.hpp"
#include "otstab/dual_solver.hpp"
#include "otstab/entropic.hpp"
#include "otstab/measures.hpp"
#include "otstab/stability.hpp"

namespace otstab {

struct SuiteResult {
    std::string name;
    bool pass = false;
    double max_violation = 0.0;
    std::string detail;
};

inline std::string fmt_e(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3e", x);
    return buf;
}

struct VerifyConfig {
    std::uint64_t seed = 1;
    long curvature_trials = 100000;
    int logconcavity_instances = 100;
    int derivative_instances = 10;
    int poincare_instances = 100;
    int displacement_pairs = 20;
    double gamma_scale = 1.0;  // fault injection knob: != 1 breaks curvature
    int grid_n = 2000;
    std::vector<std::string> suites;  // empty = run everything
};

// ---------------------------------------------------------------------------
// Random instances for derivative and log-concavity checks. Targets sit in
// [0,1]; psi is anchored at the cost from the midpoint so the conditional
// plans stay mixed at small eps (cell boundaries carry mass for every level).
// ---------------------------------------------------------------------------

struct EntropicInstance {
    SourceQuadrature quad;
    DiscreteMeasure targets;
    std::vector<double> psi;
};

inline EntropicInstance random_entropic_instance(Rng& rng, const CostSpec& spec, double eps,
                                                 int m_min, int m_max, int n_min, int n_max) {
    EntropicInstance inst;
    SourceParams params;
    params.lo = {0.0};
    params.hi = {1.0};
    params.rule = QuadRule::grid_1d;
    const int m = m_min + rng.uniform_int(std::max(1, m_max - m_min + 1));
    inst.quad = sample_source(SourceKind::uniform_box, 1, m, params, rng.next_bits());

    const int n = n_min + rng.uniform_int(std::max(1, n_max - n_min + 1));
    std::vector<std::vector<double>> pts;
    std::vector<double> w;
    for (int i = 0; i < n; ++i) {
        pts.push_back({(i + rng.uniform(0.15, 0.85)) / n});
        w.push_back(0.2 + rng.uniform());
    }
    inst.targets = make_discrete(pts, std::move(w));

    const std::vector<double> mid{0.5};
    inst.psi.resize(n);
    for (int i = 0; i < n; ++i)
        inst.psi[i] =
            cost_eval(spec, mid, inst.targets.point(i)) + 0.3 * eps * rng.uniform(-1.0, 1.0);
    return inst;
}

// ---------------------------------------------------------------------------
// Finite-difference comparisons (central differences, step scaled by |psi|)
// ---------------------------------------------------------------------------

namespace fd {

inline double step(std::span<const double> psi) {
    double a = 0.0;
    for (double v : psi) a = std::max(a, std::abs(v));
    return 1e-6 * (1.0 + a);
}

// max_i |fd_i - g_i| / ||g||_inf  for the gradient of K
inline double grad_K_error(const EntropicInstance& inst, const CostSpec& spec, double eps) {
    const std::vector<double> g = grad_K(inst.psi, inst.quad, inst.targets, spec, eps);
    const double h = step(inst.psi);
    double gmax = 0.0;
    for (double v : g) gmax = std::max(gmax, std::abs(v));
    double worst = 0.0;
    std::vector<double> psi = inst.psi;
    for (std::size_t i = 0; i < psi.size(); ++i) {
        psi[i] = inst.psi[i] + h;
        const double kp = kantorovich_K(psi, inst.quad, inst.targets, spec, eps);
        psi[i] = inst.psi[i] - h;
        const double km = kantorovich_K(psi, inst.quad, inst.targets, spec, eps);
        psi[i] = inst.psi[i];
        worst = std::max(worst, std::abs((kp - km) / (2.0 * h) - g[i]) / gmax);
    }
    return worst;
}

// max over rows of ||fd_row - pi_row||_inf / ||pi_row||_inf
inline double plan_error(const EntropicInstance& inst, const CostSpec& spec, double eps,
                         int node_stride = 7) {
    const ConditionalPlan plan = conditional_plan(inst.psi, inst.targets, spec, eps, inst.quad);
    const double h = step(inst.psi);
    const int n = inst.targets.size();
    double worst = 0.0;
    std::vector<double> psi = inst.psi;
    for (int j = 0; j < inst.quad.size(); j += node_stride) {
        double row_max = 0.0;
        for (int i = 0; i < n; ++i) row_max = std::max(row_max, plan.at(j, i));
        double err = 0.0;
        for (int i = 0; i < n; ++i) {
            psi[i] = inst.psi[i] + h;
            const double fp = c_eps_transform(psi, inst.targets, spec, eps, inst.quad.node(j));
            psi[i] = inst.psi[i] - h;
            const double fm = c_eps_transform(psi, inst.targets, spec, eps, inst.quad.node(j));
            psi[i] = inst.psi[i];
            err = std::max(err, std::abs(-(fp - fm) / (2.0 * h) - plan.at(j, i)));
        }
        worst = std::max(worst, err / row_max);
    }
    return worst;
}

// |fd - quadform| / |quadform| via central differences of the exact gradient
inline double hess_K_error(const EntropicInstance& inst, const CostSpec& spec, double eps,
                           Rng& rng) {
    const int n = inst.targets.size();
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(-1.0, 1.0);
    const double exact = hess_K_quadform(inst.psi, v, inst.quad, inst.targets, spec, eps);
    const double h = step(inst.psi);
    std::vector<double> psip(n), psim(n);
    for (int i = 0; i < n; ++i) {
        psip[i] = inst.psi[i] + h * v[i];
        psim[i] = inst.psi[i] - h * v[i];
    }
    const std::vector<double> gp = grad_K(psip, inst.quad, inst.targets, spec, eps);
    const std::vector<double> gm = grad_K(psim, inst.quad, inst.targets, spec, eps);
    double fd_val = 0.0;
    for (int i = 0; i < n; ++i) fd_val += (gp[i] - gm[i]) * v[i];
    fd_val /= 2.0 * h;
    return std::abs(fd_val - exact) / std::max(std::abs(exact), 1e-12);
}

inline double log_I_hess_error(const EntropicInstance& inst, const CostSpec& spec, double eps,
                               double beta, Rng& rng) {
    const int n = inst.targets.size();
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(-1.0, 1.0);
    const double exact =
        log_I_hess_quadform(inst.psi, v, inst.quad, inst.targets, spec, eps, beta);
    const double h = step(inst.psi);
    std::vector<double> psip(n), psim(n);
    for (int i = 0; i < n; ++i) {
        psip[i] = inst.psi[i] + h * v[i];
        psim[i] = inst.psi[i] - h * v[i];
    }
    const std::vector<double> gp = grad_log_I(psip, inst.quad, inst.targets, spec, eps, beta);
    const std::vector<double> gm = grad_log_I(psim, inst.quad, inst.targets, spec, eps, beta);
    double fd_val = 0.0;
    for (int i = 0; i < n; ++i) fd_val += (gp[i] - gm[i]) * v[i];
    fd_val /= 2.0 * h;
    return std::abs(fd_val - exact) / std::max(std::abs(exact), 1e-12);
}

}  // namespace fd

// ---------------------------------------------------------------------------
// Suites
// ---------------------------------------------------------------------------

namespace detail {

inline bool suite_selected(const VerifyConfig& cfg, const std::string& name) {
    if (cfg.suites.empty()) return true;
    return std::find(cfg.suites.begin(), cfg.suites.end(), name) != cfg.suites.end();
}

}  // namespace detail

inline SuiteResult verify_transforms(const VerifyConfig& cfg) {
    SuiteResult res{"transforms", true, 0.0, ""};
    Rng rng(cfg.seed ^ 0x7f001);
    for (int rep = 0; rep < 40; ++rep) {
        const CostSpec spec = CostSpec::power(rep % 2 == 0 ? 2.0 : 1.5);
        const double eps = (rep % 4 < 2) ? 0.1 : 0.01;
        EntropicInstance inst = random_entropic_instance(rng, spec, eps, 30, 60, 2, 8);
        double min_sigma = 1.0;
        for (double s : inst.targets.sigma) min_sigma = std::min(min_sigma, s);
        const double gap_bound = eps * std::log(1.0 / min_sigma);
        for (int j = 0; j < inst.quad.size(); j += 5) {
            const VecView x = inst.quad.node(j);
            const double hard = c_transform(inst.psi, inst.targets, spec, x);
            const double soft = c_eps_transform(inst.psi, inst.targets, spec, eps, x);
            // sandwich: hard <= soft <= hard + eps log(1/min sigma)
            res.max_violation = std::max(res.max_violation, hard - soft);
            res.max_violation = std::max(res.max_violation, soft - hard - gap_bound);
            // shift covariance
            const double lam = rng.uniform(-1.0, 1.0);
            std::vector<double> shifted = inst.psi;
            for (double& v : shifted) v += lam;
            const double soft_sh = c_eps_transform(shifted, inst.targets, spec, eps, x);
            res.max_violation = std::max(res.max_violation, std::abs(soft_sh - (soft - lam)));
            const double hard_sh = c_transform(shifted, inst.targets, spec, x);
            res.max_violation = std::max(res.max_violation, std::abs(hard_sh - (hard - lam)));
        }
        // monotonicity and concavity in psi
        std::vector<double> psi2 = inst.psi;
        for (double& v : psi2) v += rng.uniform(0.0, 0.5);
        const double t = rng.uniform(0.1, 0.9);
        std::vector<double> psit(inst.psi.size());
        for (std::size_t i = 0; i < psit.size(); ++i)
            psit[i] = (1.0 - t) * inst.psi[i] + t * psi2[i];
        for (int j = 0; j < inst.quad.size(); j += 11) {
            const VecView x = inst.quad.node(j);
            const double f1 = c_eps_transform(inst.psi, inst.targets, spec, eps, x);
            const double f2 = c_eps_transform(psi2, inst.targets, spec, eps, x);
            const double ft = c_eps_transform(psit, inst.targets, spec, eps, x);
            res.max_violation = std::max(res.max_violation, f2 - f1);  // psi2 >= psi1 => f2 <= f1
            res.max_violation =
                std::max(res.max_violation, (1.0 - t) * f1 + t * f2 - ft - 1e-12);
        }
        // Lipschitz bound of the hard transform
        const double lip = lipschitz_bound(spec, inst.quad.r_x, inst.targets.radius());
        for (int j = 0; j + 1 < inst.quad.size(); ++j) {
            const double f1 = c_transform(inst.psi, inst.targets, spec, inst.quad.node(j));
            const double f2 = c_transform(inst.psi, inst.targets, spec, inst.quad.node(j + 1));
            const double dx = std::abs(inst.quad.nodes[j + 1] - inst.quad.nodes[j]);
            if (dx > 1e-12)
                res.max_violation =
                    std::max(res.max_violation, std::abs(f2 - f1) / dx - lip - 1e-9);
        }
    }
    res.pass = res.max_violation <= 1e-10;
    return res;
}

inline SuiteResult verify_derivatives(const VerifyConfig& cfg) {
    SuiteResult res{"derivatives", true, 0.0, "rel err vs central differences"};
    Rng rng(cfg.seed ^ 0x7f002);
    const double eps_grid[3] = {1.0, 0.1, 0.01};
    for (int rep = 0; rep < cfg.derivative_instances; ++rep) {
        const CostSpec spec = CostSpec::power(rep % 3 == 0 ? 1.5 : 2.0);
        const double eps = eps_grid[rep % 3];
        EntropicInstance inst = random_entropic_instance(rng, spec, eps, 50, 200, 3, 12);
        res.max_violation = std::max(res.max_violation, fd::grad_K_error(inst, spec, eps));
        res.max_violation = std::max(res.max_violation, fd::plan_error(inst, spec, eps));
    }
    res.pass = res.max_violation <= 1e-5;
    return res;
}

inline SuiteResult verify_hessians(const VerifyConfig& cfg) {
    SuiteResult res{"hessians", true, 0.0, "quadratic forms vs differenced gradients"};
    Rng rng(cfg.seed ^ 0x7f003);
    const double eps_grid[3] = {1.0, 0.1, 0.01};
    for (int rep = 0; rep < cfg.derivative_instances; ++rep) {
        const CostSpec spec = CostSpec::power(rep % 3 == 1 ? 1.5 : 2.0);
        const double eps = eps_grid[rep % 3];
        EntropicInstance inst = random_entropic_instance(rng, spec, eps, 50, 200, 3, 12);
        res.max_violation = std::max(res.max_violation, fd::hess_K_error(inst, spec, eps, rng));
        res.max_violation =
            std::max(res.max_violation, fd::log_I_hess_error(inst, spec, eps, 1.0, rng));
    }
    res.pass = res.max_violation <= 1e-5;
    return res;
}

// Midpoint log-concavity of I for the linear and shifted p >= 2 costs
// (deficit <= 1e-10), and the modified inequality with the W_p penalty for
// 1 < p < 2 (deficit <= beta t(1-t) gamma W_p^p + 1e-8).
inline SuiteResult verify_logconcavity(const VerifyConfig& cfg) {
    SuiteResult res{"logconcavity", true, 0.0, ""};
    Rng rng(cfg.seed ^ 0x7f004);
    SourceParams params;
    params.lo = {0.0};
    params.hi = {1.0};
    const SourceQuadrature quad =
        sample_source(SourceKind::uniform_box, 1, 256, params, cfg.seed + 17);
    const double r_y = 1.0;

    auto random_targets = [&](int n) {
        std::vector<std::vector<double>> pts;
        std::vector<double> w;
        for (int i = 0; i < n; ++i) {
            pts.push_back({rng.uniform()});
            w.push_back(0.2 + rng.uniform());
        }
        return make_discrete(pts, std::move(w));
    };

    std::vector<CostSpec> exact_specs{CostSpec::linear()};
    for (double p : {2.0, 2.5, 3.0})
        exact_specs.push_back(
            CostSpec::shifted(p, shift_gamma(p, quad.r_x, r_y), CostScale::one_over_p));

    double exact_worst = -std::numeric_limits<double>::infinity();
    for (const CostSpec& spec : exact_specs) {
        for (int rep = 0; rep < cfg.logconcavity_instances / 4 + 1; ++rep) {
            const DiscreteMeasure targets = random_targets(3 + rng.uniform_int(8));
            const double eps = (rep % 2 == 0) ? 1.0 : 0.25;
            const int n = targets.size();
            std::vector<double> psi0(n), psi1(n), psit(n);
            for (int i = 0; i < n; ++i) {
                psi0[i] = rng.uniform(-0.4, 0.4);
                psi1[i] = rng.uniform(-0.4, 0.4);
            }
            const double t = rng.uniform(0.1, 0.9);
            for (int i = 0; i < n; ++i) psit[i] = (1.0 - t) * psi0[i] + t * psi1[i];
            const double l0 = log_partition_I(psi0, quad, targets, spec, eps, 1.0);
            const double l1 = log_partition_I(psi1, quad, targets, spec, eps, 1.0);
            const double lt = log_partition_I(psit, quad, targets, spec, eps, 1.0);
            exact_worst = std::max(exact_worst, (1.0 - t) * l0 + t * l1 - lt);
        }
    }

    double modified_worst = -std::numeric_limits<double>::infinity();
    for (double p : {1.2, 1.5, 1.8}) {
        const CostSpec spec = CostSpec::power(p, CostScale::unit);
        const double gamma = gamma_analytic(p) * cfg.gamma_scale;
        for (int rep = 0; rep < cfg.logconcavity_instances / 4 + 1; ++rep) {
            const DiscreteMeasure targets = random_targets(3 + rng.uniform_int(8));
            const double eps = (rep % 2 == 0) ? 0.5 : 0.25;
            const double beta = 1.0;
            const int n = targets.size();
            std::vector<double> psi0(n), psi1(n), psit(n);
            for (int i = 0; i < n; ++i) {
                psi0[i] = rng.uniform(-0.4, 0.4);
                psi1[i] = rng.uniform(-0.4, 0.4);
            }
            const double t = rng.uniform(0.1, 0.9);
            for (int i = 0; i < n; ++i) psit[i] = (1.0 - t) * psi0[i] + t * psi1[i];
            const double l0 = log_partition_I(psi0, quad, targets, spec, eps, beta);
            const double l1 = log_partition_I(psi1, quad, targets, spec, eps, beta);
            const double lt = log_partition_I(psit, quad, targets, spec, eps, beta);
            const TiltedQuadrature t0 = tilted_quadrature(psi0, quad, targets, spec, eps, beta);
            const TiltedQuadrature t1 = tilted_quadrature(psi1, quad, targets, spec, eps, beta);
            const DiscreteMeasure m0 = measure_from_quadrature(quad, t0.weights);
            const DiscreteMeasure m1 = measure_from_quadrature(quad, t1.weights);
            const double wpp = wp_discrete(m0, m1, CostSpec::power(p, CostScale::unit)).value;
            const double bound = beta * t * (1.0 - t) * gamma * wpp;
            modified_worst = std::max(modified_worst, (1.0 - t) * l0 + t * l1 - lt - bound);
        }
    }

    res.max_violation = std::max(exact_worst, modified_worst - 1e-8 + 1e-10);
    res.pass = exact_worst <= 1e-10 && modified_worst <= 1e-8;
    res.detail = "exact deficit " + fmt_e(exact_worst) + ", modified excess " +
                 fmt_e(modified_worst);
    return res;
}

inline SuiteResult verify_curvature(const VerifyConfig& cfg) {
    SuiteResult res{"curvature", true, 0.0, ""};
    Rng rng(cfg.seed ^ 0x7f005);
    for (double p : {1.2, 1.5, 1.8}) {
        CurvatureCertificate cert = curvature_gamma(p, cfg.curvature_trials, cfg.seed + 31);
        const double gamma = cert.gamma_analytic * cfg.gamma_scale;
        res.max_violation = std::max(res.max_violation, cert.gamma_empirical - gamma);
        // pPC slack at the (possibly scaled) constant
        std::vector<double> x0(2), x1(2);
        for (int rep = 0; rep < 10000; ++rep) {
            for (int k = 0; k < 2; ++k) {
                x0[k] = rng.normal();
                x1[k] = rng.normal();
            }
            const double t = rng.uniform();
            const double slack = semiconcavity_check(p, gamma, x0, x1, t);
            res.max_violation = std::max(res.max_violation, -slack - 1e-12);
        }
        // antipodal worst case explicitly
        const double slack_anti = semiconcavity_check(p, gamma, std::vector<double>{1.0},
                                                      std::vector<double>{-1.0}, 0.5);
        res.max_violation = std::max(res.max_violation, -slack_anti - 1e-12);
    }
    res.pass = res.max_violation <= 1e-9;
    return res;
}

inline SuiteResult verify_displacement(const VerifyConfig& cfg) {
    SuiteResult res{"displacement", true, 0.0, ""};
    Rng rng(cfg.seed ^ 0x7f006);
    const SourceQuadrature quad = uniform_grid_1d(cfg.grid_n, 0.0, 1.0);
    const int m = quad.size();
    for (int rep = 0; rep < cfg.displacement_pairs; ++rep) {
        std::vector<double> h0(m), h1(m);
        const double a0 = rng.uniform(0.1, 0.5), a1 = rng.uniform(0.1, 0.5);
        const double f0 = rng.uniform(0.5, 1.5), f1 = rng.uniform(0.5, 1.5);
        for (int j = 0; j < m; ++j) {
            const double x = quad.nodes[j];
            h0[j] = 1.0 + a0 * std::sin(f0 * 3.14159265358979 * x);
            h1[j] = 1.0 + a1 * std::cos(f1 * 3.14159265358979 * x);
        }
        const double p = (rep % 2 == 0) ? 2.0 : 1.5;
        const double t = rng.uniform(0.2, 0.8);
        res.max_violation =
            std::max(res.max_violation, displacement_bound_1d(h0, h1, quad, p, t));
    }
    res.pass = res.max_violation <= 1e-6;
    return res;
}

inline SuiteResult verify_poincare(const VerifyConfig& cfg) {
    SuiteResult res{"poincare", true, 0.0, ""};
    Rng rng(cfg.seed ^ 0x7f007);
    const int n = cfg.grid_n;
    auto random_convex = [&]() {
        // convex piecewise-linear: integrate an increasing slope sequence
        const int kinks = 3 + rng.uniform_int(6);
        std::vector<double> slope_at(kinks + 1);
        double s = rng.uniform(-3.0, 0.0);
        for (int k = 0; k <= kinks; ++k) {
            slope_at[k] = s;
            s += rng.uniform(0.0, 2.0);
        }
        std::vector<double> u(n, 0.0);
        double acc = rng.uniform(-0.5, 0.5);
        for (int i = 0; i < n; ++i) {
            const double x = static_cast<double>(i) / (n - 1);
            const int seg = std::min(kinks, static_cast<int>(x * (kinks + 1)));
            u[i] = acc;
            acc += slope_at[seg] / (n - 1);
        }
        return u;
    };
    for (int rep = 0; rep < cfg.poincare_instances; ++rep) {
        const std::vector<double> u = random_convex();
        const std::vector<double> v = random_convex();
        res.max_violation = std::max(res.max_violation, -reverse_poincare_1d(u, v));
    }
    res.pass = res.max_violation <= 1e-6;
    return res;
}

inline SuiteResult verify_gn(const VerifyConfig& cfg) {
    SuiteResult res{"gn-interp", true, 0.0, ""};
    const double r = 1.5;
    const int n = 1000;
    const double c_frozen = gn_calibrate_1d(r, n, 12, cfg.seed + 100);
    // held-out family
    double worst = 0.0;
    for (int k = 0; k < 12; ++k) {
        const std::vector<double> u = smoothed_walk_1d(n, cfg.seed + 77777 + 131 * k);
        worst = std::max(worst, -gn_interp_check_1d(u, r, c_frozen));
    }
    // homogeneity: slack scales linearly in the amplitude
    {
        std::vector<double> u = smoothed_walk_1d(n, cfg.seed + 5);
        const double s1 = gn_interp_check_1d(u, r, c_frozen);
        for (double& x : u) x *= 3.0;
        const double s3 = gn_interp_check_1d(u, r, c_frozen);
        worst = std::max(worst, std::abs(s3 - 3.0 * s1) / std::max(1.0, std::abs(s3)));
    }
    res.max_violation = worst;
    res.pass = worst <= 1e-9;
    res.detail = "frozen C = " + fmt_e(c_frozen);
    return res;
}

// (p,lambda)-concavity of solved potentials at the smallest scheduled eps,
// lambda = 2 gamma(p) / p^2 for the (1/p)-normalized cost.
inline SuiteResult verify_plambda(const VerifyConfig& cfg) {
    SuiteResult res{"plambda", true, 0.0, ""};
    Rng rng(cfg.seed ^ 0x7f008);
    SourceParams params;
    params.lo = {0.0};
    params.hi = {1.0};
    const SourceQuadrature quad =
        sample_source(SourceKind::uniform_box, 1, 200, params, cfg.seed + 9);
    for (double p : {1.2, 1.5, 1.8}) {
        const CostSpec spec = CostSpec::power(p, CostScale::one_over_p);
        std::vector<std::vector<double>> pts;
        std::vector<double> w;
        const int n = 4 + rng.uniform_int(4);
        for (int i = 0; i < n; ++i) {
            pts.push_back({(i + rng.uniform(0.2, 0.8)) / n});
            w.push_back(0.3 + rng.uniform());
        }
        const DiscreteMeasure mu = make_discrete(pts, std::move(w));
        SolverOptions opts;
        opts.schedule = EpsSchedule::defaults(mu, spec);
        const auto ladder = solve_eps_schedule(quad, mu, spec, opts);
        const DualSolution& sol = ladder.back();
        const std::vector<double> grads = soft_potential_gradients(sol, quad, mu, spec);
        const double lambda = cfg.gamma_scale * 2.0 * gamma_analytic(p) / (p * p);
        res.max_violation = std::max(
            res.max_violation,
            p_lambda_concavity_check(quad.nodes, grads, 1, p, lambda));
    }
    res.pass = res.max_violation <= 1e-6;
    return res;
}

inline std::vector<SuiteResult> run_verify_battery(const VerifyConfig& cfg) {
    std::vector<SuiteResult> out;
    if (detail::suite_selected(cfg, "transforms")) out.push_back(verify_transforms(cfg));
    if (detail::suite_selected(cfg, "derivatives")) out.push_back(verify_derivatives(cfg));
    if (detail::suite_selected(cfg, "hessians")) out.push_back(verify_hessians(cfg));
    if (detail::suite_selected(cfg, "logconcavity")) out.push_back(verify_logconcavity(cfg));
    if (detail::suite_selected(cfg, "curvature")) out.push_back(verify_curvature(cfg));
    if (detail::suite_selected(cfg, "displacement")) out.push_back(verify_displacement(cfg));
    if (detail::suite_selected(cfg, "poincare")) out.push_back(verify_poincare(cfg));
    if (detail::suite_selected(cfg, "gn-interp")) out.push_back(verify_gn(cfg));
    if (detail::suite_selected(cfg, "plambda")) out.push_back(verify_plambda(cfg));
    return out;
}

}  // namespace otstab
