// Semi-discrete entropic dual solver: maximize <mu|psi> - K^{c,eps}(psi)
// by Newton (dense Hessian, constants projected out) with gradient-ascent
// fallback, warm-started eps schedules, zero-rho-mean gauge, and transport
// map extraction. The unregularized LP oracle lives here too.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "otstab/common.hpp"
#include "otstab/costs.hpp"
#include "otstab/entropic.hpp"
#include "otstab/measures.hpp"

namespace otstab {

enum class SolveMethod { newton, gradient_ascent };
enum class LineSearch { backtracking, none };

struct EpsSchedule {
    double eps0 = 0.5;
    double factor = 0.5;
    double eps_min = 0.5 / 256.0;

    std::vector<double> levels() const {
        if (eps0 <= 0.0 || eps_min <= 0.0 || factor <= 0.0 || factor >= 1.0)
            throw ConfigError("EpsSchedule: need eps0, eps_min > 0 and factor in (0,1)");
        std::vector<double> out;
        for (double e = eps0; e > eps_min * (1.0 + 1e-12); e *= factor) out.push_back(e);
        out.push_back(eps_min);
        return out;
    }

    // eps0 = 0.5 * diam(Y)^p * scale, halving down to eps0 / 2^8.
    static EpsSchedule defaults(const DiscreteMeasure& targets, const CostSpec& spec) {
        double diam = targets.diameter();
        if (diam <= 0.0) diam = 1.0;  // single atom: any eps gives the same gauged solution
        EpsSchedule s;
        s.eps0 = 0.5 * std::pow(diam, spec.p) * spec.scale_factor();
        s.factor = 0.5;
        s.eps_min = s.eps0 / 256.0;
        return s;
    }
};

struct SolverOptions {
    SolveMethod method = SolveMethod::newton;
    double tol_marginal = 1e-10;  // L1 norm of grad K - mu
    int max_iters = 400;
    LineSearch line_search = LineSearch::backtracking;
    EpsSchedule schedule;
    int newton_max_n = 64;  // beyond this the dense Hessian path falls back
};

struct DualSolution {
    PotentialOnTargets psi;
    std::vector<double> phi;  // psi^{c,eps} at the quadrature nodes
    double eps = 0.0;
    double marginal_residual = 0.0;
    double objective = 0.0;  // <mu|psi> - K(psi) - eps * Ent(mu||sigma)
    int iterations = 0;
};

struct NonConvergence : Error {
    double last_residual;
    std::vector<DualSolution> partial;  // completed schedule levels, if any

    explicit NonConvergence(const std::string& msg, double residual,
                            std::vector<DualSolution> done = {})
        : Error(msg), last_residual(residual), partial(std::move(done)) {}
};

enum class MapMode { hard_argmin, entropic_soft };

struct TransportMapEval {
    MapMode mode = MapMode::hard_argmin;
    int dim = 0;
    std::vector<double> values;  // T(x_j), m * dim

    VecView at(int j) const { return {values.data() + static_cast<std::size_t>(j) * dim,
                                      static_cast<std::size_t>(dim)}; }
};

namespace detail {

inline double l1_residual(const std::vector<double>& grad, const std::vector<double>& mu) {
    double r = 0.0;
    for (std::size_t i = 0; i < grad.size(); ++i) r += std::abs(grad[i] - mu[i]);
    return r;
}

inline double dual_value(std::span<const double> psi, const std::vector<double>& phi,
                         const SourceQuadrature& quad, const DiscreteMeasure& mu) {
    std::vector<double> terms(phi.size());
    for (std::size_t j = 0; j < phi.size(); ++j) terms[j] = quad.weights[j] * phi[j];
    double v = pairwise_sum(terms);
    std::vector<double> mterms(mu.size());
    for (int i = 0; i < mu.size(); ++i) mterms[i] = mu.weights[i] * psi[i];
    return v + pairwise_sum(mterms);
}

}  // namespace detail

// Shift psi so the induced phi has zero rho-mean; idempotent.
inline void apply_zero_mean_gauge(DualSolution& sol, const SourceQuadrature& quad) {
    std::vector<double> terms(sol.phi.size());
    for (std::size_t j = 0; j < sol.phi.size(); ++j) terms[j] = quad.weights[j] * sol.phi[j];
    const double lambda = pairwise_sum(terms);
    for (double& p : sol.psi.values) p += lambda;
    for (double& f : sol.phi) f -= lambda;
    sol.psi.gauge = Gauge::zero_rho_mean_phi;
}

inline DualSolution solve_dual(const SourceQuadrature& quad, const DiscreteMeasure& mu,
                               const CostSpec& spec, double eps, const SolverOptions& opts,
                               const std::vector<double>* warm_start = nullptr) {
    if (eps <= 0.0) throw ConfigError("solve_dual: eps must be > 0");
    if (opts.tol_marginal <= 0.0) throw ConfigError("solve_dual: tol_marginal must be > 0");
    if (opts.max_iters < 1) throw ConfigError("solve_dual: max_iters must be >= 1");
    const int n = mu.size();
    for (double w : mu.weights)
        if (w <= 0.0) throw SupportError("solve_dual: target weights must be strictly positive");

    std::vector<double> psi =
        (warm_start != nullptr && static_cast<int>(warm_start->size()) == n)
            ? *warm_start
            : std::vector<double>(n, 0.0);

    const bool use_newton = opts.method == SolveMethod::newton && n <= opts.newton_max_n;
    double objective = -std::numeric_limits<double>::infinity();
    double residual = std::numeric_limits<double>::infinity();
    int iters = 0;

    std::vector<double> grad = grad_K(psi, quad, mu, spec, eps);
    residual = detail::l1_residual(grad, mu.weights);
    {
        const std::vector<double> phi0 = phi_values(psi, quad, mu, spec, eps);
        objective = detail::dual_value(psi, phi0, quad, mu);
    }

    while (residual > opts.tol_marginal && iters < opts.max_iters) {
        ++iters;
        std::vector<double> dir(n, 0.0);
        if (use_newton) {
            const std::vector<double> h = hess_K_dense(psi, quad, mu, spec, eps);
            Eigen::MatrixXd H(n, n);
            for (int r = 0; r < n; ++r)
                for (int c = 0; c < n; ++c) H(r, c) = h[static_cast<std::size_t>(r) * n + c];
            // ridge regularization; the kernel direction (constants) is
            // projected out of the step below
            H.diagonal().array() += 1e-10 / eps;
            Eigen::VectorXd g(n);
            for (int i = 0; i < n; ++i) g(i) = mu.weights[i] - grad[i];
            Eigen::VectorXd d = H.ldlt().solve(g);
            const double mean = d.mean();
            for (int i = 0; i < n; ++i) dir[i] = d(i) - mean;
        } else {
            // multiplicative ascent step psi_i += eps log(mu_i / grad_i);
            // same sign as the gradient componentwise, so always an ascent
            // direction
            for (int i = 0; i < n; ++i) dir[i] = eps * std::log(mu.weights[i] / grad[i]);
        }

        double slope = 0.0;
        for (int i = 0; i < n; ++i) slope += dir[i] * (mu.weights[i] - grad[i]);
        if (!(slope > 0.0)) {
            for (int i = 0; i < n; ++i) dir[i] = eps * std::log(mu.weights[i] / grad[i]);
            slope = 0.0;
            for (int i = 0; i < n; ++i) slope += dir[i] * (mu.weights[i] - grad[i]);
        }

        // Once the predicted gain falls below the rounding noise of the
        // objective, Armijo can reject forever on noise; take the plain
        // Newton step there (quadratic-convergence regime).
        const double noise = 1e-13 * (1.0 + std::abs(objective));
        double step = 1.0;
        std::vector<double> cand(n);
        double cand_obj = objective;
        for (int back = 0; back < 60; ++back) {
            for (int i = 0; i < n; ++i) cand[i] = psi[i] + step * dir[i];
            const std::vector<double> phi = phi_values(cand, quad, mu, spec, eps);
            cand_obj = detail::dual_value(cand, phi, quad, mu);
            if (opts.line_search == LineSearch::none || slope <= noise ||
                cand_obj >= objective + 1e-4 * step * slope)
                break;
            step *= 0.5;
        }
        // the accepted step must not lose objective beyond rounding noise
        if (cand_obj < objective - 1e-10 * (1.0 + std::abs(objective)))
            throw SolverError("solve_dual: objective decreased along the accepted step");
        psi = cand;
        objective = cand_obj;
        grad = grad_K(psi, quad, mu, spec, eps);
        residual = detail::l1_residual(grad, mu.weights);
    }

    if (residual > opts.tol_marginal)
        throw NonConvergence("solve_dual: marginal residual " + std::to_string(residual) +
                                 " above tolerance after " + std::to_string(iters) + " iterations",
                             residual);

    DualSolution sol;
    sol.psi.values = std::move(psi);
    sol.psi.gauge = Gauge::raw;
    sol.phi = phi_values(sol.psi.values, quad, mu, spec, eps);
    sol.eps = eps;
    sol.marginal_residual = residual;
    sol.iterations = iters;
    apply_zero_mean_gauge(sol, quad);
    sol.objective = detail::dual_value(sol.psi.values, sol.phi, quad, mu) -
                    eps * rel_entropy(mu.weights, mu.sigma);
    return sol;
}

// Warm-started descent of the eps ladder; returns one solution per level.
inline std::vector<DualSolution> solve_eps_schedule(const SourceQuadrature& quad,
                                                    const DiscreteMeasure& mu,
                                                    const CostSpec& spec,
                                                    const SolverOptions& opts) {
    const std::vector<double> levels = opts.schedule.levels();
    std::vector<DualSolution> out;
    out.reserve(levels.size());
    const std::vector<double>* warm = nullptr;
    for (double eps : levels) {
        try {
            out.push_back(solve_dual(quad, mu, spec, eps, opts, warm));
        } catch (const NonConvergence& e) {
            throw NonConvergence(e.what(), e.last_residual, std::move(out));
        }
        warm = &out.back().psi.values;
    }
    return out;
}

// T(x_j): hard argmin over targets, or the entropic soft map
// x - ((sum_i pi_i grad_x c(x, y_i)) / (scale * p))^(q/p).
inline TransportMapEval extract_map(const DualSolution& sol, const SourceQuadrature& quad,
                                    const DiscreteMeasure& targets, const CostSpec& spec,
                                    MapMode mode) {
    TransportMapEval map;
    map.mode = mode;
    map.dim = quad.dim;
    map.values.resize(static_cast<std::size_t>(quad.size()) * quad.dim);
    const std::vector<double>& psi = sol.psi.values;
    const int n = targets.size();

    if (mode == MapMode::hard_argmin) {
        for (int j = 0; j < quad.size(); ++j) {
            int best = 0;
            double bestv = std::numeric_limits<double>::infinity();
            for (int i = 0; i < n; ++i) {
                const double v = cost_eval(spec, quad.node(j), targets.point(i)) - psi[i];
                if (v < bestv - 1e-15) {  // ties resolve to the lowest index
                    bestv = v;
                    best = i;
                }
            }
            const VecView y = targets.point(best);
            for (int k = 0; k < quad.dim; ++k)
                map.values[static_cast<std::size_t>(j) * quad.dim + k] = y[k];
        }
        return map;
    }

    if (sol.eps <= 0.0) throw ConfigError("extract_map: soft mode needs eps > 0");
    const double q_over_p = spec.conjugate() / spec.p;
    const double norml = spec.scale_factor() * spec.p;
    std::vector<double> pi(n), gphi(quad.dim);
    for (int j = 0; j < quad.size(); ++j) {
        detail::softmin_row(psi, targets, spec, sol.eps, quad.node(j), pi.data());
        std::fill(gphi.begin(), gphi.end(), 0.0);
        for (int i = 0; i < n; ++i) {
            const std::vector<double> g = cost_grad_x(spec, quad.node(j), targets.point(i));
            for (int k = 0; k < quad.dim; ++k) gphi[k] += pi[i] * g[k];
        }
        for (double& g : gphi) g /= norml;
        const std::vector<double> disp = vector_power(gphi, q_over_p);
        const VecView x = quad.node(j);
        for (int k = 0; k < quad.dim; ++k)
            map.values[static_cast<std::size_t>(j) * quad.dim + k] = x[k] - disp[k];
    }
    return map;
}

// Exact unregularized duals from the LP on the discretized source; the
// eps -> 0 ground truth. phi = dual_src is the c-transform of psi = dual_tgt.
inline DualSolution exact_dual_oracle(const SourceQuadrature& quad, const DiscreteMeasure& mu,
                                      const CostSpec& spec, int max_atoms = 500) {
    if (quad.size() > max_atoms)
        throw ConfigError("exact_dual_oracle: quadrature exceeds the atom budget");
    const DiscreteMeasure rho_atoms = measure_from_quadrature(quad);
    const TransportResult lp = wp_discrete(rho_atoms, mu, spec);

    DualSolution sol;
    sol.psi.values = lp.dual_tgt;
    sol.psi.gauge = Gauge::raw;
    sol.phi = lp.dual_src;
    sol.eps = 0.0;
    sol.iterations = 0;
    sol.marginal_residual = 0.0;
    apply_zero_mean_gauge(sol, quad);
    sol.objective = detail::dual_value(sol.psi.values, sol.phi, quad, mu);
    return sol;
}

// Evaluate a potential at an arbitrary target point by the hard
// back-transform from phi at the quadrature nodes:
//   psi_hat(y) = min_j { c(x_j, y) - phi(x_j) }.
// Extends psi beyond the atoms of its own target measure (used when pairing
// potentials across measures with different supports).
inline double psi_back_transform(const DualSolution& sol, const SourceQuadrature& quad,
                                 const CostSpec& spec, VecView y) {
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < quad.size(); ++j)
        best = std::min(best, cost_eval(spec, quad.node(j), y) - sol.phi[j]);
    return best;
}

}  // namespace otstab
