// Hard and entropic c-transforms, the conditional plan, the Kantorovich
// functional K with derivatives, the partition functional I_beta with its
// log-Hessian, and tilted quadratures. All exponentials run through
// max-subtracted log-sum-exp; I_beta lives in log space internally.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "otstab/common.hpp"
#include "otstab/costs.hpp"
#include "otstab/measures.hpp"

namespace otstab {

enum class Gauge { raw, zero_rho_mean_phi };

struct PotentialOnTargets {
    std::vector<double> values;
    Gauge gauge = Gauge::raw;
};

// pi(y_i | x_j): row j is the conditional plan at quadrature node j.
struct ConditionalPlan {
    int rows = 0;  // quadrature nodes
    int cols = 0;  // target atoms
    std::vector<double> probs;

    double at(int j, int i) const { return probs[static_cast<std::size_t>(j) * cols + i]; }
    std::span<const double> row(int j) const {
        return {probs.data() + static_cast<std::size_t>(j) * cols, static_cast<std::size_t>(cols)};
    }
};

struct TiltedQuadrature {
    SourceQuadrature base;
    std::vector<double> weights;  // proportional to w_j exp(beta phi_eps(x_j))
    double beta = 1.0;
    double log_normalizer = 0.0;  // log I_beta

    double normalizer() const { return std::exp(log_normalizer); }
};

struct Stats {
    double mean = 0.0;
    double variance = 0.0;
    double oscillation = 0.0;
};

inline Stats stats(std::span<const double> values, std::span<const double> weights) {
    if (values.size() != weights.size()) throw DimensionError("stats: size mismatch");
    std::vector<double> terms(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) terms[i] = weights[i] * values[i];
    Stats s;
    s.mean = pairwise_sum(terms);
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double d = values[i] - s.mean;
        terms[i] = weights[i] * d * d;
    }
    s.variance = pairwise_sum(terms);
    const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    s.oscillation = (values.empty()) ? 0.0 : *mx - *mn;
    return s;
}

namespace detail {

// psi^{c,eps}(x) and optionally the softmax row pi(.|x).
inline double softmin_row(std::span<const double> psi, const DiscreteMeasure& targets,
                          const CostSpec& spec, double eps, VecView x, double* pi_out) {
    const int n = targets.size();
    double amax = -std::numeric_limits<double>::infinity();
    std::vector<double> a(n);
    for (int i = 0; i < n; ++i) {
        a[i] = (psi[i] - cost_eval(spec, x, targets.point(i))) / eps;
        amax = std::max(amax, a[i]);
    }
    std::vector<double> terms(n);
    for (int i = 0; i < n; ++i) terms[i] = targets.sigma[i] * std::exp(a[i] - amax);
    const double z = pairwise_sum(terms);
    if (pi_out != nullptr)
        for (int i = 0; i < n; ++i) pi_out[i] = terms[i] / z;
    return -eps * (amax + std::log(z));
}

}  // namespace detail

// Hard c-transform: min_i { c(x, y_i) - psi_i }.
inline double c_transform(std::span<const double> psi, const DiscreteMeasure& targets,
                          const CostSpec& spec, VecView x) {
    if (targets.size() == 0) throw InvalidMeasure("c_transform: no targets");
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < targets.size(); ++i)
        best = std::min(best, cost_eval(spec, x, targets.point(i)) - psi[i]);
    return best;
}

// (c,eps)-transform: -eps log sum_i sigma_i exp((psi_i - c(x,y_i))/eps).
inline double c_eps_transform(std::span<const double> psi, const DiscreteMeasure& targets,
                              const CostSpec& spec, double eps, VecView x) {
    if (eps <= 0.0) throw ConfigError("c_eps_transform: eps must be > 0");
    return detail::softmin_row(psi, targets, spec, eps, x, nullptr);
}

// phi values at the quadrature nodes; eps = 0 means hard transforms.
inline std::vector<double> phi_values(std::span<const double> psi, const SourceQuadrature& quad,
                                      const DiscreteMeasure& targets, const CostSpec& spec,
                                      double eps) {
    if (eps < 0.0) throw ConfigError("phi_values: eps must be >= 0");
    std::vector<double> phi(quad.size());
    for (int j = 0; j < quad.size(); ++j)
        phi[j] = (eps == 0.0) ? c_transform(psi, targets, spec, quad.node(j))
                              : detail::softmin_row(psi, targets, spec, eps, quad.node(j), nullptr);
    return phi;
}

inline ConditionalPlan conditional_plan(std::span<const double> psi,
                                        const DiscreteMeasure& targets, const CostSpec& spec,
                                        double eps, const SourceQuadrature& quad) {
    if (eps <= 0.0) throw ConfigError("conditional_plan: eps must be > 0");
    ConditionalPlan plan;
    plan.rows = quad.size();
    plan.cols = targets.size();
    plan.probs.resize(static_cast<std::size_t>(plan.rows) * plan.cols);
    for (int j = 0; j < plan.rows; ++j)
        detail::softmin_row(psi, targets, spec, eps, quad.node(j),
                            plan.probs.data() + static_cast<std::size_t>(j) * plan.cols);
    return plan;
}

// K^{c,eps}(psi) = -sum_j w_j psi^{c,eps}(x_j); eps = 0 uses hard transforms.
inline double kantorovich_K(std::span<const double> psi, const SourceQuadrature& quad,
                            const DiscreteMeasure& targets, const CostSpec& spec, double eps) {
    const std::vector<double> phi = phi_values(psi, quad, targets, spec, eps);
    std::vector<double> terms(phi.size());
    for (std::size_t j = 0; j < phi.size(); ++j) terms[j] = quad.weights[j] * phi[j];
    return -pairwise_sum(terms);
}

// grad K, component i = sum_j w_j pi(y_i | x_j); a probability vector.
inline std::vector<double> grad_K(std::span<const double> psi, const SourceQuadrature& quad,
                                  const DiscreteMeasure& targets, const CostSpec& spec,
                                  double eps) {
    if (eps <= 0.0) throw ConfigError("grad_K: eps must be > 0");
    const int n = targets.size();
    std::vector<double> g(n, 0.0), pi(n);
    for (int j = 0; j < quad.size(); ++j) {
        detail::softmin_row(psi, targets, spec, eps, quad.node(j), pi.data());
        const double w = quad.weights[j];
        for (int i = 0; i < n; ++i) g[i] += w * pi[i];
    }
    return g;
}

namespace detail {

// Pairwise-difference variance: exactly zero on constant vectors and free of
// mean-subtraction cancellation. Row lengths are small, so O(n^2) is fine.
inline void row_mean_var(std::span<const double> pi, std::span<const double> v, double& mean,
                         double& var) {
    mean = 0.0;
    for (std::size_t i = 0; i < pi.size(); ++i) mean += pi[i] * v[i];
    var = 0.0;
    for (std::size_t a = 0; a < pi.size(); ++a)
        for (std::size_t b = a + 1; b < pi.size(); ++b) {
            const double d = v[a] - v[b];
            var += pi[a] * pi[b] * d * d;
        }
}

}  // namespace detail

// <v, Hess K v> = (1/eps) sum_j w_j Var_{pi(.|x_j)}(v).
inline double hess_K_quadform(std::span<const double> psi, std::span<const double> v,
                              const SourceQuadrature& quad, const DiscreteMeasure& targets,
                              const CostSpec& spec, double eps) {
    if (eps <= 0.0) throw ConfigError("hess_K_quadform: eps must be > 0");
    const int n = targets.size();
    std::vector<double> pi(n), terms(quad.size());
    for (int j = 0; j < quad.size(); ++j) {
        detail::softmin_row(psi, targets, spec, eps, quad.node(j), pi.data());
        double mean, var;
        detail::row_mean_var(pi, v, mean, var);
        terms[j] = quad.weights[j] * var;
    }
    return pairwise_sum(terms) / eps;
}

// Dense Hessian of K for Newton steps; n is expected to be small (<= 64).
inline std::vector<double> hess_K_dense(std::span<const double> psi, const SourceQuadrature& quad,
                                        const DiscreteMeasure& targets, const CostSpec& spec,
                                        double eps) {
    if (eps <= 0.0) throw ConfigError("hess_K_dense: eps must be > 0");
    const int n = targets.size();
    std::vector<double> h(static_cast<std::size_t>(n) * n, 0.0), pi(n);
    for (int j = 0; j < quad.size(); ++j) {
        detail::softmin_row(psi, targets, spec, eps, quad.node(j), pi.data());
        const double w = quad.weights[j] / eps;
        for (int r = 0; r < n; ++r) {
            h[static_cast<std::size_t>(r) * n + r] += w * pi[r];
            for (int c = 0; c < n; ++c)
                h[static_cast<std::size_t>(r) * n + c] -= w * pi[r] * pi[c];
        }
    }
    return h;
}

// log I_beta(psi) = log sum_j w_j exp(beta psi^{c,eps}(x_j)).
inline double log_partition_I(std::span<const double> psi, const SourceQuadrature& quad,
                              const DiscreteMeasure& targets, const CostSpec& spec, double eps,
                              double beta) {
    if (eps <= 0.0) throw ConfigError("log_partition_I: eps must be > 0");
    if (beta <= 0.0) throw ConfigError("log_partition_I: beta must be > 0");
    const std::vector<double> phi = phi_values(psi, quad, targets, spec, eps);
    double bmax = -std::numeric_limits<double>::infinity();
    for (double f : phi) bmax = std::max(bmax, beta * f);
    std::vector<double> terms(phi.size());
    for (std::size_t j = 0; j < phi.size(); ++j)
        terms[j] = quad.weights[j] * std::exp(beta * phi[j] - bmax);
    return bmax + std::log(pairwise_sum(terms));
}

inline double partition_I(std::span<const double> psi, const SourceQuadrature& quad,
                          const DiscreteMeasure& targets, const CostSpec& spec, double eps,
                          double beta) {
    return std::exp(log_partition_I(psi, quad, targets, spec, eps, beta));
}

inline TiltedQuadrature tilted_quadrature(std::span<const double> psi,
                                          const SourceQuadrature& quad,
                                          const DiscreteMeasure& targets, const CostSpec& spec,
                                          double eps, double beta) {
    TiltedQuadrature t;
    t.base = quad;
    t.beta = beta;
    t.log_normalizer = log_partition_I(psi, quad, targets, spec, eps, beta);
    const std::vector<double> phi = phi_values(psi, quad, targets, spec, eps);
    t.weights.resize(phi.size());
    for (std::size_t j = 0; j < phi.size(); ++j)
        t.weights[j] = quad.weights[j] * std::exp(beta * phi[j] - t.log_normalizer);
    return t;
}

// <v, Hess log I_beta v> =
//   -(beta/eps) sum_j wt_j Var_{pi(.|x_j)}(v) + beta^2 Var_wt(m_{pi(.|x_j)}(v)),
// with wt the tilted weights.
inline double log_I_hess_quadform(std::span<const double> psi, std::span<const double> v,
                                  const SourceQuadrature& quad, const DiscreteMeasure& targets,
                                  const CostSpec& spec, double eps, double beta) {
    if (eps <= 0.0) throw ConfigError("log_I_hess_quadform: eps must be > 0");
    if (beta <= 0.0) throw ConfigError("log_I_hess_quadform: beta must be > 0");
    const int m = quad.size();
    const int n = targets.size();
    std::vector<double> phi(m), means(m), vars(m), pi(n);
    for (int j = 0; j < m; ++j) {
        phi[j] = detail::softmin_row(psi, targets, spec, eps, quad.node(j), pi.data());
        detail::row_mean_var(pi, v, means[j], vars[j]);
    }
    double bmax = -std::numeric_limits<double>::infinity();
    for (double f : phi) bmax = std::max(bmax, beta * f);
    std::vector<double> wt(m);
    for (int j = 0; j < m; ++j) wt[j] = quad.weights[j] * std::exp(beta * phi[j] - bmax);
    const double z = pairwise_sum(wt);
    for (double& w : wt) w /= z;

    std::vector<double> terms(m);
    for (int j = 0; j < m; ++j) terms[j] = wt[j] * vars[j];
    const double avg_var = pairwise_sum(terms);
    const Stats mstats = stats(means, wt);
    return -(beta / eps) * avg_var + beta * beta * mstats.variance;
}

// grad of log I_beta: component i = -beta sum_j wt_j pi(y_i | x_j).
inline std::vector<double> grad_log_I(std::span<const double> psi, const SourceQuadrature& quad,
                                      const DiscreteMeasure& targets, const CostSpec& spec,
                                      double eps, double beta) {
    if (eps <= 0.0) throw ConfigError("grad_log_I: eps must be > 0");
    const int m = quad.size();
    const int n = targets.size();
    std::vector<double> phi(m);
    std::vector<double> pis(static_cast<std::size_t>(m) * n);
    for (int j = 0; j < m; ++j)
        phi[j] = detail::softmin_row(psi, targets, spec, eps, quad.node(j),
                                     pis.data() + static_cast<std::size_t>(j) * n);
    double bmax = -std::numeric_limits<double>::infinity();
    for (double f : phi) bmax = std::max(bmax, beta * f);
    std::vector<double> wt(m);
    for (int j = 0; j < m; ++j) wt[j] = quad.weights[j] * std::exp(beta * phi[j] - bmax);
    const double z = pairwise_sum(wt);
    std::vector<double> g(n, 0.0);
    for (int j = 0; j < m; ++j) {
        const double w = wt[j] / z;
        for (int i = 0; i < n; ++i) g[i] -= beta * w * pis[static_cast<std::size_t>(j) * n + i];
    }
    return g;
}

}  // namespace otstab
