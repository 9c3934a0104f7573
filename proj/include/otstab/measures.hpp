// Discrete measures, source quadratures, and exact Wasserstein distances
// between discrete measures (the ground-truth oracles for everything else).
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "otstab/common.hpp"
#include "otstab/costs.hpp"
#include "otstab/detail/min_cost_flow.hpp"
#include "otstab/detail/monotone_coupling.hpp"
#include "otstab/detail/quadrature_rules.hpp"

namespace otstab {

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

struct DiscreteMeasure {
    int dim = 0;
    std::vector<double> points;   // n * dim, row-major
    std::vector<double> weights;  // sum to 1
    std::vector<double> sigma;    // reference weights, strictly positive, sum to 1

    int size() const { return static_cast<int>(weights.size()); }
    VecView point(int i) const { return {points.data() + static_cast<std::size_t>(i) * dim,
                                         static_cast<std::size_t>(dim)}; }

    double radius() const {
        double r = 0.0;
        for (int i = 0; i < size(); ++i) r = std::max(r, norm(point(i)));
        return r;
    }
    double diameter() const {
        double d = 0.0;
        for (int i = 0; i < size(); ++i)
            for (int j = i + 1; j < size(); ++j) d = std::max(d, dist(point(i), point(j)));
        return d;
    }
};

struct SourceQuadrature {
    int dim = 0;
    std::vector<double> nodes;    // m * dim
    std::vector<double> weights;  // sum to 1
    std::vector<double> density;  // density of rho at the nodes (empty for monte-carlo)
    double r_x = 0.0;             // declared support radius
    double diam = 0.0;            // declared support diameter
    std::string kind;             // grid-1d | grid-tensor | monte-carlo
    std::uint64_t seed = 0;

    int size() const { return static_cast<int>(weights.size()); }
    VecView node(int j) const { return {nodes.data() + static_cast<std::size_t>(j) * dim,
                                        static_cast<std::size_t>(dim)}; }
};

struct TransportResult {
    double value = 0.0;
    std::vector<detail::PlanEntry> plan;
    std::vector<double> dual_src;
    std::vector<double> dual_tgt;
    double value_error_bound = 0.0;  // from weight rationalization, 0 on the exact 1D path
};

// ---------------------------------------------------------------------------
// Construction
// ---------------------------------------------------------------------------

inline DiscreteMeasure make_discrete_flat(int dim, std::vector<double> points,
                                          std::vector<double> weights,
                                          std::vector<double> sigma = {}) {
    const int n = static_cast<int>(weights.size());
    if (n == 0) throw InvalidMeasure("make_discrete: empty point list");
    if (dim < 1) throw InvalidMeasure("make_discrete: dimension must be >= 1");
    if (points.size() != static_cast<std::size_t>(n) * dim)
        throw InvalidMeasure("make_discrete: points/weights size mismatch");
    double total = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw InvalidMeasure("make_discrete: negative weight");
        total += w;
    }
    if (total <= 0.0) throw InvalidMeasure("make_discrete: weights sum to zero");
    for (double& w : weights) w /= total;

    if (sigma.empty()) {
        sigma.assign(n, 1.0 / n);
    } else {
        if (sigma.size() != static_cast<std::size_t>(n))
            throw InvalidMeasure("make_discrete: sigma size mismatch");
        double stotal = 0.0;
        for (double s : sigma) {
            if (s <= 0.0) throw InvalidMeasure("make_discrete: sigma must be strictly positive");
            stotal += s;
        }
        for (double& s : sigma) s /= stotal;
    }

    DiscreteMeasure mu;
    mu.dim = dim;
    mu.points = std::move(points);
    mu.weights = std::move(weights);
    mu.sigma = std::move(sigma);
    return mu;
}

inline DiscreteMeasure make_discrete(const std::vector<std::vector<double>>& pts,
                                     std::vector<double> weights,
                                     std::vector<double> sigma = {}) {
    if (pts.empty()) throw InvalidMeasure("make_discrete: empty point list");
    const int dim = static_cast<int>(pts.front().size());
    std::vector<double> flat;
    flat.reserve(pts.size() * dim);
    for (const auto& p : pts) {
        if (static_cast<int>(p.size()) != dim)
            throw DimensionError("make_discrete: ragged point list");
        flat.insert(flat.end(), p.begin(), p.end());
    }
    return make_discrete_flat(dim, std::move(flat), std::move(weights), std::move(sigma));
}

// Atoms of a quadrature as a discrete measure (uniform sigma).
inline DiscreteMeasure measure_from_quadrature(const SourceQuadrature& quad,
                                               std::vector<double> weights = {}) {
    if (weights.empty()) weights = quad.weights;
    return make_discrete_flat(quad.dim, quad.nodes, std::move(weights));
}

// ---------------------------------------------------------------------------
// Source sampling
// ---------------------------------------------------------------------------

enum class SourceKind { uniform_box, uniform_ball, truncated_gaussian };
enum class QuadRule { grid_1d, grid_tensor, monte_carlo };

struct SourceParams {
    std::vector<double> lo, hi;   // box kinds
    std::vector<double> center;   // ball
    double radius = 1.0;          // ball
    std::vector<double> mean;     // truncated gaussian
    double stddev = 1.0;          // truncated gaussian
    QuadRule rule = QuadRule::grid_1d;
};

namespace detail {

inline double box_radius(const std::vector<double>& lo, const std::vector<double>& hi) {
    double r2 = 0.0;
    for (std::size_t k = 0; k < lo.size(); ++k)
        r2 += std::pow(std::max(std::abs(lo[k]), std::abs(hi[k])), 2.0);
    return std::sqrt(r2);
}

inline double box_diam(const std::vector<double>& lo, const std::vector<double>& hi) {
    double d2 = 0.0;
    for (std::size_t k = 0; k < lo.size(); ++k) d2 += (hi[k] - lo[k]) * (hi[k] - lo[k]);
    return std::sqrt(d2);
}

}  // namespace detail

inline SourceQuadrature sample_source(SourceKind kind, int dim, int m,
                                      const SourceParams& params, std::uint64_t seed) {
    if (m < 1) throw ConfigError("sample_source: need m >= 1 nodes");
    if (dim < 1) throw ConfigError("sample_source: dimension must be >= 1");
    SourceQuadrature q;
    q.dim = dim;
    q.seed = seed;

    const bool boxy = kind == SourceKind::uniform_box || kind == SourceKind::truncated_gaussian;
    std::vector<double> lo = params.lo, hi = params.hi;
    if (kind == SourceKind::uniform_ball && dim == 1) {
        lo = {params.center.empty() ? -params.radius : params.center[0] - params.radius};
        hi = {params.center.empty() ? params.radius : params.center[0] + params.radius};
    }
    if ((boxy || dim == 1) &&
        (static_cast<int>(lo.size()) != dim || static_cast<int>(hi.size()) != dim))
        throw ConfigError("sample_source: box bounds must match the dimension");

    const CounterRng rng{seed};
    switch (params.rule) {
        case QuadRule::grid_1d: {
            if (dim != 1) throw ConfigError("sample_source: grid-1d requires d = 1");
            q.kind = "grid-1d";
            const auto gl = detail::gauss_legendre(m, lo[0], hi[0]);
            q.nodes = gl.nodes;
            q.weights.resize(m);
            q.density.resize(m);
            if (kind == SourceKind::truncated_gaussian) {
                const double mu0 = params.mean.empty() ? 0.5 * (lo[0] + hi[0]) : params.mean[0];
                const double sd = params.stddev;
                std::vector<double> dens(m);
                std::vector<double> raw(m);
                for (int i = 0; i < m; ++i) {
                    const double z = (gl.nodes[i] - mu0) / sd;
                    dens[i] = std::exp(-0.5 * z * z);
                    raw[i] = gl.weights[i] * dens[i];
                }
                const double z_hat = pairwise_sum(raw);
                for (int i = 0; i < m; ++i) {
                    q.weights[i] = raw[i] / z_hat;
                    q.density[i] = dens[i] / z_hat;
                }
            } else {
                const double len = hi[0] - lo[0];
                for (int i = 0; i < m; ++i) {
                    q.weights[i] = gl.weights[i] / len;
                    q.density[i] = 1.0 / len;
                }
            }
            break;
        }
        case QuadRule::grid_tensor: {
            q.kind = "grid-tensor";
            if (!boxy && dim > 1)
                throw ConfigError("sample_source: grid-tensor needs a box-supported source");
            const int per_axis = std::max(1, static_cast<int>(std::llround(std::pow(
                                                  static_cast<double>(m), 1.0 / dim))));
            std::vector<detail::GaussLegendre> axes;
            axes.reserve(dim);
            for (int k = 0; k < dim; ++k) axes.push_back(detail::gauss_legendre(per_axis, lo[k], hi[k]));
            const int total = static_cast<int>(std::pow(per_axis, dim));
            q.nodes.reserve(static_cast<std::size_t>(total) * dim);
            q.weights.reserve(total);
            q.density.reserve(total);
            std::vector<double> raw;
            raw.reserve(total);
            for (int idx = 0; idx < total; ++idx) {
                int rem = idx;
                double w = 1.0, dens = 1.0;
                for (int k = 0; k < dim; ++k) {
                    const int ik = rem % per_axis;
                    rem /= per_axis;
                    const double x = axes[k].nodes[ik];
                    q.nodes.push_back(x);
                    w *= axes[k].weights[ik];
                    if (kind == SourceKind::truncated_gaussian) {
                        const double mu0 =
                            params.mean.empty() ? 0.5 * (lo[k] + hi[k]) : params.mean[k];
                        const double z = (x - mu0) / params.stddev;
                        dens *= std::exp(-0.5 * z * z);
                    }
                }
                raw.push_back(w * dens);
            }
            const double z_hat = pairwise_sum(raw);
            q.weights.resize(total);
            q.density.resize(total);
            for (int idx = 0; idx < total; ++idx) {
                q.weights[idx] = raw[idx] / z_hat;
                // density relative to Lebesgue, consistent with the weights
                double cellw = 1.0;
                int rem = idx;
                for (int k = 0; k < dim; ++k) {
                    cellw *= axes[k].weights[rem % per_axis];
                    rem /= per_axis;
                }
                q.density[idx] = q.weights[idx] / cellw;
            }
            break;
        }
        case QuadRule::monte_carlo: {
            q.kind = "monte-carlo";
            q.nodes.resize(static_cast<std::size_t>(m) * dim);
            q.weights.assign(m, 1.0 / m);
            for (int j = 0; j < m; ++j) {
                switch (kind) {
                    case SourceKind::uniform_box:
                        for (int k = 0; k < dim; ++k)
                            q.nodes[static_cast<std::size_t>(j) * dim + k] =
                                lo[k] + (hi[k] - lo[k]) *
                                            rng.uniform(static_cast<std::uint64_t>(k) + 1, j);
                        break;
                    case SourceKind::uniform_ball: {
                        // rejection from the bounding box, per-sample attempt streams
                        for (std::uint64_t attempt = 0;; ++attempt) {
                            if (attempt > 10000)
                                throw NumericsError("sample_source: ball rejection stalled");
                            double n2 = 0.0;
                            std::vector<double> cand(dim);
                            for (int k = 0; k < dim; ++k) {
                                const double u = rng.uniform(
                                    1000 + static_cast<std::uint64_t>(k),
                                    static_cast<std::uint64_t>(j) * 16384 + attempt);
                                cand[k] = (2.0 * u - 1.0) * params.radius;
                                n2 += cand[k] * cand[k];
                            }
                            if (n2 <= params.radius * params.radius) {
                                for (int k = 0; k < dim; ++k) {
                                    const double c =
                                        params.center.empty() ? 0.0 : params.center[k];
                                    q.nodes[static_cast<std::size_t>(j) * dim + k] = c + cand[k];
                                }
                                break;
                            }
                        }
                        break;
                    }
                    case SourceKind::truncated_gaussian: {
                        for (std::uint64_t attempt = 0;; ++attempt) {
                            if (attempt > 10000)
                                throw NumericsError("sample_source: gaussian rejection stalled");
                            bool inside = true;
                            std::vector<double> cand(dim);
                            for (int k = 0; k < dim; ++k) {
                                const double u1 = rng.uniform(
                                    2000 + static_cast<std::uint64_t>(k),
                                    static_cast<std::uint64_t>(j) * 16384 + attempt);
                                const double u2 = rng.uniform(
                                    3000 + static_cast<std::uint64_t>(k),
                                    static_cast<std::uint64_t>(j) * 16384 + attempt);
                                const double g =
                                    std::sqrt(-2.0 * std::log(std::max(u1, 0x1.0p-53))) *
                                    std::cos(6.283185307179586476925286766559 * u2);
                                const double mu0 =
                                    params.mean.empty() ? 0.5 * (lo[k] + hi[k]) : params.mean[k];
                                cand[k] = mu0 + params.stddev * g;
                                if (cand[k] < lo[k] || cand[k] > hi[k]) inside = false;
                            }
                            if (inside) {
                                for (int k = 0; k < dim; ++k)
                                    q.nodes[static_cast<std::size_t>(j) * dim + k] = cand[k];
                                break;
                            }
                        }
                        break;
                    }
                }
            }
            break;
        }
    }

    if (kind == SourceKind::uniform_ball && dim > 1) {
        const double cnorm = params.center.empty() ? 0.0 : norm(params.center);
        q.r_x = cnorm + params.radius;
        q.diam = 2.0 * params.radius;
    } else {
        q.r_x = detail::box_radius(lo, hi);
        q.diam = detail::box_diam(lo, hi);
    }
    return q;
}

// ---------------------------------------------------------------------------
// Exact distances
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<double> positions_1d(const DiscreteMeasure& mu) {
    return mu.points;  // dim == 1: points are already the coordinates
}

// Exact W1 in one dimension: L1 distance between the CDFs.
inline double w1_cdf_distance(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
    struct Event {
        double x;
        double dmu;
        double dnu;
    };
    std::vector<Event> ev;
    ev.reserve(mu.size() + nu.size());
    for (int i = 0; i < mu.size(); ++i) ev.push_back({mu.points[i], mu.weights[i], 0.0});
    for (int j = 0; j < nu.size(); ++j) ev.push_back({nu.points[j], 0.0, nu.weights[j]});
    std::sort(ev.begin(), ev.end(), [](const Event& a, const Event& b) { return a.x < b.x; });
    double fmu = 0.0, fnu = 0.0, total = 0.0;
    for (std::size_t k = 0; k + 1 < ev.size(); ++k) {
        fmu += ev[k].dmu;
        fnu += ev[k].dnu;
        total += std::abs(fmu - fnu) * (ev[k + 1].x - ev[k].x);
    }
    return total;
}

constexpr std::int64_t kFlowUnits = 1000000000;  // weight rationalization scale

}  // namespace detail

inline double w1_discrete(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
    if (mu.dim != nu.dim) throw DimensionError("w1_discrete: dimension mismatch");
    if (mu.dim == 1) return detail::w1_cdf_distance(mu, nu);
    const int n = mu.size(), m = nu.size();
    std::vector<double> cost(static_cast<std::size_t>(n) * m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j)
            cost[static_cast<std::size_t>(i) * m + j] = dist(mu.point(i), nu.point(j));
    const auto supply = detail::round_to_units(mu.weights, detail::kFlowUnits);
    const auto demand = detail::round_to_units(nu.weights, detail::kFlowUnits);
    const auto sol = detail::solve_transport_flow(supply, demand, cost, n, m,
                                                  1.0 / static_cast<double>(detail::kFlowUnits));
    return sol.value;
}

// Exact optimal transport between discrete measures for the given cost.
// d = 1 with a cost convex in x - y uses the monotone quantile coupling
// (exact, no rationalization); anything else goes through min-cost flow on
// rationalized weights.
inline TransportResult wp_discrete(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                   const CostSpec& spec) {
    if (mu.dim != nu.dim) throw DimensionError("wp_discrete: dimension mismatch");
    if (spec.variant != CostVariant::linear_ell && spec.p <= 1.0)
        throw ConfigError("wp_discrete: requires p > 1");
    const int n = mu.size(), m = nu.size();
    TransportResult out;

    const bool monotone_ok = mu.dim == 1 && (spec.variant == CostVariant::power ||
                                             spec.variant == CostVariant::shifted ||
                                             spec.variant == CostVariant::linear_ell);
    if (monotone_ok) {
        auto cost = [&](int i, int j) { return cost_eval(spec, mu.point(i), nu.point(j)); };
        auto [value, plan] = detail::monotone_coupling_1d(mu.points, mu.weights, nu.points,
                                                          nu.weights, cost);
        out.value = value;
        out.plan = std::move(plan);
        detail::duals_from_plan(n, m, out.plan, cost, out.dual_src, out.dual_tgt);
        out.value_error_bound = 0.0;
        return out;
    }

    std::vector<double> cost(static_cast<std::size_t>(n) * m);
    double cmax = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) {
            const double c = cost_eval(spec, mu.point(i), nu.point(j));
            cost[static_cast<std::size_t>(i) * m + j] = c;
            cmax = std::max(cmax, std::abs(c));
        }
    const auto supply = detail::round_to_units(mu.weights, detail::kFlowUnits);
    const auto demand = detail::round_to_units(nu.weights, detail::kFlowUnits);
    auto sol = detail::solve_transport_flow(supply, demand, cost, n, m,
                                            1.0 / static_cast<double>(detail::kFlowUnits));
    out.value = sol.value;
    out.plan = std::move(sol.plan);
    out.dual_src = std::move(sol.alpha);
    out.dual_tgt = std::move(sol.beta);
    out.value_error_bound =
        static_cast<double>(n + m) * cmax / static_cast<double>(detail::kFlowUnits);
    return out;
}

// W_p distance (costs |x-y|^p, value^(1/p)).
inline double wasserstein_p(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p) {
    const auto res = wp_discrete(mu, nu, CostSpec::power(p, CostScale::unit));
    return std::pow(std::max(res.value, 0.0), 1.0 / p);
}

// ---------------------------------------------------------------------------
// Target discretization (weights (1 - 1/n) mu(cell) + 1/n^2, all positive)
// ---------------------------------------------------------------------------

inline DiscreteMeasure discretize_target(const DiscreteMeasure& mu,
                                         const std::vector<Box>& partition) {
    const int n = static_cast<int>(partition.size());
    if (n < 1) throw PartitionError("discretize_target: empty partition");
    for (const Box& cell : partition)
        if (cell.dim() != mu.dim)
            throw DimensionError("discretize_target: cell dimension mismatch");

    std::vector<double> cell_mass(n, 0.0);
    for (int a = 0; a < mu.size(); ++a) {
        int owner = -1;
        for (int c = 0; c < n; ++c)
            if (partition[c].contains(mu.point(a))) {
                owner = c;
                break;
            }
        if (owner < 0) throw PartitionError("discretize_target: partition does not cover support");
        cell_mass[owner] += mu.weights[a];
    }

    std::vector<double> points;
    points.reserve(static_cast<std::size_t>(n) * mu.dim);
    std::vector<double> weights(n);
    const double nn = static_cast<double>(n);
    for (int c = 0; c < n; ++c) {
        for (int k = 0; k < mu.dim; ++k)
            points.push_back(0.5 * (partition[c].lo[k] + partition[c].hi[k]));
        weights[c] = (1.0 - 1.0 / nn) * cell_mass[c] + 1.0 / (nn * nn);
    }
    return make_discrete_flat(mu.dim, std::move(points), std::move(weights));
}

// ---------------------------------------------------------------------------
// Relative entropy
// ---------------------------------------------------------------------------

inline double rel_entropy(const std::vector<double>& mu, const std::vector<double>& sigma) {
    if (mu.size() != sigma.size()) throw DimensionError("rel_entropy: size mismatch");
    std::vector<double> terms;
    terms.reserve(mu.size());
    for (std::size_t i = 0; i < mu.size(); ++i) {
        if (mu[i] == 0.0) continue;  // 0 log 0 = 0
        if (sigma[i] <= 0.0)
            throw SupportError("rel_entropy: mass outside the support of sigma");
        terms.push_back(mu[i] * std::log(mu[i] / sigma[i]));
    }
    return pairwise_sum(terms);
}

}  // namespace otstab
