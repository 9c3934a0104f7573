// Successive-shortest-path min-cost flow on the complete bipartite
// transportation graph, with node potentials so Dijkstra works after the
// first round even for signed costs. Desk scale: dense matrices throughout.
#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "otstab/common.hpp"

namespace otstab::detail {

struct PlanEntry {
    int i = 0;
    int j = 0;
    double mass = 0.0;
};

struct TransportSolution {
    double value = 0.0;
    std::vector<PlanEntry> plan;
    std::vector<double> alpha;  // source duals
    std::vector<double> beta;   // sink duals, alpha_i + beta_j <= c_ij
};

// Largest-remainder rounding of a probability vector to integer units
// summing exactly to total.
inline std::vector<std::int64_t> round_to_units(const std::vector<double>& w,
                                                std::int64_t total) {
    const int n = static_cast<int>(w.size());
    std::vector<std::int64_t> units(n);
    std::vector<std::pair<double, int>> frac(n);
    std::int64_t assigned = 0;
    for (int i = 0; i < n; ++i) {
        const double exact = w[i] * static_cast<double>(total);
        units[i] = static_cast<std::int64_t>(std::floor(exact));
        frac[i] = {exact - static_cast<double>(units[i]), i};
        assigned += units[i];
    }
    std::sort(frac.begin(), frac.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    std::int64_t leftover = total - assigned;
    for (int k = 0; leftover > 0; k = (k + 1) % n, --leftover) units[frac[k].second] += 1;
    return units;
}

// cost: row-major n x m matrix.
inline TransportSolution solve_transport_flow(const std::vector<std::int64_t>& supply,
                                              const std::vector<std::int64_t>& demand,
                                              const std::vector<double>& cost, int n, int m,
                                              double unit) {
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<std::int64_t> rs = supply, rd = demand;
    std::vector<std::int64_t> flow(static_cast<std::size_t>(n) * m, 0);
    std::vector<double> pot(n + m, 0.0);
    for (int j = 0; j < m; ++j) {
        double mn = kInf;
        for (int i = 0; i < n; ++i) mn = std::min(mn, cost[static_cast<std::size_t>(i) * m + j]);
        pot[n + j] = mn;
    }

    std::int64_t remaining = std::accumulate(rd.begin(), rd.end(), std::int64_t{0});
    std::vector<double> distv(n + m);
    std::vector<int> parent(n + m);
    std::vector<char> done(n + m);

    long rounds = 0;
    const long round_cap = 20L * (n + m) + 64;
    while (remaining > 0) {
        if (++rounds > round_cap)
            throw SolverError("min-cost flow: augmentation cap exceeded (numerical trouble)");

        std::fill(distv.begin(), distv.end(), kInf);
        std::fill(parent.begin(), parent.end(), -1);
        std::fill(done.begin(), done.end(), 0);
        for (int i = 0; i < n; ++i)
            if (rs[i] > 0) distv[i] = 0.0;

        int target = -1;
        while (true) {
            int u = -1;
            double best = kInf;
            for (int v = 0; v < n + m; ++v)
                if (!done[v] && distv[v] < best) {
                    best = distv[v];
                    u = v;
                }
            if (u < 0) break;
            done[u] = 1;
            if (u >= n && rd[u - n] > 0) {
                target = u;
                break;
            }
            if (u < n) {
                const std::size_t row = static_cast<std::size_t>(u) * m;
                for (int j = 0; j < m; ++j) {
                    const double rc = cost[row + j] + pot[u] - pot[n + j];
                    if (distv[u] + rc < distv[n + j] - 1e-15) {
                        distv[n + j] = distv[u] + rc;
                        parent[n + j] = u;
                    }
                }
            } else {
                const int j = u - n;
                for (int i = 0; i < n; ++i) {
                    if (flow[static_cast<std::size_t>(i) * m + j] <= 0) continue;
                    const double rc = -cost[static_cast<std::size_t>(i) * m + j] + pot[u] - pot[i];
                    if (distv[u] + rc < distv[i] - 1e-15) {
                        distv[i] = distv[u] + rc;
                        parent[i] = u;
                    }
                }
            }
        }
        if (target < 0) throw SolverError("min-cost flow: no augmenting path (infeasible)");

        // bottleneck along the path
        std::int64_t bottleneck = rd[target - n];
        int v = target;
        while (parent[v] >= 0) {
            const int u = parent[v];
            if (u >= n) {  // residual arc sink->source
                bottleneck =
                    std::min(bottleneck, flow[static_cast<std::size_t>(v) * m + (u - n)]);
            }
            v = u;
        }
        bottleneck = std::min(bottleneck, rs[v]);

        // augment
        const int origin = v;
        v = target;
        while (parent[v] >= 0) {
            const int u = parent[v];
            if (u < n)
                flow[static_cast<std::size_t>(u) * m + (v - n)] += bottleneck;
            else
                flow[static_cast<std::size_t>(v) * m + (u - n)] -= bottleneck;
            v = u;
        }
        rs[origin] -= bottleneck;
        rd[target - n] -= bottleneck;
        remaining -= bottleneck;

        const double dcap = distv[target];
        for (int w = 0; w < n + m; ++w) pot[w] += std::min(distv[w], dcap);
    }

    TransportSolution sol;
    sol.alpha.resize(n);
    sol.beta.resize(m);
    for (int i = 0; i < n; ++i) sol.alpha[i] = -pot[i];
    for (int j = 0; j < m; ++j) sol.beta[j] = pot[n + j];
    std::vector<double> terms;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) {
            const std::int64_t f = flow[static_cast<std::size_t>(i) * m + j];
            if (f > 0) {
                const double mass = static_cast<double>(f) * unit;
                sol.plan.push_back({i, j, mass});
                terms.push_back(mass * cost[static_cast<std::size_t>(i) * m + j]);
            }
        }
    sol.value = pairwise_sum(terms);
    return sol;
}

}  // namespace otstab::detail
