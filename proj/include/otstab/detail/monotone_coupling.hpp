// One-dimensional transport: the monotone (quantile) coupling, exact for
// costs that are convex in x - y, plus dual recovery from a given optimal
// plan via label propagation on the complementary-slackness graph.
#pragma once

#include <algorithm>
#include <deque>
#include <limits>
#include <numeric>
#include <vector>

#include "otstab/common.hpp"
#include "otstab/detail/min_cost_flow.hpp"

namespace otstab::detail {

inline std::vector<int> sorted_order(const std::vector<double>& pos) {
    std::vector<int> ord(pos.size());
    std::iota(ord.begin(), ord.end(), 0);
    std::stable_sort(ord.begin(), ord.end(), [&](int a, int b) { return pos[a] < pos[b]; });
    return ord;
}

// Merge-sweep of the two CDFs. Entries come out sorted by quantile.
template <class CostFn>
inline std::pair<double, std::vector<PlanEntry>> monotone_coupling_1d(
    const std::vector<double>& xpos, const std::vector<double>& xw,
    const std::vector<double>& ypos, const std::vector<double>& yw, CostFn&& cost) {
    const std::vector<int> ox = sorted_order(xpos);
    const std::vector<int> oy = sorted_order(ypos);
    const int n = static_cast<int>(xpos.size());
    const int m = static_cast<int>(ypos.size());

    // cumulative masses avoid subtraction drift over long sweeps
    std::vector<double> cx(n), cy(m);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) cx[i] = (acc += xw[ox[i]]);
    acc = 0.0;
    for (int j = 0; j < m; ++j) cy[j] = (acc += yw[oy[j]]);
    cx[n - 1] = 1.0;
    cy[m - 1] = 1.0;

    std::vector<PlanEntry> plan;
    std::vector<double> terms;
    double prev = 0.0;
    int i = 0, j = 0;
    while (i < n && j < m) {
        const double cut = std::min(cx[i], cy[j]);
        const double mass = cut - prev;
        if (mass > 0.0) {
            plan.push_back({ox[i], oy[j], mass});
            terms.push_back(mass * cost(ox[i], oy[j]));
        }
        prev = cut;
        if (cx[i] <= cut) ++i;
        if (cy[j] <= cut) ++j;
    }
    return {pairwise_sum(terms), std::move(plan)};
}

// Fast path for monotone plans: the support of a quantile coupling is a
// chain in sweep order, so tight duals propagate linearly when the chain is
// connected. Returns false on a disconnect or a feasibility failure, in
// which case the caller falls back to the general recovery.
template <class CostFn>
inline bool duals_from_chain(int n, int m, const std::vector<PlanEntry>& plan, CostFn&& cost,
                             std::vector<double>& alpha, std::vector<double>& beta) {
    if (plan.empty()) return false;
    constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();
    alpha.assign(n, kUnset);
    beta.assign(m, kUnset);
    alpha[plan.front().i] = 0.0;
    double scale = 1.0;
    for (const auto& e : plan) {
        const double c = cost(e.i, e.j);
        scale = std::max(scale, std::abs(c));
        const bool have_a = !std::isnan(alpha[e.i]);
        const bool have_b = !std::isnan(beta[e.j]);
        if (have_a && !have_b)
            beta[e.j] = c - alpha[e.i];
        else if (!have_a && have_b)
            alpha[e.i] = c - beta[e.j];
        else if (!have_a && !have_b)
            return false;  // disconnected support chain
    }
    for (int i = 0; i < n; ++i) {
        if (!std::isnan(alpha[i])) continue;
        // zero-mass atom: extend by the c-transform
        double mn = std::numeric_limits<double>::infinity();
        for (int j = 0; j < m; ++j)
            if (!std::isnan(beta[j])) mn = std::min(mn, cost(i, j) - beta[j]);
        alpha[i] = mn;
    }
    for (int j = 0; j < m; ++j) {
        if (!std::isnan(beta[j])) continue;
        double mn = std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i) mn = std::min(mn, cost(i, j) - alpha[i]);
        beta[j] = mn;
    }
    // the propagated labels must be feasible everywhere and tight on the
    // whole support, not just on the walked spanning chain
    const double tol = 1e-9 * scale;
    for (const auto& e : plan)
        if (std::abs(alpha[e.i] + beta[e.j] - cost(e.i, e.j)) > tol) return false;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j)
            if (alpha[i] + beta[j] > cost(i, j) + tol) return false;
    return true;
}

// Recover optimal duals from an optimal plan: shortest distances on the graph
// with arcs i->j of weight c_ij for every pair (feasibility) and j->i of
// weight -c_ij for support pairs (complementary slackness). No negative
// cycles exist exactly when the plan is optimal.
template <class CostFn>
inline void duals_from_plan(int n, int m, const std::vector<PlanEntry>& plan, CostFn&& cost,
                            std::vector<double>& alpha, std::vector<double>& beta) {
    if (duals_from_chain(n, m, plan, cost, alpha, beta)) return;
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> val(n + m, kInf);
    std::vector<std::vector<int>> support_by_sink(m);
    for (const auto& e : plan)
        if (e.mass > 0.0) support_by_sink[e.j].push_back(e.i);

    val[0] = 0.0;
    std::deque<int> queue{0};
    std::vector<char> inq(n + m, 0);
    inq[0] = 1;
    long relaxations = 0;
    const long cap = 64L * (n + m) * (n + m) + 4096;
    while (!queue.empty()) {
        const int u = queue.front();
        queue.pop_front();
        inq[u] = 0;
        if (u < n) {
            for (int j = 0; j < m; ++j) {
                const double cand = val[u] + cost(u, j);
                if (cand < val[n + j] - 1e-14) {
                    val[n + j] = cand;
                    if (!inq[n + j]) {
                        queue.push_back(n + j);
                        inq[n + j] = 1;
                    }
                }
            }
        } else {
            const int j = u - n;
            for (int i : support_by_sink[j]) {
                const double cand = val[u] - cost(i, j);
                if (cand < val[i] - 1e-14) {
                    val[i] = cand;
                    if (!inq[i]) {
                        queue.push_back(i);
                        inq[i] = 1;
                    }
                }
            }
        }
        if (++relaxations > cap)
            throw NumericsError("duals_from_plan: relaxation cap hit (plan not optimal?)");
    }
    alpha.resize(n);
    beta.resize(m);
    for (int j = 0; j < m; ++j) beta[j] = val[n + j];
    for (int i = 0; i < n; ++i) {
        if (val[i] < kInf) {
            alpha[i] = -val[i];
        } else {
            // zero-mass atom never enters the plan: extend by the c-transform
            double mn = kInf;
            for (int j = 0; j < m; ++j) mn = std::min(mn, cost(i, j) - beta[j]);
            alpha[i] = mn;
        }
    }
}

}  // namespace otstab::detail
