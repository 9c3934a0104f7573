// Gauss-Legendre nodes and weights via Newton iteration on the Legendre
// recurrence.
#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "otstab/common.hpp"

namespace otstab::detail {

struct GaussLegendre {
    std::vector<double> nodes;    // on [a, b]
    std::vector<double> weights;  // sum to b - a
};

inline GaussLegendre gauss_legendre(int m, double a, double b) {
    if (m < 1) throw ConfigError("gauss_legendre: need at least one node");
    GaussLegendre gl;
    gl.nodes.resize(m);
    gl.weights.resize(m);
    const int half = (m + 1) / 2;
    for (int i = 0; i < half; ++i) {
        // Chebyshev-based initial guess, then Newton on P_m
        double x = std::cos(3.141592653589793238462643383279 * (i + 0.75) / (m + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < m; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
            }
            pp = m * (x * p0 - p1) / (x * x - 1.0);
            const double dx = p0 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        const double xm = 0.5 * (b + a);
        const double xl = 0.5 * (b - a);
        gl.nodes[i] = xm - xl * x;
        gl.nodes[m - 1 - i] = xm + xl * x;
        const double w = 2.0 * xl / ((1.0 - x * x) * pp * pp);
        gl.weights[i] = w;
        gl.weights[m - 1 - i] = w;
    }
    return gl;
}

}  // namespace otstab::detail
