// The p-power cost family (power / linear / shifted / boundary variants),
// gradients, and the curvature constants used by the stability checks.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "otstab/common.hpp"

namespace otstab {

enum class CostScale { one_over_p, unit };
enum class CostVariant { power, linear_ell, shifted, boundary };

// Axis-aligned box, used by the boundary cost so distances to the complement
// stay closed-form.
struct Box {
    std::vector<double> lo;
    std::vector<double> hi;

    int dim() const { return static_cast<int>(lo.size()); }

    bool contains(VecView x) const {
        for (std::size_t k = 0; k < lo.size(); ++k)
            if (x[k] < lo[k] || x[k] > hi[k]) return false;
        return true;
    }

    // Distance from x to the complement of the box (0 outside).
    double dist_to_complement(VecView x) const {
        if (!contains(x)) return 0.0;
        double d = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < lo.size(); ++k)
            d = std::min(d, std::min(x[k] - lo[k], hi[k] - x[k]));
        return std::max(d, 0.0);
    }
};

struct CostSpec {
    double p = 2.0;
    CostScale scale = CostScale::one_over_p;
    CostVariant variant = CostVariant::power;
    double gamma = 0.0;  // shift coefficient, shifted variant only
    Box omega;           // boundary variant only

    static CostSpec power(double p, CostScale scale = CostScale::one_over_p) {
        if (p <= 1.0) throw ConfigError("CostSpec: exponent p must be > 1");
        CostSpec s;
        s.p = p;
        s.scale = scale;
        s.variant = CostVariant::power;
        return s;
    }
    static CostSpec linear() {
        CostSpec s;
        s.variant = CostVariant::linear_ell;
        return s;
    }
    static CostSpec shifted(double p, double gamma, CostScale scale = CostScale::one_over_p) {
        CostSpec s = power(p, scale);
        s.variant = CostVariant::shifted;
        s.gamma = gamma;
        return s;
    }
    static CostSpec boundary(double p, Box omega, CostScale scale = CostScale::one_over_p) {
        CostSpec s = power(p, scale);
        s.variant = CostVariant::boundary;
        s.omega = std::move(omega);
        return s;
    }

    // conjugate exponent q = p/(p-1)
    double conjugate() const { return p / (p - 1.0); }

    double scale_factor() const { return scale == CostScale::one_over_p ? 1.0 / p : 1.0; }
};

// v^(alpha) = |v|^(alpha-1) v; preserves direction, |result| = |v|^alpha.
inline std::vector<double> vector_power(VecView v, double alpha) {
    std::vector<double> out(v.begin(), v.end());
    const double r = norm(v);
    if (r == 0.0) return out;  // all zeros already
    const double f = std::pow(r, alpha - 1.0);
    for (double& x : out) x *= f;
    return out;
}

inline double cost_eval(const CostSpec& spec, VecView x, VecView y) {
    check_same_dim(x, y, "cost_eval");
    switch (spec.variant) {
        case CostVariant::linear_ell:
            return -dot(x, y);
        case CostVariant::power:
            return spec.scale_factor() * std::pow(dist(x, y), spec.p);
        case CostVariant::shifted:
            return spec.scale_factor() * std::pow(dist(x, y), spec.p) - 0.5 * spec.gamma * norm2(x);
        case CostVariant::boundary: {
            const double direct = std::pow(dist(x, y), spec.p);
            const double dx = spec.omega.dist_to_complement(x);
            const double dy = spec.omega.dist_to_complement(y);
            const double around = std::pow(dx, spec.p) + std::pow(dy, spec.p);
            return spec.scale_factor() * std::min(direct, around);
        }
    }
    throw ConfigError("cost_eval: unknown variant");
}

namespace detail {

inline std::vector<double> power_grad(VecView x, VecView y, double p, double s) {
    // s * p * (x-y)^(p-1); 0 at x = y (limit for p > 1)
    const std::size_t d = x.size();
    std::vector<double> g(d, 0.0);
    const double r = dist(x, y);
    if (r == 0.0) return g;
    const double f = s * p * std::pow(r, p - 2.0);
    for (std::size_t k = 0; k < d; ++k) g[k] = f * (x[k] - y[k]);
    return g;
}

}  // namespace detail

inline std::vector<double> cost_grad_x(const CostSpec& spec, VecView x, VecView y) {
    check_same_dim(x, y, "cost_grad_x");
    const std::size_t d = x.size();
    switch (spec.variant) {
        case CostVariant::linear_ell: {
            std::vector<double> g(d);
            for (std::size_t k = 0; k < d; ++k) g[k] = -y[k];
            return g;
        }
        case CostVariant::power:
            return detail::power_grad(x, y, spec.p, spec.scale_factor());
        case CostVariant::shifted: {
            std::vector<double> g = detail::power_grad(x, y, spec.p, spec.scale_factor());
            for (std::size_t k = 0; k < d; ++k) g[k] -= spec.gamma * x[k];
            return g;
        }
        case CostVariant::boundary: {
            const double direct = std::pow(dist(x, y), spec.p);
            const double dx = spec.omega.dist_to_complement(x);
            const double dy = spec.omega.dist_to_complement(y);
            const double around = std::pow(dx, spec.p) + std::pow(dy, spec.p);
            if (direct <= around) return detail::power_grad(x, y, spec.p, spec.scale_factor());
            // gradient of s * d(x, boundary)^p: active face decides the direction
            std::vector<double> g(d, 0.0);
            if (dx <= 0.0) return g;
            const double f = spec.scale_factor() * spec.p * std::pow(dx, spec.p - 1.0);
            for (std::size_t k = 0; k < d; ++k) {
                if (x[k] - spec.omega.lo[k] == dx) {
                    g[k] = f;
                    return g;
                }
                if (spec.omega.hi[k] - x[k] == dx) {
                    g[k] = -f;
                    return g;
                }
            }
            return g;
        }
    }
    throw ConfigError("cost_grad_x: unknown variant");
}

// Lipschitz constant in x of any c-transform for this cost over
// B(0,R_X) x B(0,R_Y); the oscillation bound follows as 2 R_X * Lip.
inline double lipschitz_bound(const CostSpec& spec, double r_x, double r_y) {
    switch (spec.variant) {
        case CostVariant::linear_ell:
            return r_y;
        case CostVariant::power:
        case CostVariant::boundary:
            return spec.scale_factor() * spec.p * std::pow(r_x + r_y, spec.p - 1.0);
        case CostVariant::shifted:
            return spec.scale_factor() * spec.p * std::pow(r_x + r_y, spec.p - 1.0) +
                   spec.gamma * r_x;
    }
    throw ConfigError("lipschitz_bound: unknown variant");
}

inline double osc_bound(const CostSpec& spec, double r_x, double r_y) {
    return 2.0 * r_x * lipschitz_bound(spec, r_x, r_y);
}

// Shift coefficient gamma = (p-1)(R_X+R_Y)^(p-2) making the (1/p)-normalized
// p-cost concave in x on the ball; requires p >= 2.
inline double shift_gamma(double p, double r_x, double r_y) {
    if (p < 2.0)
        throw NotApplicable("shift_gamma: quadratic shift does not convexify for p < 2");
    return (p - 1.0) * std::pow(r_x + r_y, p - 2.0);
}

// Scale-aware version: sup of the operator norm of the x-Hessian of the
// chosen cost normalization.
inline double shift_gamma(const CostSpec& spec, double r_x, double r_y) {
    return spec.scale_factor() * spec.p * shift_gamma(spec.p, r_x, r_y);
}

// Curvature constant gamma(p) with
//   p < (a-z)^(p-1) - (b-z)^(p-1), a-b >  <=  gamma(p) |a-b|^p,   1 < p < 2.
// Assembled from the Hoelder-continuity bound |a-b|^(2p-2) on the modulus
// term plus 2 * 2^(3-2p) |a-b|^(2p-2) on the angular term, then
// Cauchy-Schwarz: gamma(p) = p sqrt(1 + 2^(4-2p)).
inline double gamma_analytic(double p) {
    if (p <= 1.0 || p >= 2.0) throw NotApplicable("gamma_analytic: requires 1 < p < 2");
    return p * std::sqrt(1.0 + std::pow(2.0, 4.0 - 2.0 * p));
}

struct CurvatureCertificate {
    double p = 0.0;
    double gamma_analytic = 0.0;
    double gamma_empirical = 0.0;
    long trials = 0;
    double max_violation = 0.0;  // gamma_empirical - gamma_analytic
};

// One sample of the curvature ratio p<(a-z)^(p-1)-(b-z)^(p-1), a-b>/|a-b|^p.
inline double curvature_ratio(double p, VecView a, VecView b, VecView z) {
    const std::size_t d = a.size();
    std::vector<double> az(d), bz(d), ab(d);
    for (std::size_t k = 0; k < d; ++k) {
        az[k] = a[k] - z[k];
        bz[k] = b[k] - z[k];
        ab[k] = a[k] - b[k];
    }
    const double den = std::pow(norm(ab), p);
    if (den < 1e-300) return 0.0;
    const std::vector<double> ga = vector_power(az, p - 1.0);
    const std::vector<double> gb = vector_power(bz, p - 1.0);
    double num = 0.0;
    for (std::size_t k = 0; k < d; ++k) num += (ga[k] - gb[k]) * ab[k];
    return p * num / den;
}

// Random search for the empirical curvature constant: Gaussian triples in
// d = 1..3 plus antipodal configurations (b-z = -(a-z)), where the 1D
// supremum p 2^(2-p) is attained.
inline CurvatureCertificate curvature_gamma(double p, long trials, std::uint64_t seed) {
    if (p <= 1.0 || p >= 2.0) throw NotApplicable("curvature_gamma: requires 1 < p < 2");
    CurvatureCertificate cert;
    cert.p = p;
    cert.gamma_analytic = gamma_analytic(p);
    cert.trials = trials;
    Rng rng(seed);
    double best = 0.0;
    std::vector<double> a, b, z;
    for (long t = 0; t < trials; ++t) {
        const int d = 1 + rng.uniform_int(3);
        a.assign(d, 0.0);
        b.assign(d, 0.0);
        z.assign(d, 0.0);
        for (int k = 0; k < d; ++k) {
            a[k] = rng.normal();
            z[k] = rng.normal();
        }
        if (t % 4 == 0) {
            // antipodal about z, random relative length
            const double s = std::exp(rng.uniform(-2.0, 2.0));
            for (int k = 0; k < d; ++k) b[k] = z[k] - s * (a[k] - z[k]);
        } else {
            for (int k = 0; k < d; ++k) b[k] = rng.normal();
        }
        best = std::max(best, curvature_ratio(p, a, b, z));
    }
    cert.gamma_empirical = best;
    cert.max_violation = best - cert.gamma_analytic;
    return cert;
}

// Signed slack of |x_t|^p >= (1-t)|x0|^p + t|x1|^p - gamma t(1-t)|x0-x1|^p.
inline double semiconcavity_check(double p, double gamma, VecView x0, VecView x1, double t) {
    check_same_dim(x0, x1, "semiconcavity_check");
    const std::size_t d = x0.size();
    std::vector<double> xt(d), diff(d);
    for (std::size_t k = 0; k < d; ++k) {
        xt[k] = (1.0 - t) * x0[k] + t * x1[k];
        diff[k] = x0[k] - x1[k];
    }
    return std::pow(norm(xt), p) - (1.0 - t) * std::pow(norm(x0), p) -
           t * std::pow(norm(x1), p) + gamma * t * (1.0 - t) * std::pow(norm(diff), p);
}

// Empirical (p,gamma)-curvature condition for an arbitrary cost:
//   (1-t) c(x0,y) + t c(x1,y) - gamma t(1-t)|x0-x1|^p - c(x_t,y) <= 0.
// Returns the max sampled violation; x in B(0,r_x), y in B(0,r_y).
inline double curvature_condition_check(const CostSpec& spec, double p, double gamma,
                                        long samples, std::uint64_t seed, int dim = 2,
                                        double r_x = 1.0, double r_y = 1.0) {
    Rng rng(seed);
    double worst = -std::numeric_limits<double>::infinity();
    std::vector<double> x0(dim), x1(dim), xt(dim), y(dim), diff(dim);
    auto ball_point = [&](std::vector<double>& v, double r) {
        double n2 = 0.0;
        for (int k = 0; k < dim; ++k) {
            v[k] = rng.normal();
            n2 += v[k] * v[k];
        }
        const double u = std::pow(rng.uniform(), 1.0 / dim);
        const double f = (n2 > 0.0) ? r * u / std::sqrt(n2) : 0.0;
        for (int k = 0; k < dim; ++k) v[k] *= f;
    };
    auto box_point = [&](std::vector<double>& v) {
        for (int k = 0; k < dim; ++k)
            v[k] = spec.omega.lo[k] + rng.uniform() * (spec.omega.hi[k] - spec.omega.lo[k]);
    };
    for (long s = 0; s < samples; ++s) {
        if (spec.variant == CostVariant::boundary) {
            // keep everything inside the box so both branches stay in play
            box_point(x0);
            box_point(x1);
            box_point(y);
        } else {
            ball_point(x0, r_x);
            ball_point(x1, r_x);
            ball_point(y, r_y);
        }
        const double t = rng.uniform();
        for (int k = 0; k < dim; ++k) {
            xt[k] = (1.0 - t) * x0[k] + t * x1[k];
            diff[k] = x0[k] - x1[k];
        }
        const double viol = (1.0 - t) * cost_eval(spec, x0, y) + t * cost_eval(spec, x1, y) -
                            gamma * t * (1.0 - t) * std::pow(norm(diff), p) -
                            cost_eval(spec, xt, y);
        worst = std::max(worst, viol);
    }
    return worst;
}

}  // namespace otstab
