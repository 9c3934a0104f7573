// Shared basics: error types, deterministic RNG, reductions, small vector helpers.
#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace otstab {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidMeasure : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct DimensionError : Error { using Error::Error; };
struct SolverError : Error { using Error::Error; };
struct SupportError : Error { using Error::Error; };
struct PartitionError : Error { using Error::Error; };
struct NumericsError : Error { using Error::Error; };
struct FitError : Error { using Error::Error; };
struct NotApplicable : Error { using Error::Error; };

// ---------------------------------------------------------------------------
// Deterministic RNG
//
// Counter-based: any (seed, stream, index) triple maps to the same value
// regardless of call order, so sampled quadratures are reproducible and
// order-independent.
// ---------------------------------------------------------------------------

constexpr std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

struct CounterRng {
    std::uint64_t seed = 0;

    std::uint64_t bits(std::uint64_t stream, std::uint64_t index) const {
        return splitmix64(splitmix64(seed ^ (stream * 0xd1342543de82ef95ULL)) ^
                          (index * 0x2545f4914f6cdd1dULL));
    }
    // uniform in [0, 1)
    double uniform(std::uint64_t stream, std::uint64_t index) const {
        return static_cast<double>(bits(stream, index) >> 11) * 0x1.0p-53;
    }
};

// Stateful convenience wrapper for tests and experiment drivers.
struct Rng {
    std::uint64_t state;

    explicit Rng(std::uint64_t seed = 1) : state(splitmix64(seed ^ 0x5851f42d4c957f2dULL)) {}

    std::uint64_t next_bits() {
        state = splitmix64(state);
        return state;
    }
    double uniform() { return static_cast<double>(next_bits() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }
    // Box-Muller; consumes two uniforms.
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }
    int uniform_int(int n) { return static_cast<int>(next_bits() % static_cast<std::uint64_t>(n)); }
};

// ---------------------------------------------------------------------------
// Reductions
// ---------------------------------------------------------------------------

// Fixed-order pairwise summation: deterministic and with better error growth
// than a running sum, which matters for the 1e-10-level inequality checks.
inline double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 16) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_sum(v.subspan(0, half)) + pairwise_sum(v.subspan(half));
}

inline double pairwise_sum(const std::vector<double>& v) {
    return pairwise_sum(std::span<const double>(v));
}

// ---------------------------------------------------------------------------
// Small dense vector helpers (d-dimensional points stored flat)
// ---------------------------------------------------------------------------

using VecView = std::span<const double>;

inline double dot(VecView a, VecView b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
}

inline double norm2(VecView a) { return dot(a, a); }

inline double norm(VecView a) { return std::sqrt(norm2(a)); }

inline double dist2(VecView a, VecView b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = a[k] - b[k];
        s += d * d;
    }
    return s;
}

inline double dist(VecView a, VecView b) { return std::sqrt(dist2(a, b)); }

inline void check_same_dim(VecView a, VecView b, const char* where) {
    if (a.size() != b.size())
        throw DimensionError(std::string(where) + ": dimension mismatch (" +
                             std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
}

}  // namespace otstab
