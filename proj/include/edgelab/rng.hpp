#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace edgelab {

using Rng = std::mt19937_64;

/// Uniform double in [0, 1) built from the top 53 bits of one draw.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double standard_normal(Rng& rng) {
    std::normal_distribution<double> dist(0.0, 1.0);
    return dist(rng);
}

/// Laplace(0, scale) by inverse CDF.
inline double laplace(Rng& rng, double scale) {
    double u = uniform01(rng) - 0.5;
    while (u == -0.5) u = uniform01(rng) - 0.5;
    const double s = u < 0 ? -1.0 : 1.0;
    return -scale * s * std::log1p(-2.0 * std::abs(u));
}

/// Independent stream seed for a (seed, tag) pair (splitmix64 finalizer).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (tag + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

} // namespace edgelab
