#pragma once
#include <cstdint>
#include <random>

#include "cornet/matrix.hpp"

namespace cornet {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Derive an independent stream seed from (base, a, b). Pure; the experiment
/// runner leans on this for replication/parallelism determinism.
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) {
    std::uint64_t x = splitmix64(base ^ splitmix64(a));
    return splitmix64(x ^ splitmix64(b + 0x6A09E667F3BCC909ULL));
}

inline Rng make_rng(std::uint64_t seed) { return Rng(splitmix64(seed)); }

inline double draw_gaussian(Rng& rng, double mean = 0.0, double sd = 1.0) {
    std::normal_distribution<double> d(mean, sd);
    return d(rng);
}

inline double draw_uniform(Rng& rng, double lo, double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    return d(rng);
}

/// Beta(alpha, alpha) via the two-gamma construction.
inline double draw_beta_symmetric(Rng& rng, double alpha) {
    std::gamma_distribution<double> g(alpha, 1.0);
    const double u = g(rng);
    const double v = g(rng);
    const double s = u + v;
    if (s <= 0.0) return 0.5;  // both underflowed; the symmetric midpoint
    return u / s;
}

inline Matrix draw_gaussian_matrix(Rng& rng, std::size_t rows, std::size_t cols, double sd = 1.0) {
    Matrix m(rows, cols);
    std::normal_distribution<double> d(0.0, sd);
    for (double& v : m.a) v = d(rng);
    return m;
}

}  // namespace cornet
