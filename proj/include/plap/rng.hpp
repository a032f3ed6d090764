// Seeded randomness helpers; every stochastic routine takes an explicit
// seed so runs replay bit-identically.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "plap/grid.hpp"

namespace plap {

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 step
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
    return std::mt19937_64(mix_seed(seed, stream));
}

// Random Dirichlet field: a few smooth bumps with random amplitudes.
inline Field random_field(const GridPtr& grid, std::mt19937_64& rng,
                          double amplitude = 1.0, int modes = 5) {
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    Field f(grid);
    const Grid& g = *grid;
    const double L = g.b - g.a;
    for (int m = 1; m <= modes; ++m) {
        const double am = amplitude * U(rng) / m;
        for (int i = 0; i < g.n; ++i) {
            const double t = (g.nodes[i] - g.a) / L;
            f.v[i] += am * std::sin(M_PI * m * t);
        }
    }
    if (!g.dirichlet_left) {
        // radial: free center value, keep only the outer zero
        std::uniform_real_distribution<double> U0(-amplitude, amplitude);
        const double c0 = U0(rng);
        for (int i = 0; i < g.n; ++i) {
            const double t = (g.nodes[i] - g.a) / L;
            f.v[i] += c0 * (1.0 - t * t);
        }
    }
    f.enforce_dirichlet();
    return f;
}

}  // namespace plap
