#pragma once

// Deterministic random streams. All variates are derived from the raw
// mt19937_64 output through fixed inverse-cdf/rejection recipes so that a
// seed reproduces the same draws on every platform (std::*_distribution
// is implementation-defined and avoided).

#include <cstdint>
#include <cmath>

#include "special.hpp"

namespace cudvine::math {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {
        // splitmix64 warm-up decorrelates small seeds
        for (int i = 0; i < 4; ++i) next_raw();
    }

    // open interval (0,1)
    double uniform() {
        const std::uint64_t r = next_raw() >> 11;
        return (static_cast<double>(r) + 0.5) * 0x1.0p-53;
    }

    double normal() { return norm_quantile(uniform()); }

    // Marsaglia-Tsang; shape < 1 handled by the boost relation.
    double gamma(double shape) {
        if (shape < 1.0) {
            const double u = uniform();
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    double chi_squared(double dof) { return 2.0 * gamma(0.5 * dof); }

    std::uint64_t next_raw() {
        // xorshift-multiply step of splitmix64 feeding mt-free stream;
        // simple, fast, and fully reproducible.
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

// Stream for replicate i of a base-seeded experiment.
inline Rng replicate_rng(std::uint64_t base_seed, std::uint64_t index) {
    return Rng(base_seed + 0x632be59bd9b4e019ULL * (index + 1));
}

}  // namespace cudvine::math
