#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>
#include <algorithm>

namespace kitecert {

// Counter-based random stream (splitmix64 finalizer over key + counter).
// Streams are keyed by (master_seed, index, tag): any draw is a pure function
// of the key and its position, so batch size, evaluation order and worker
// scheduling cannot perturb the sequence.
class RandomStream {
public:
    RandomStream(std::uint64_t master_seed, std::uint64_t index, std::uint64_t tag)
        : state_(mix(mix(mix(master_seed) ^ index) ^ (tag * 0x9E3779B97F4A7C15ULL))) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        return finalize(state_);
    }

    // uniform in [0, 1)
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double a, double b) {
        return a + (b - a) * next_unit();
    }

    // Box-Muller; consumes exactly two draws per sample.
    double normal(double mean, double sigma) {
        const double u1 = 1.0 - next_unit();  // (0, 1]
        const double u2 = next_unit();
        const double z = std::sqrt(-2.0 * std::log(u1)) *
                         std::cos(2.0 * std::numbers::pi * u2);
        return mean + sigma * z;
    }

    // Beta(a, b) for small integer shape parameters, via the order-statistic
    // identity: the a-th smallest of a+b-1 independent uniforms.
    double beta_int(int a, int b) {
        if (a < 1 || b < 1 || a + b > 64)
            throw std::invalid_argument("beta_int: shape parameters out of range");
        const int n = a + b - 1;
        double draws[64];
        for (int i = 0; i < n; ++i) draws[i] = next_unit();
        std::nth_element(draws, draws + (a - 1), draws + n);
        return draws[a - 1];
    }

    // Pareto type I with unit scale: support [1, inf), P(X > x) = x^{-tail}.
    double pareto(double tail_index) {
        if (tail_index <= 0.0)
            throw std::invalid_argument("pareto: tail index must be positive");
        const double u = 1.0 - next_unit();  // (0, 1]
        return std::pow(u, -1.0 / tail_index);
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9E3779B97F4A7C15ULL;
        return finalize(z);
    }
    static std::uint64_t finalize(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

}  // namespace kitecert
