#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

// Minimal seeded generators for property tests.
namespace omx::test {

class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    double normal() { return std::normal_distribution<double>()(rng_); }
    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
};

// Runs body(gen, case_index) for `cases` independent seeded generators.
template <class F>
void for_all(std::uint64_t seed, int cases, F&& body)
{
    for (int i = 0; i < cases; ++i) {
        Gen g(seed * 1000003u + static_cast<std::uint64_t>(i));
        body(g, i);
    }
}

inline double rel_diff(double a, double b)
{
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

} // namespace omx::test
