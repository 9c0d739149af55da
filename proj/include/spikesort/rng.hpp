#pragma once

#include <cstdint>
#include <random>

namespace spikesort {

// Deterministic RNG used everywhere randomness is needed. mt19937_64 output
// is fully specified by the standard and the distributions below are written
// out by hand, so a fixed seed gives identical results on any platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    // Uniform in [0, 1), 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Uniform integer in [0, n); n > 0. Modulo with rejection of the biased tail.
    std::uint64_t uniform_int(std::uint64_t n);

    // Standard normal, Box-Muller. Two uniforms per draw, no cached state.
    double normal();

private:
    std::mt19937_64 engine_;
};

// Independent child seed for (base, tag); gives trials, candidate cluster
// counts, and solver iterations their own streams.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag);

}  // namespace spikesort
