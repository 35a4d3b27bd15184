#pragma once

// Seedable, portable random source. All stochastic code in the library takes
// an explicit Rng so that datasets and Monte-Carlo runs are reproducible.
//
// The core engine is std::mt19937_64, whose output sequence is fixed by the
// standard. The real-valued draws below are implemented on top of the raw
// 64-bit stream rather than through std::*_distribution, because the
// standard does not pin those down across library implementations.

#include <cstdint>
#include <random>

#include "hybnet/common.hpp"

namespace hybnet {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), eng_(splitmix64(seed)) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() { return eng_(); }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n). Fixed-point multiply keeps the mapping
    // identical on every platform.
    std::uint64_t uniform_int(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    // Standard normal via Box-Muller; the second value of each pair is cached.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 1.0 - uniform();  // (0, 1], keeps log() finite
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = kTwoPi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    // Circularly symmetric complex normal CN(0, 1): each component has
    // variance 1/2. Consumes exactly one Box-Muller pair.
    cplx cgaussian() {
        double u1 = 1.0 - uniform();
        double u2 = uniform();
        double r = std::sqrt(-std::log(u1));  // -2 log(u1) scaled by 1/2
        double a = kTwoPi * u2;
        return {r * std::cos(a), r * std::sin(a)};
    }

    // Derive an independent child stream. Children of the same parent with
    // distinct stream ids do not overlap in any practical sense.
    Rng split(std::uint64_t stream) const {
        return Rng(splitmix64(seed_ + 0xA24BAED4963EE407ull * (stream + 1)));
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace hybnet
