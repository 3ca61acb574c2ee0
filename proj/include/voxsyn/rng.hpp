#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace voxsyn {

// Seeded randomness used across the toolkit. The generator and its mapping to
// uniform/normal variates are part of the external contract: identical seeds
// must reproduce identical streams on every platform. The engine is
// std::mt19937_64 (fully specified by the standard); variate mappings are
// implemented here rather than via std::*_distribution, whose output is
// implementation-defined.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Independent substream k of a master seed.
inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t k) {
    return splitmix64(seed ^ splitmix64(k));
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53-bit resolution.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform in (0, 1]; safe as a log() argument.
    double uniform01_open_low() {
        return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Uniform integer in [0, n). n must be >= 1.
    std::int64_t uniform_index(std::int64_t n) {
        auto i = static_cast<std::int64_t>(uniform01() * static_cast<double>(n));
        return i >= n ? n - 1 : i;
    }

    // Standard normal via Box-Muller; one engine draw pair per variate so the
    // stream position is a fixed function of the call count.
    double normal() {
        const double u1 = uniform01_open_low();
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

private:
    std::mt19937_64 engine_;
};

} // namespace voxsyn
