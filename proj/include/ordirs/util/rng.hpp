#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace ordirs::util {

/// Deterministic random source with pinned derivations: draws depend only on
/// the seed and call order, never on library-specific distribution internals.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    /// Stream-derivation helper so per-frame streams are independent.
    static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t bits() { return eng_(); }

    /// Uniform in [0, 1) with 53-bit resolution.
    double u01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    /// Standard normal via the Box-Muller transform, one value per call
    /// (no caching, so call order fully determines the sequence).
    double gauss() {
        double u1 = u01();
        double u2 = u01();
        while (u1 <= 0.0) u1 = u01();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::mt19937_64 eng_;
};

}  // namespace ordirs::util
