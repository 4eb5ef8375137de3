#pragma once

// Portable random helpers. The std:: distributions are implementation-defined,
// so everything that must be reproducible across toolchains goes through here.

#include <cstddef>
#include <cstdint>
#include <cmath>
#include <random>

namespace eyeadv {

/// splitmix64 finalizer over (seed, stream); used to give every tree, fold and
/// attack its own independent generator.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream)
{
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Uniform integer in [0, n).
inline std::size_t uniform_index(std::mt19937_64& rng, std::size_t n)
{
    const std::uint64_t bound = n;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t r = rng();
    while (r >= limit) r = rng();
    return static_cast<std::size_t>(r % bound);
}

/// Uniform real in [0, 1).
inline double uniform01(std::mt19937_64& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_real(std::mt19937_64& rng, double lo, double hi)
{
    return lo + (hi - lo) * uniform01(rng);
}

/// Box-Muller standard normal.
inline double standard_normal(std::mt19937_64& rng)
{
    double u1 = uniform01(rng);
    while (u1 <= 0.0) u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

}  // namespace eyeadv
