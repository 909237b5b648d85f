#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace picante {

// All randomness flows through mt19937_64 seeded from (seed, stream).
// Streams let independent workers own disjoint deterministic generators:
// stream k of seed s always produces the same draws, regardless of which
// thread or process runs it.
using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
    return Rng(splitmix64(splitmix64(seed) ^ splitmix64(~stream)));
}

// Unbiased integer in [0, bound). Hand-rolled so draws are identical on
// every platform; std::uniform_int_distribution is implementation-defined.
inline std::uint64_t uniform_u64(Rng& rng, std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
        std::uint64_t r = rng();
        if (r >= threshold) return r % bound;
    }
}

// Uniform double in [0, 1) with 53 random bits.
inline double uniform_unit(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Standard normal via Box-Muller (one value per call, no cached state).
inline double gaussian(Rng& rng) {
    const double u1 = static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
    const double u2 = uniform_unit(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

}  // namespace picante
