#pragma once

#include <cstdint>
#include <random>

namespace rosa {

/// SplitMix64 finalizer; a bijective 64-bit mix used to derive seeds and hashed IDs.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Deterministic stream seeded through splitmix64 so nearby seeds decorrelate.
inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
    return std::mt19937_64(splitmix64(seed ^ splitmix64(stream)));
}

/**
 * Uniform integer in [0, n). Rejection sampling keeps the result identical
 * across standard libraries, unlike std::uniform_int_distribution.
 */
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
        const std::uint64_t x = rng();
        if (x >= threshold) {
            return x % n;
        }
    }
}

} // namespace rosa
