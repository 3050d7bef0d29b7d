#pragma once

#include <cstdint>
#include <random>

namespace lingua_adapt {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Independent stream seed for (seed, key); used so per-item randomness
/// does not depend on iteration order or thread count.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t key) {
    return splitmix64(splitmix64(seed) ^ (key * 0xD1B54A32D192ED03ULL));
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed, std::uint64_t key) {
    return Rng(derive_seed(seed, key));
}

} // namespace lingua_adapt
