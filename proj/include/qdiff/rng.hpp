#pragma once

#include <cstdint>

namespace qdiff {

// splitmix64 (Steele, Lea, Vigna). Used only to derive per-realization seeds
// from a master seed; the draws themselves come from std::mt19937_64.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// k-th derived seed of a master seed. Pure function of (master_seed, k).
inline std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t k) {
    std::uint64_t state = master_seed;
    std::uint64_t out = 0;
    for (std::uint64_t i = 0; i <= k; ++i) out = splitmix64_next(state);
    return out;
}

}  // namespace qdiff
