#pragma once

#include <cstdint>
#include <random>

namespace hypvol {

inline constexpr std::uint64_t kDefaultSeed = 20240917ULL;

/// splitmix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

using Rng = std::mt19937_64;

/// Uniform double in [0, 1) from the top 53 bits; portable across standard
/// libraries, unlike std::uniform_real_distribution.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace hypvol
