#pragma once

#include <cstdint>
#include <random>

namespace fbreg {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Random streams used within one run.
enum class Stream : std::uint64_t { Chain = 1, Thinning = 2, Simulation = 3 };

/// Seed for stream `stream` of chain `id` under master seed `seed`. Two rounds
/// of SplitMix64 so that neighbouring (seed, id) pairs land far apart.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t id,
                                    Stream stream = Stream::Chain) {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ (static_cast<std::uint64_t>(stream) << 56));
    return splitmix64(h + id);
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t id, Stream stream = Stream::Chain) {
    return Rng(derive_seed(seed, id, stream));
}

}  // namespace fbreg
