#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace udgp {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Derives an independent stream key from a master seed and a path of
/// counters (cell, trial, start, ...). Schedule-independent by construction.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) noexcept {
    std::uint64_t k = mix64(seed);
    for (std::uint64_t c : path) k = mix64(k ^ mix64(c + 0x632be59bd9b4e019ULL));
    return k;
}

using Engine = std::mt19937_64;

inline Engine make_engine(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    return Engine(derive_seed(seed, path));
}

} // namespace udgp
