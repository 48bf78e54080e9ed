#pragma once

#include <cstdint>
#include <random>

namespace maee {

// splitmix64 finalizer, used to derive independent stream seeds from a
// master seed plus arbitrary indices.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) {
    return mix64(mix64(master ^ mix64(a)) ^ mix64(b));
}

using Rng = std::mt19937_64;

} // namespace maee
