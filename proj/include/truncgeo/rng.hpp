#pragma once

#include <cstdint>
#include <random>

namespace truncgeo {

// splitmix64 step; the usual seed expander.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Replication seed derived from (master, n, prior index, replication index).
// Pure function of its inputs, so any worker computes the same stream for a
// given replication regardless of scheduling.
inline std::uint64_t seed_for(std::uint64_t master, std::uint64_t a, std::uint64_t b,
                              std::uint64_t c) {
    std::uint64_t s = master;
    std::uint64_t h = splitmix64(s);
    s ^= a + 0x9e3779b97f4a7c15ULL;
    h ^= splitmix64(s);
    s ^= b + 0xc2b2ae3d27d4eb4fULL;
    h ^= splitmix64(s);
    s ^= c + 0x165667b19e3779f9ULL;
    h ^= splitmix64(s);
    return h;
}

struct Rng {
    explicit Rng(std::uint64_t seed) : eng(seed) {}
    // 53-bit uniform in [0, 1); explicit construction keeps draws identical
    // across standard libraries.
    double uniform01() { return static_cast<double>(eng() >> 11) * 0x1.0p-53; }
    std::mt19937_64 eng;
};

}  // namespace truncgeo
