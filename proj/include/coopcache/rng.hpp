#pragma once

#include <cstdint>
#include <random>

namespace coopcache {

// Purpose tags for deriving independent RNG streams from one run seed.
// Keeping the tags fixed makes every component reproducible in isolation:
// re-running only the mobility stream of a run yields the same angles.
enum class RngStream : std::uint64_t {
    placement = 1,
    caching = 2,
    requests = 3,
    mobility = 4,
    init = 5,
    monte_carlo = 6,
    permute = 7,
};

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Derives a stream seed from (seed, purpose, index) so component streams
/// never overlap.
inline std::uint64_t derive_seed(std::uint64_t seed, RngStream stream,
                                 std::uint64_t index = 0) {
    std::uint64_t s = seed;
    std::uint64_t a = splitmix64(s);
    s ^= static_cast<std::uint64_t>(stream) * 0xda942042e4dd58b5ULL;
    std::uint64_t b = splitmix64(s);
    s ^= index * 0x2545f4914f6cdd1dULL;
    std::uint64_t c = splitmix64(s);
    return a ^ (b << 1) ^ c;
}

inline std::mt19937_64 make_engine(std::uint64_t seed, RngStream stream,
                                   std::uint64_t index = 0) {
    return std::mt19937_64(derive_seed(seed, stream, index));
}

/// Uniform double in [0, 1) using the top 53 bits of the engine output.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, n) without modulo bias.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(rng()) * n) >> 64);
}

}  // namespace coopcache
