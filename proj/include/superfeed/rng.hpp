#ifndef SUPERFEED_RNG_HPP
#define SUPERFEED_RNG_HPP

#include <cstdint>
#include <random>

namespace superfeed {

// splitmix64 finalizer, used to whiten stream ids before seeding.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Deterministic per-stream generator: the same (seed, ids...) tuple always
// yields the same stream regardless of which thread asks for it.
template <typename... Ids>
std::mt19937_64 make_stream(std::uint64_t seed, Ids... ids) {
    std::uint64_t h = mix64(seed);
    ((h = mix64(h ^ mix64(static_cast<std::uint64_t>(ids)))), ...);
    return std::mt19937_64(h);
}

// Distributions are constructed per call so a draw depends only on the
// generator state, never on cached spares from another stream.
inline double randn(std::mt19937_64& rng) {
    return std::normal_distribution<double>(0.0, 1.0)(rng);
}

inline double randu(std::mt19937_64& rng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace superfeed

#endif
