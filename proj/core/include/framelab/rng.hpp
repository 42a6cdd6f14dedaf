#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace framelab {

// Deterministic seed derivation. Every random stream in the project is an
// mt19937_64 seeded through these combiners, so concurrent or reordered
// execution cannot change results.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline uint64_t hash_combine(uint64_t seed, uint64_t v) {
    return splitmix64(seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2)));
}

inline uint64_t hash_combine(uint64_t seed, std::string_view tag) {
    uint64_t h = seed;
    for (char c : tag) h = hash_combine(h, static_cast<uint64_t>(static_cast<unsigned char>(c)));
    return h;
}

inline std::mt19937_64 make_rng(uint64_t seed) { return std::mt19937_64(splitmix64(seed)); }

// Stream for rollout (seed, step, task, member) tuples.
inline std::mt19937_64 rollout_rng(uint64_t seed, uint64_t step, uint64_t task_id, uint64_t member) {
    uint64_t h = hash_combine(seed, step);
    h = hash_combine(h, task_id);
    h = hash_combine(h, member);
    return make_rng(h);
}

}  // namespace framelab
