#pragma once

#include <cstdint>
#include <random>

namespace diffusim {

// Every random quantity in a simulation is drawn from a stream whose seed is
// derived from (base seed, repetition, role). Streams never share state, so
// repetitions run in parallel and node processing order never matters.

inline constexpr std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
}

inline constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag) {
    return mix64(base + 0x9E3779B97F4A7C15ULL * (tag + 1));
}

inline constexpr std::uint64_t rep_seed(std::uint64_t base_seed, int rep) {
    return derive_seed(base_seed, 0x1000u + static_cast<std::uint64_t>(rep));
}

// Stream roles within one repetition.
inline std::mt19937_64 target_stream(std::uint64_t rep_seed_v) {
    return std::mt19937_64(derive_seed(rep_seed_v, 1));
}

inline std::mt19937_64 mask_stream(std::uint64_t rep_seed_v) {
    return std::mt19937_64(derive_seed(rep_seed_v, 2));
}

inline std::mt19937_64 graph_stream(std::uint64_t rep_seed_v, int attempt) {
    return std::mt19937_64(derive_seed(rep_seed_v, 0x3000u + static_cast<std::uint64_t>(attempt)));
}

inline std::mt19937_64 node_stream(std::uint64_t rep_seed_v, int node) {
    return std::mt19937_64(derive_seed(rep_seed_v, 0x100000u + static_cast<std::uint64_t>(node)));
}

}  // namespace diffusim
