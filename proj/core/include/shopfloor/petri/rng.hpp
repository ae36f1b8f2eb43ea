#pragma once

#include <cstdint>

namespace shopfloor::petri {

// splitmix64 (Steele, Lea, Vigna). Chosen because it is tiny, well documented
// and bit-exact on every platform; all stochastic behaviour in the simulator
// reduces to this one generator so runs replay identically everywhere.
inline std::uint64_t splitmix64_next(std::uint64_t state) {
    return state + 0x9E3779B97F4A7C15ULL;
}

inline std::uint64_t splitmix64_mix(std::uint64_t state) {
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Uniform draw in [0, 2^53) derived from an already-advanced state. Compared
// against integer thresholds so no floating point enters simulation guards.
inline std::int64_t splitmix64_draw53(std::uint64_t advanced_state) {
    return static_cast<std::int64_t>(splitmix64_mix(advanced_state) >> 11);
}

constexpr std::int64_t kDraw53Range = 1LL << 53;

}  // namespace shopfloor::petri
