#pragma once

#include <cstdint>
#include <random>

namespace binsonar {

// std::uniform_*_distribution output differs between standard libraries;
// these helpers only depend on the fully specified mt19937_64 stream.

/// Uniform integer in [0, bound) by rejection; bound > 0.
inline std::uint64_t uniform_below(std::mt19937_64& gen, std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
        x = gen();
    } while (x >= limit);
    return x % bound;
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform_unit(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

template <class RandomIt>
void deterministic_shuffle(RandomIt first, RandomIt last, std::mt19937_64& gen) {
    const auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
        const auto j = uniform_below(gen, i);
        std::swap(first[i - 1], first[j]);
    }
}

}  // namespace binsonar
