#ifndef GWMAP_RANDOM_HPP
#define GWMAP_RANDOM_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

/**
 * @file random.hpp
 *
 * @brief Portable random draws on top of `std::mt19937_64`.
 *
 * The standard distributions are implementation-defined, so seeded runs would
 * differ between standard libraries. The engine itself is fully specified;
 * everything here is derived from its raw 64-bit output.
 */

namespace gwmap {

using Rng = std::mt19937_64;

/// Default seed used when the caller does not provide one.
inline constexpr std::uint64_t default_seed = 20240601;

/// Uniform draw in [0, 1) with 53 bits of precision.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

/// Unbiased integer in [0, bound) by rejection.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t draw;
    do {
        draw = rng();
    } while (draw >= limit);
    return draw % bound;
}

/// Pair of independent standard normals (Box-Muller).
inline std::pair<double, double> standard_normal_pair(Rng& rng) {
    double u1;
    do {
        u1 = uniform01(rng);
    } while (u1 == 0.0);
    const double u2 = uniform01(rng);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    return { radius * std::cos(angle), radius * std::sin(angle) };
}

/**
 * Draws `count` distinct indices from [0, population) with a partial Fisher-Yates shuffle.
 * The order of the result is the draw order.
 */
inline std::vector<std::size_t> sample_without_replacement(Rng& rng, std::size_t population, std::size_t count) {
    std::vector<std::size_t> pool(population);
    for (std::size_t i = 0; i < population; ++i) {
        pool[i] = i;
    }
    for (std::size_t i = 0; i < count; ++i) {
        const auto j = i + static_cast<std::size_t>(uniform_index(rng, population - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(count);
    return pool;
}

}

#endif
