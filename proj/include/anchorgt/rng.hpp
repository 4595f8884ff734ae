#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace anchorgt {

// splitmix64 finalizer
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Stateless counter-based generator: the value for (seed, stream, counter)
/// is fixed regardless of the order in which counters are visited.
constexpr std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t stream,
                                     std::uint64_t counter) noexcept {
    return mix64(mix64(mix64(seed) ^ stream) ^ counter);
}

/// Uniform double in (0, 1], never 0 so it is safe under log().
constexpr double to_unit_open(std::uint64_t bits) noexcept {
    return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

/// Uniform index in [0, bound) with rejection, identical on every platform
/// (unlike std::uniform_int_distribution).
inline std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t bound) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % bound;
}

/// Standard normal via Box-Muller on the engine's raw output.
inline double standard_normal(std::mt19937_64& rng) {
    constexpr double two_pi = 6.283185307179586476925286766559;
    const double u1 = to_unit_open(rng());
    const double u2 = to_unit_open(rng());
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

} // namespace anchorgt
