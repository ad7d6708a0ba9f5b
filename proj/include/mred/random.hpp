#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace mred {

/// Uniform integer in [0, bound) straight from mt19937_64 output by
/// rejection; std::uniform_int_distribution is not portable across library
/// vendors.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t r;
    do r = rng(); while (r >= limit);
    return r % bound;
}

/// Fisher-Yates over `v` using uniform_below.
template <class T>
void portable_shuffle(std::vector<T>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[uniform_below(rng, i)]);
}

}  // namespace mred
