#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace ramie::detail {

// Unbiased draw in [0, n) via rejection sampling. std::uniform_int_distribution
// is implementation-defined, which would break cross-platform reproducibility
// of shuffles and the random-retriever baseline.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
    if (n == 0) return 0;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                (std::numeric_limits<std::uint64_t>::max() % n);
    std::uint64_t draw;
    do {
        draw = rng();
    } while (draw >= limit);
    return draw % n;
}

template <typename T>
void deterministic_shuffle(std::vector<T>& items, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (std::size_t i = items.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(uniform_below(rng, i));
        std::swap(items[i - 1], items[j]);
    }
}

// k distinct indices from [0, n), in draw order.
inline std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k,
                                                           std::uint64_t seed) {
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = i;
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> out;
    out.reserve(k);
    for (std::size_t drawn = 0; drawn < k && drawn < n; ++drawn) {
        const std::size_t j = drawn + static_cast<std::size_t>(uniform_below(rng, n - drawn));
        std::swap(pool[drawn], pool[j]);
        out.push_back(pool[drawn]);
    }
    return out;
}

}  // namespace ramie::detail
