#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace vpersona {

/// The single generator type used across the library. Every draw goes through
/// the helpers below rather than <random> distributions, whose output is
/// implementation-defined; that keeps seeded runs byte-identical across
/// standard libraries.
using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
[[nodiscard]] std::uint64_t mix64(std::uint64_t x) noexcept;

/// Child seed for a named sub-stream of `parent`.
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t parent, std::string_view label) noexcept;
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) noexcept;

/// Uniform integer in [0, n). n must be positive.
[[nodiscard]] std::size_t uniform_index(Rng& rng, std::size_t n);

/// Uniform double in [0, 1) built from the top 53 bits of one draw.
[[nodiscard]] double uniform_unit(Rng& rng);

[[nodiscard]] bool coin_flip(Rng& rng);

template <typename T>
void shuffle(std::span<T> items, Rng& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        std::swap(items[i - 1], items[uniform_index(rng, i)]);
    }
}

[[nodiscard]] std::vector<std::size_t> random_permutation(std::size_t n, Rng& rng);

/// Index drawn from unnormalized nonnegative weights by inverse CDF on one
/// uniform_unit draw.
[[nodiscard]] std::size_t categorical(std::span<const double> weights, Rng& rng);

} // namespace vpersona
