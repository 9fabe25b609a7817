#include "vpersona/random.hpp"

#include "vpersona/error.hpp"

#include <limits>
#include <numeric>

namespace vpersona {

std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t parent, std::string_view label) noexcept {
    // FNV-1a over the label, then mixed with the parent.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : label) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return mix64(mix64(parent) ^ h);
}

std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) noexcept {
    return mix64(mix64(parent) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

std::size_t uniform_index(Rng& rng, std::size_t n) {
    require(n > 0, ErrorCode::InvalidArgument, "uniform_index: empty range");
    const std::uint64_t range = static_cast<std::uint64_t>(n);
    // Rejection sampling: discard the incomplete top bucket.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % range;
    std::uint64_t draw = rng();
    while (draw >= limit) {
        draw = rng();
    }
    return static_cast<std::size_t>(draw % range);
}

double uniform_unit(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

bool coin_flip(Rng& rng) { return (rng() >> 63) != 0; }

std::vector<std::size_t> random_permutation(std::size_t n, Rng& rng) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle(std::span<std::size_t>(order), rng);
    return order;
}

std::size_t categorical(std::span<const double> weights, Rng& rng) {
    require(!weights.empty(), ErrorCode::InvalidArgument, "categorical: no weights");
    double total = 0.0;
    for (double w : weights) {
        require(w >= 0.0, ErrorCode::InvalidArgument, "categorical: negative weight");
        total += w;
    }
    require(total > 0.0, ErrorCode::InvalidArgument, "categorical: weights sum to zero");
    const double u = uniform_unit(rng) * total;
    double cumulative = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        cumulative += weights[i];
        if (u < cumulative) {
            return i;
        }
    }
    // Rounding can leave u at the very top; fall back to the last positive weight.
    for (std::size_t i = weights.size(); i > 0; --i) {
        if (weights[i - 1] > 0.0) {
            return i - 1;
        }
    }
    return weights.size() - 1;
}

} // namespace vpersona
