#pragma once

// Exhaustive maximum-weight injective assignment, for cross-checking the
// Hungarian solver on small matrices.

#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

namespace oracle {

inline double best_injective_total(const std::vector<std::vector<double>>& w) {
    const std::size_t n = w.size();
    const std::size_t m = n == 0 ? 0 : w[0].size();
    std::vector<bool> used(m, false);
    double best = -std::numeric_limits<double>::infinity();
    std::function<void(std::size_t, double)> go = [&](std::size_t i, double acc) {
        if (i == n) {
            if (acc > best) best = acc;
            return;
        }
        for (std::size_t j = 0; j < m; ++j) {
            if (used[j]) continue;
            used[j] = true;
            go(i + 1, acc + w[i][j]);
            used[j] = false;
        }
    };
    go(0, 0.0);
    return best;
}

} // namespace oracle
