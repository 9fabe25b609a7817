#pragma once

// Two independent ways to compute the earth mover's distance between two
// distributions on positions 0..m-1 with ground cost |i - j|:
//   * min_cost_transport: successive shortest paths on the full transport
//     network (Bellman-Ford, real capacities);
//   * unit_atom_transport: split both distributions into equal atoms of mass
//     1/D and take the cheapest perfect pairing by brute force.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

namespace oracle {

inline double min_cost_transport(const std::vector<double>& p, const std::vector<double>& q) {
    const int m = static_cast<int>(p.size());
    const int s = 2 * m, t = 2 * m + 1, nodes = 2 * m + 2;
    struct Edge {
        int to;
        double cap;
        double cost;
        int rev;
    };
    std::vector<std::vector<Edge>> g(nodes);
    auto add = [&](int a, int b, double cap, double cost) {
        g[a].push_back({b, cap, cost, static_cast<int>(g[b].size())});
        g[b].push_back({a, 0.0, -cost, static_cast<int>(g[a].size()) - 1});
    };
    for (int i = 0; i < m; ++i) add(s, i, p[i], 0.0);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) add(i, m + j, 2.0, std::abs(i - j));
    for (int j = 0; j < m; ++j) add(m + j, t, q[j], 0.0);

    const double eps = 1e-15;
    double total = 0.0;
    for (;;) {
        std::vector<double> dist(nodes, std::numeric_limits<double>::infinity());
        std::vector<int> prev_node(nodes, -1), prev_edge(nodes, -1);
        dist[s] = 0.0;
        for (int round = 0; round < nodes; ++round) {
            bool changed = false;
            for (int u = 0; u < nodes; ++u) {
                if (!std::isfinite(dist[u])) continue;
                for (int e = 0; e < static_cast<int>(g[u].size()); ++e) {
                    const auto& ed = g[u][e];
                    if (ed.cap > eps && dist[u] + ed.cost < dist[ed.to] - 1e-12) {
                        dist[ed.to] = dist[u] + ed.cost;
                        prev_node[ed.to] = u;
                        prev_edge[ed.to] = e;
                        changed = true;
                    }
                }
            }
            if (!changed) break;
        }
        if (!std::isfinite(dist[t])) break;
        double push = std::numeric_limits<double>::infinity();
        for (int v = t; v != s; v = prev_node[v]) push = std::min(push, g[prev_node[v]][prev_edge[v]].cap);
        for (int v = t; v != s; v = prev_node[v]) {
            auto& ed = g[prev_node[v]][prev_edge[v]];
            ed.cap -= push;
            g[v][ed.rev].cap += push;
        }
        total += push * dist[t];
    }
    return total;
}

/// `p` and `q` must be multiples of 1/D; D! pairings are tried, so keep D small.
inline double unit_atom_transport(const std::vector<double>& p, const std::vector<double>& q, int D) {
    auto atoms = [D](const std::vector<double>& dist) {
        std::vector<int> out;
        for (std::size_t i = 0; i < dist.size(); ++i) {
            const int k = static_cast<int>(std::lround(dist[i] * D));
            for (int a = 0; a < k; ++a) out.push_back(static_cast<int>(i));
        }
        return out;
    };
    const auto xs = atoms(p);
    auto ys = atoms(q);
    std::sort(ys.begin(), ys.end());
    double best = std::numeric_limits<double>::infinity();
    do {
        double cost = 0.0;
        for (std::size_t a = 0; a < xs.size(); ++a) cost += std::abs(xs[a] - ys[a]);
        best = std::min(best, cost / D);
    } while (std::next_permutation(ys.begin(), ys.end()));
    return best;
}

} // namespace oracle
