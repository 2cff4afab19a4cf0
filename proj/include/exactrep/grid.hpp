#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace exactrep {

/// Time discretization of [0, T] with nodes t_k = T (1 - (1 - k/N)^gamma).
/// gamma = 1 is uniform; gamma > 1 clusters nodes at T, where the optimal
/// control grows. Coarsening near T (gamma < 1) is rejected.
struct TimeGrid {
    double T = 1.0;
    int n = 2;
    double gamma = 1.0;
    std::vector<double> nodes;

    double dt(int k) const { return nodes[static_cast<std::size_t>(k) + 1] - nodes[static_cast<std::size_t>(k)]; }

    static TimeGrid build(double T, int n, double gamma) {
        if (!(T > 0.0) || !std::isfinite(T)) throw std::invalid_argument("grid horizon T must be positive");
        if (n < 2) throw std::invalid_argument("grid needs at least 2 steps");
        if (!(gamma >= 1.0)) throw std::invalid_argument("gamma < 1 would coarsen the grid near T");
        TimeGrid g{T, n, gamma, {}};
        g.nodes.resize(static_cast<std::size_t>(n) + 1);
        for (int k = 0; k <= n; ++k) {
            const double frac = 1.0 - static_cast<double>(k) / n;
            g.nodes[static_cast<std::size_t>(k)] = T * (1.0 - std::pow(frac, gamma));
        }
        g.nodes.front() = 0.0;
        g.nodes.back() = T;
        for (int k = 0; k < n; ++k)
            if (!(g.nodes[static_cast<std::size_t>(k)] < g.nodes[static_cast<std::size_t>(k) + 1]))
                throw std::invalid_argument("grid nodes are not strictly increasing; n too large for gamma");
        return g;
    }
};

} // namespace exactrep
