// Gauss-Legendre nodes and weights, computed once per order by Newton
// iteration on the Legendre recurrence and mapped to [0, 1].
#pragma once

#include <cmath>
#include <vector>

#include "pnf/errors.hpp"

namespace pnf {

struct Quadrature {
    std::vector<double> nodes;   // in (0, 1)
    std::vector<double> weights; // sum to 1
};

inline Quadrature gauss_legendre_01(int order) {
    if (order < 1 || order > 128)
        throw ConfigError("quadrature order must be in [1, 128]");
    const int n = order;
    Quadrature q;
    q.nodes.resize(static_cast<std::size_t>(n));
    q.weights.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < (n + 1) / 2; ++i) {
        // Chebyshev-based initial guess for the i-th root of P_n on [-1, 1].
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (x * p0 - p1) / (x * x - 1.0);
            double dx = p0 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        double w = 2.0 / ((1.0 - x * x) * pp * pp);
        q.nodes[static_cast<std::size_t>(i)] = 0.5 * (1.0 - x);
        q.nodes[static_cast<std::size_t>(n - 1 - i)] = 0.5 * (1.0 + x);
        q.weights[static_cast<std::size_t>(i)] = 0.5 * w;
        q.weights[static_cast<std::size_t>(n - 1 - i)] = 0.5 * w;
    }
    return q;
}

} // namespace pnf
