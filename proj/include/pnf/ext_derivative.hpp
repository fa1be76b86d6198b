// Numeric exterior derivative for pointwise-evaluable 2-forms (closedness
// checks of numerically computed forms). Central differences, O(h^2).
#pragma once

#include <functional>
#include <tuple>
#include <vector>

#include "pnf/chart.hpp"
#include "pnf/linalg.hpp"

namespace pnf {

struct ThreeForm {
    // Strictly increasing (i, j, k) components of
    //   (d omega)_{ijk} = d_i omega_{jk} + d_j omega_{ki} + d_k omega_{ij}.
    std::vector<std::tuple<int, int, int, double>> components;
    double max_abs{0.0};
};

inline ThreeForm exterior_derivative_numeric(const std::function<Mat(const Vec&)>& omega,
                                             const Vec& x, double h,
                                             const ChartBox* box = nullptr) {
    const int n = static_cast<int>(x.size());
    if (box) {
        for (int i = 0; i < n; ++i) {
            Vec xp = x, xm = x;
            xp[i] += h;
            xm[i] -= h;
            if (!box->contains(xp) || !box->contains(xm))
                throw OutOfDomain("finite-difference stencil exits the chart box");
        }
    }
    std::vector<Mat> d(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        Vec xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        d[static_cast<std::size_t>(i)] = (omega(xp) - omega(xm)) / (2.0 * h);
        require_finite(d[static_cast<std::size_t>(i)], "numeric exterior derivative");
    }
    ThreeForm out;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            for (int k = j + 1; k < n; ++k) {
                double v = d[static_cast<std::size_t>(i)](j, k) +
                           d[static_cast<std::size_t>(j)](k, i) +
                           d[static_cast<std::size_t>(k)](i, j);
                out.components.emplace_back(i, j, k, v);
                out.max_abs = std::max(out.max_abs, std::abs(v));
            }
    return out;
}

} // namespace pnf
