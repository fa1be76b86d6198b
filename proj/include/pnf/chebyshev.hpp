// Tensor-product Chebyshev interpolation of smooth matrix-valued maps on a
// box. Used as a fast proxy for flow-averaged quantities inside Moser runs;
// the fit quality is probed and reported, never assumed.
#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "pnf/chart.hpp"
#include "pnf/linalg.hpp"
#include "pnf/rng.hpp"

namespace pnf {

class ChebyshevInterpolant {
public:
    ChebyshevInterpolant() = default;

    static ChebyshevInterpolant fit(const std::function<Mat(const Vec&)>& f, const ChartBox& box,
                                    int degree) {
        if (degree < 1 || degree > 64) throw ConfigError("chebyshev degree must be in [1, 64]");
        ChebyshevInterpolant c;
        c.box_ = box;
        c.degree_ = degree;
        const int dim = box.dim();
        c.nodes_.resize(static_cast<std::size_t>(degree + 1));
        for (int j = 0; j <= degree; ++j)
            c.nodes_[static_cast<std::size_t>(j)] = std::cos(M_PI * j / degree);
        std::size_t total = 1;
        for (int d = 0; d < dim; ++d) total *= static_cast<std::size_t>(degree + 1);
        c.values_.resize(total);
        std::vector<int> idx(static_cast<std::size_t>(dim), 0);
        for (std::size_t flat = 0; flat < total; ++flat) {
            Vec x(dim);
            std::size_t rem = flat;
            for (int d = 0; d < dim; ++d) {
                int j = static_cast<int>(rem % static_cast<std::size_t>(degree + 1));
                rem /= static_cast<std::size_t>(degree + 1);
                const auto& b = box.bounds()[static_cast<std::size_t>(d)];
                x[d] = 0.5 * (b[0] + b[1]) +
                       0.5 * (b[1] - b[0]) * c.nodes_[static_cast<std::size_t>(j)];
            }
            c.values_[flat] = f(x);
        }
        if (!c.values_.empty()) {
            c.rows_ = static_cast<int>(c.values_.front().rows());
            c.cols_ = static_cast<int>(c.values_.front().cols());
        }
        return c;
    }

    Mat eval(const Vec& x) const {
        const int dim = box_.dim();
        // Barycentric weights per axis: (-1)^j, halved at the ends.
        std::vector<std::vector<double>> factors(static_cast<std::size_t>(dim));
        std::vector<int> exact(static_cast<std::size_t>(dim), -1);
        for (int d = 0; d < dim; ++d) {
            const auto& b = box_.bounds()[static_cast<std::size_t>(d)];
            double u = (2.0 * x[d] - b[0] - b[1]) / (b[1] - b[0]);
            auto& fac = factors[static_cast<std::size_t>(d)];
            fac.resize(nodes_.size());
            double denom = 0.0;
            for (std::size_t j = 0; j < nodes_.size(); ++j) {
                double diff = u - nodes_[j];
                if (std::abs(diff) < 1e-14) {
                    exact[static_cast<std::size_t>(d)] = static_cast<int>(j);
                    break;
                }
                double w = (j == 0 || j + 1 == nodes_.size()) ? 0.5 : 1.0;
                if (j % 2 == 1) w = -w;
                fac[j] = w / diff;
                denom += fac[j];
            }
            if (exact[static_cast<std::size_t>(d)] < 0)
                for (auto& v : fac) v /= denom;
        }
        Mat out = Mat::Zero(rows_, cols_);
        std::size_t total = values_.size();
        for (std::size_t flat = 0; flat < total; ++flat) {
            double coeff = 1.0;
            std::size_t rem = flat;
            for (int d = 0; d < dim && coeff != 0.0; ++d) {
                int j = static_cast<int>(rem % nodes_.size());
                rem /= nodes_.size();
                int ex = exact[static_cast<std::size_t>(d)];
                if (ex >= 0)
                    coeff *= (j == ex) ? 1.0 : 0.0;
                else
                    coeff *= factors[static_cast<std::size_t>(d)][static_cast<std::size_t>(j)];
            }
            if (coeff != 0.0) out += coeff * values_[flat];
        }
        return out;
    }

    // Largest deviation against the exact map on seeded probe points.
    double probe_error(const std::function<Mat(const Vec&)>& f, int count,
                       std::uint64_t seed) const {
        auto pts = sample_box(box_, count, seed);
        double worst = 0.0;
        for (const auto& x : pts) worst = std::max(worst, max_abs(eval(x) - f(x)));
        return worst;
    }

private:
    ChartBox box_;
    int degree_{0};
    int rows_{0}, cols_{0};
    std::vector<double> nodes_;
    std::vector<Mat> values_;
};

} // namespace pnf
