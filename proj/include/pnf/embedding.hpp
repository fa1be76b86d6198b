// Parametrized submanifolds: chi maps a k-dimensional parameter box into an
// n-dimensional ambient chart, with exact-jet access to d(chi).
#pragma once

#include <vector>

#include "pnf/fields.hpp"

namespace pnf {

class Embedding {
public:
    Embedding() = default;
    Embedding(ChartBox params, std::vector<ExpressionField> components, int ambient_dim)
        : params_(std::move(params)), components_(std::move(components)), ambient_(ambient_dim) {
        if (static_cast<int>(components_.size()) != ambient_)
            throw ConfigError("embedding needs one component per ambient coordinate");
        for (const auto& c : components_)
            if (c.expr().max_var() > params_.dim())
                throw ConfigError("embedding component '" + c.source() +
                                  "' references coordinates beyond the parameter box");
        if (params_.dim() > ambient_)
            throw ConfigError("embedding parameter dimension exceeds ambient dimension");
    }

    // Affine slice y -> base + Q y; Q columns give the tangent directions.
    static Embedding affine(ChartBox params, const Vec& base, const Mat& q) {
        const int n = static_cast<int>(base.size());
        std::vector<ExpressionField> comp;
        comp.reserve(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            std::string src = std::to_string(base[i]);
            for (int j = 0; j < q.cols(); ++j) {
                if (q(i, j) == 0.0) continue;
                src += " + (" + std::to_string(q(i, j)) + ") * x" + std::to_string(j + 1);
            }
            comp.push_back(ExpressionField::parse(src));
        }
        return Embedding(std::move(params), std::move(comp), n);
    }

    const ChartBox& params() const { return params_; }
    int param_dim() const { return params_.dim(); }
    int ambient_dim() const { return ambient_; }

    Vec chi(const Vec& y) const {
        params_.require_inside(y);
        Vec x(ambient_);
        for (int i = 0; i < ambient_; ++i)
            x[i] = components_[static_cast<std::size_t>(i)].value(y);
        return x;
    }

    Mat dchi(const Vec& y) const {
        params_.require_inside(y);
        Mat d(ambient_, params_.dim());
        for (int i = 0; i < ambient_; ++i)
            d.row(i) = components_[static_cast<std::size_t>(i)].jet(y, 1).gradient.transpose();
        return d;
    }

    // Immersion rank and image containment at the given parameters.
    void validate(const ChartBox& ambient_box, const std::vector<Vec>& samples) const {
        for (const auto& y : samples) {
            if (param_dim() > 0) {
                SingularValues s = singular_values(dchi(y));
                if (s.smallest() <= 1e-8 * std::max(1.0, s.largest()))
                    throw NotImmersion("d(chi) rank deficient at a sampled parameter");
            }
            if (!ambient_box.contains(chi(y)))
                throw OutOfDomain("embedding image leaves the ambient chart");
        }
    }

private:
    ChartBox params_;
    std::vector<ExpressionField> components_;
    int ambient_{0};
};

} // namespace pnf
