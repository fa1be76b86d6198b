// Scalar, bivector, 2-form and 1-form fields on a chart. Component functions
// are expression trees; first and second derivatives come from dual-number
// jets and are exact to machine precision.
//
// Index conventions, used consistently everywhere:
//   (pi# xi)^i = sum_j pi^{ij} xi_j          (sharp is the plain matrix product)
//   (B_flat X)_i = sum_j B_{ij} X^j          (flat likewise)
// so B_flat o pi# is the matrix product B * pi.
#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "pnf/chart.hpp"
#include "pnf/expression.hpp"
#include "pnf/linalg.hpp"

namespace pnf {

struct Jet {
    double value{0.0};
    Vec gradient;
    std::optional<Mat> hessian;
};

class ExpressionField {
public:
    ExpressionField() = default;
    ExpressionField(Expr e) : expr_(std::move(e)) {}
    static ExpressionField parse(const std::string& src) { return ExpressionField(Expr::parse(src)); }
    static ExpressionField constant(double v) { return ExpressionField(Expr::constant(v)); }

    const Expr& expr() const { return expr_; }
    const std::string& source() const { return expr_.source(); }

    double value(const Vec& x) const {
        std::vector<double> xs(x.data(), x.data() + x.size());
        double v = expr_.eval(std::span<const double>(xs));
        if (!std::isfinite(v))
            throw NumericFailure("non-finite expression value in '" + expr_.source() + "'");
        return v;
    }

    Jet jet(const Vec& x, int order) const {
        if (order != 1 && order != 2)
            throw Error("jet order must be 1 or 2");
        const int n = static_cast<int>(x.size());
        Jet out;
        out.gradient = Vec::Zero(n);
        if (order == 1) {
            std::vector<Dual1> xs(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i) xs[static_cast<std::size_t>(i)] = Dual1(x[i]);
            for (int i = 0; i < n; ++i) {
                xs[static_cast<std::size_t>(i)].dot = 1.0;
                Dual1 r = expr_.eval(std::span<const Dual1>(xs));
                xs[static_cast<std::size_t>(i)].dot = 0.0;
                out.value = r.val;
                out.gradient[i] = r.dot;
            }
            if (n == 0) out.value = value(x);
        } else {
            Mat h = Mat::Zero(n, n);
            std::vector<Dual2> xs(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i) xs[static_cast<std::size_t>(i)] = Dual2(Dual1(x[i]), Dual1(0.0));
            for (int i = 0; i < n; ++i) {
                for (int j = i; j < n; ++j) {
                    xs[static_cast<std::size_t>(i)].val.dot = 1.0; // inner seed: d/dx_i
                    xs[static_cast<std::size_t>(j)].dot.val = 1.0; // outer seed: d/dx_j
                    Dual2 r = expr_.eval(std::span<const Dual2>(xs));
                    xs[static_cast<std::size_t>(i)].val.dot = 0.0;
                    xs[static_cast<std::size_t>(j)].dot.val = 0.0;
                    out.value = r.val.val;
                    out.gradient[i] = r.val.dot;
                    h(i, j) = h(j, i) = r.dot.dot;
                }
            }
            if (n == 0) out.value = value(x);
            out.hessian = std::move(h);
        }
        if (!std::isfinite(out.value) || !out.gradient.allFinite() ||
            (out.hessian && !out.hessian->allFinite()))
            throw NumericFailure("non-finite jet of '" + expr_.source() + "'");
        return out;
    }

private:
    Expr expr_;
};

// Value + exact gradient + (order 2) exact Hessian at an interior chart point.
inline Jet eval_with_jet(const ExpressionField& f, const ChartBox& box, const Vec& x, int order) {
    box.require_inside(x);
    return f.jet(x, order);
}

// Antisymmetric bivector with only the strictly upper-triangular entries
// stored; pi^{ij} = pi(dx^i, dx^j).
class BivectorField {
public:
    BivectorField() = default;
    BivectorField(ChartBox box) : box_(std::move(box)) {}

    static BivectorField zero(ChartBox box) { return BivectorField(std::move(box)); }

    static BivectorField constant(ChartBox box, const Mat& m) {
        BivectorField f(std::move(box));
        for (int i = 0; i < m.rows(); ++i)
            for (int j = i + 1; j < m.cols(); ++j)
                if (m(i, j) != 0.0) f.set_entry(i, j, ExpressionField::constant(m(i, j)));
        return f;
    }

    const ChartBox& box() const { return box_; }
    int dim() const { return box_.dim(); }

    // 0-based indices, i < j required; the (j, i) entry is implied.
    void set_entry(int i, int j, ExpressionField f) {
        if (i < 0 || j <= i || j >= dim())
            throw ConfigError("bivector entries must have 0 <= i < j < n");
        if (f.expr().max_var() > dim())
            throw ConfigError("bivector entry '" + f.source() + "' references coordinates beyond the chart");
        entries_[{i, j}] = std::move(f);
    }

    const std::map<std::pair<int, int>, ExpressionField>& entries() const { return entries_; }

    Mat matrix(const Vec& x) const {
        box_.require_inside(x);
        Mat m = Mat::Zero(dim(), dim());
        for (const auto& [ij, f] : entries_) {
            double v = f.value(x);
            m(ij.first, ij.second) = v;
            m(ij.second, ij.first) = -v;
        }
        return m;
    }

    Vec sharp(const Vec& x, const Vec& xi) const {
        if (xi.size() != dim()) throw Error("covector dimension mismatch");
        return matrix(x) * xi;
    }

    // d/dx_l of the coefficient matrix, all directions at once.
    std::vector<Mat> matrix_gradient(const Vec& x) const {
        box_.require_inside(x);
        std::vector<Mat> grads(static_cast<std::size_t>(dim()), Mat::Zero(dim(), dim()));
        for (const auto& [ij, f] : entries_) {
            Jet jt = f.jet(x, 1);
            for (int l = 0; l < dim(); ++l) {
                grads[static_cast<std::size_t>(l)](ij.first, ij.second) = jt.gradient[l];
                grads[static_cast<std::size_t>(l)](ij.second, ij.first) = -jt.gradient[l];
            }
        }
        return grads;
    }

    // Jacobian in x of x -> pi(x) xi at fixed xi.
    Mat sharp_x_jacobian(const Vec& x, const Vec& xi) const {
        std::vector<Mat> grads = matrix_gradient(x);
        Mat out = Mat::Zero(dim(), dim());
        for (int l = 0; l < dim(); ++l) out.col(l) = grads[static_cast<std::size_t>(l)] * xi;
        return out;
    }

    bool poisson_certified = false;

private:
    ChartBox box_;
    std::map<std::pair<int, int>, ExpressionField> entries_;
};

struct Jacobiator {
    // Strictly increasing (i, j, k) components of
    //   J^{ijk} = sum_l ( pi^{il} d_l pi^{jk} + pi^{jl} d_l pi^{ki} + pi^{kl} d_l pi^{ij} ).
    std::vector<std::tuple<int, int, int, double>> components;
    double max_abs{0.0};
};

inline Jacobiator jacobiator(const BivectorField& pi, const Vec& x) {
    const int n = pi.dim();
    Mat m = pi.matrix(x);
    std::vector<Mat> d = pi.matrix_gradient(x);
    Jacobiator out;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            for (int k = j + 1; k < n; ++k) {
                double v = 0.0;
                for (int l = 0; l < n; ++l) {
                    const Mat& dl = d[static_cast<std::size_t>(l)];
                    v += m(i, l) * dl(j, k) + m(j, l) * dl(k, i) + m(k, l) * dl(i, j);
                }
                out.components.emplace_back(i, j, k, v);
                out.max_abs = std::max(out.max_abs, std::abs(v));
            }
    return out;
}

// Jacobiator of a pointwise matrix field whose derivatives are only available
// numerically (gauged fields, induced transversal structures). Central
// differences with the module-default step, relative residuals apply.
inline double jacobiator_fd(const std::function<Mat(const Vec&)>& field, const Vec& x,
                            double h = 1e-5) {
    const Mat m = field(x);
    const int n = static_cast<int>(m.rows());
    std::vector<Mat> d(static_cast<std::size_t>(n));
    for (int l = 0; l < n; ++l) {
        Vec xp = x, xm = x;
        xp[l] += h;
        xm[l] -= h;
        d[static_cast<std::size_t>(l)] = (field(xp) - field(xm)) / (2.0 * h);
    }
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            for (int k = j + 1; k < n; ++k) {
                double v = 0.0;
                for (int l = 0; l < n; ++l) {
                    const Mat& dl = d[static_cast<std::size_t>(l)];
                    v += m(i, l) * dl(j, k) + m(j, l) * dl(k, i) + m(k, l) * dl(i, j);
                }
                worst = std::max(worst, std::abs(v));
            }
    return worst;
}

// Antisymmetric 2-form, B_{ij} = B(d_i, d_j), strictly upper entries stored.
class TwoFormField {
public:
    TwoFormField() = default;
    TwoFormField(ChartBox box) : box_(std::move(box)) {}

    static TwoFormField constant(ChartBox box, const Mat& m) {
        TwoFormField f(std::move(box));
        for (int i = 0; i < m.rows(); ++i)
            for (int j = i + 1; j < m.cols(); ++j)
                if (m(i, j) != 0.0) f.set_entry(i, j, ExpressionField::constant(m(i, j)));
        return f;
    }

    const ChartBox& box() const { return box_; }
    int dim() const { return box_.dim(); }

    void set_entry(int i, int j, ExpressionField f) {
        if (i < 0 || j <= i || j >= dim())
            throw ConfigError("2-form entries must have 0 <= i < j < n");
        entries_[{i, j}] = std::move(f);
    }

    Mat matrix(const Vec& x) const {
        box_.require_inside(x);
        Mat m = Mat::Zero(dim(), dim());
        for (const auto& [ij, f] : entries_) {
            double v = f.value(x);
            m(ij.first, ij.second) = v;
            m(ij.second, ij.first) = -v;
        }
        return m;
    }

    bool closed_flagged = false;

private:
    ChartBox box_;
    std::map<std::pair<int, int>, ExpressionField> entries_;
};

class OneFormField {
public:
    OneFormField() = default;
    OneFormField(ChartBox box, std::vector<ExpressionField> components)
        : box_(std::move(box)), components_(std::move(components)) {
        if (static_cast<int>(components_.size()) != box_.dim())
            throw ConfigError("1-form needs one component per coordinate");
    }

    static OneFormField zero(ChartBox box) {
        std::vector<ExpressionField> c(static_cast<std::size_t>(box.dim()),
                                       ExpressionField::constant(0.0));
        return OneFormField(std::move(box), std::move(c));
    }

    const ChartBox& box() const { return box_; }
    int dim() const { return box_.dim(); }

    Vec value(const Vec& x) const {
        box_.require_inside(x);
        Vec v(dim());
        for (int i = 0; i < dim(); ++i) v[i] = components_[static_cast<std::size_t>(i)].value(x);
        return v;
    }

    // Exterior derivative by exact jets: (d alpha)_{ij} = d_i alpha_j - d_j alpha_i.
    Mat d(const Vec& x) const {
        box_.require_inside(x);
        const int n = dim();
        Mat grads(n, n); // grads(i, j) = d_i alpha_j
        for (int j = 0; j < n; ++j)
            grads.col(j) = components_[static_cast<std::size_t>(j)].jet(x, 1).gradient;
        return grads - grads.transpose();
    }

private:
    ChartBox box_;
    std::vector<ExpressionField> components_;
};

} // namespace pnf
