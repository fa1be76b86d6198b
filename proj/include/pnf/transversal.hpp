// Poisson transversals: the EQ3 criterion [T | pi# N] invertible, the induced
// splitting pi|_X = pi_X + w_X, and smooth conormal frames giving coordinates
// (y, f) on N*X.
#pragma once

#include <algorithm>
#include <optional>
#include <vector>

#include "pnf/embedding.hpp"
#include "pnf/fields.hpp"
#include "pnf/linalg.hpp"

namespace pnf {

struct TransversalOptions {
    double rank_threshold = 1e-8;   // sigma_min / sigma_max for EQ3 and frames
    double mixed_tolerance = 1e-10; // pi(conormal, annihilator-of-NX) residual
    double fd_step = 1e-5;          // frame y-derivatives
};

// Embedding plus the data needed to produce smooth frames: the reference
// coframe columns are fixed once (greedy pivoting at the box center) and then
// projected and orthonormalized in that order at every parameter, which keeps
// y -> N(y) smooth on the box.
class TransversalData {
public:
    TransversalData() = default;
    TransversalData(Embedding emb, std::vector<int> frame_selection, TransversalOptions opt)
        : emb_(std::move(emb)), selection_(std::move(frame_selection)), opt_(opt) {}

    const Embedding& embedding() const { return emb_; }
    int param_dim() const { return emb_.param_dim(); }
    int ambient_dim() const { return emb_.ambient_dim(); }
    int conormal_dim() const { return ambient_dim() - param_dim(); }
    const TransversalOptions& options() const { return opt_; }

    Mat tangent_frame(const Vec& y) const { return emb_.dchi(y); }

    // Columns span the annihilator of d(chi): N^T T = 0, orthonormal columns.
    Mat conormal_frame(const Vec& y) const {
        const int n = ambient_dim();
        const int k = param_dim();
        if (k == 0) {
            Mat full(n, n);
            for (int c = 0; c < n; ++c) full.col(c) = Vec::Unit(n, selection_[static_cast<std::size_t>(c)]);
            return full;
        }
        Mat t = emb_.dchi(y);
        Mat proj = Mat::Identity(n, n) - t * (t.transpose() * t).inverse() * t.transpose();
        Mat frame(n, n - k);
        for (int c = 0; c < n - k; ++c) {
            Vec v = proj * Vec::Unit(n, selection_[static_cast<std::size_t>(c)]);
            for (int p = 0; p < c; ++p) v -= frame.col(p).dot(v) * frame.col(p);
            double norm = v.norm();
            if (norm < opt_.rank_threshold)
                throw FrameDegeneracy("reference coframe degenerates at a parameter; shrink the box");
            frame.col(c) = v / norm;
        }
        return frame;
    }

    // d/dy of y -> N(y) f at fixed fiber coefficients, by central differences.
    Mat conormal_frame_y_derivative(const Vec& y, const Vec& f, double h) const {
        const int k = param_dim();
        Mat d(ambient_dim(), k);
        for (int j = 0; j < k; ++j) {
            const auto& b = emb_.params().bounds()[static_cast<std::size_t>(j)];
            double hj = std::min({h, 0.5 * (y[j] - b[0]), 0.5 * (b[1] - y[j])});
            hj = std::max(hj, 1e-7);
            Vec yp = y, ym = y;
            yp[j] = std::min(y[j] + hj, b[1]);
            ym[j] = std::max(y[j] - hj, b[0]);
            d.col(j) = (conormal_frame(yp) * f - conormal_frame(ym) * f) / (yp[j] - ym[j]);
        }
        return d;
    }

private:
    Embedding emb_;
    std::vector<int> selection_;
    TransversalOptions opt_;
};

struct Splitting {
    Mat pi_X; // k x k, components in the parameter basis
    Mat w_X;  // (n-k) x (n-k), pi paired on the conormal frame
    double mixed_residual{0.0};
    double eq3_margin{0.0};
};

inline Splitting split_restriction(const BivectorField& pi, const TransversalData& td,
                                   const Vec& y) {
    const int n = td.ambient_dim();
    const int k = td.param_dim();
    Vec x = td.embedding().chi(y);
    Mat p = pi.matrix(x);
    Mat t = td.tangent_frame(y);
    Mat nf = td.conormal_frame(y);
    Mat basis(n, n);
    basis.leftCols(k) = t;
    basis.rightCols(n - k) = p * nf;
    SingularValues s = singular_values(basis);
    if (n > 0 && s.margin() < td.options().rank_threshold)
        throw NotTransversal("EQ3 fails: [T | pi# N] is singular",
                             std::vector<double>(y.data(), y.data() + y.size()), s.smallest());
    Splitting out;
    out.eq3_margin = s.margin();
    out.w_X = symmetrize_antisym(nf.transpose() * p * nf);
    if (n - k > 0) {
        SingularValues w = singular_values(out.w_X);
        if (w.margin() < td.options().rank_threshold)
            throw NotTransversal("conormal pairing w_X is degenerate",
                                 std::vector<double>(y.data(), y.data() + y.size()), w.smallest());
    }
    Mat inv = basis.inverse();
    Mat tilde = inv * p * inv.transpose();
    out.pi_X = symmetrize_antisym(tilde.topLeftCorner(k, k));
    out.mixed_residual = k > 0 && n - k > 0
                             ? max_abs(tilde.topRightCorner(k, n - k)) / std::max(1.0, max_abs(p))
                             : 0.0;
    return out;
}

// EQ3 at every sample; returns the frame machinery on success.
inline TransversalData check_transversal(const BivectorField& pi, const Embedding& emb,
                                         const std::vector<Vec>& params,
                                         const TransversalOptions& opt = {}) {
    const int n = emb.ambient_dim();
    const int k = emb.param_dim();
    if (pi.dim() != n) throw Error("bivector/embedding ambient dimension mismatch");
    emb.validate(pi.box(), params);

    // Fix the reference coframe selection at the box center by greedy
    // column-pivoted orthonormalization of the projected standard coframe.
    std::vector<int> selection;
    {
        Vec yc = emb.params().center();
        Mat proj = Mat::Identity(n, n);
        if (k > 0) {
            Mat t = emb.dchi(yc);
            proj -= t * (t.transpose() * t).inverse() * t.transpose();
        }
        Mat residual = proj;
        std::vector<bool> used(static_cast<std::size_t>(n), false);
        for (int c = 0; c < n - k; ++c) {
            int best = -1;
            double best_norm = -1.0;
            for (int i = 0; i < n; ++i) {
                if (used[static_cast<std::size_t>(i)]) continue;
                double nm = residual.col(i).norm();
                if (nm > best_norm) {
                    best_norm = nm;
                    best = i;
                }
            }
            if (best < 0 || best_norm < opt.rank_threshold)
                throw FrameDegeneracy("cannot seed a conormal frame from the standard coframe");
            used[static_cast<std::size_t>(best)] = true;
            selection.push_back(best);
            Vec q = residual.col(best) / best_norm;
            residual -= q * (q.transpose() * residual);
        }
        if (k == 0)
            for (int i = 0; i < n; ++i)
                if (std::find(selection.begin(), selection.end(), i) == selection.end())
                    selection.push_back(i);
    }

    TransversalData td(emb, std::move(selection), opt);
    for (const auto& y : params)
        split_restriction(pi, td, y); // throws NotTransversal with the parameter
    return td;
}

// Coordinates (y, f) on the conormal bundle: (x, xi) = (chi(y), N(y) f).
class ConormalChart {
public:
    ConormalChart() = default;
    ConormalChart(TransversalData td, double fiber_bound)
        : td_(std::move(td)), fiber_bound_(fiber_bound) {
        if (!(fiber_bound_ > 0.0)) throw ConfigError("fiber bound must be positive");
    }

    const TransversalData& transversal() const { return td_; }
    int param_dim() const { return td_.param_dim(); }
    int fiber_dim() const { return td_.conormal_dim(); }
    int dim() const { return td_.ambient_dim(); }
    double fiber_bound() const { return fiber_bound_; }

    bool contains(const Vec& y, const Vec& f) const {
        return td_.embedding().params().contains(y) && f.allFinite() && f.norm() <= fiber_bound_;
    }

    void require_inside(const Vec& y, const Vec& f) const {
        if (!contains(y, f)) throw OutOfDomain("point outside the conormal chart");
    }

    std::pair<Vec, Vec> to_cotangent(const Vec& y, const Vec& f) const {
        require_inside(y, f);
        return {td_.embedding().chi(y), td_.conormal_frame(y) * f};
    }

    // Derivative of (y, f) -> (x, xi), a 2n x n matrix.
    Mat jacobian(const Vec& y, const Vec& f) const {
        require_inside(y, f);
        const int n = dim();
        const int k = param_dim();
        Mat j = Mat::Zero(2 * n, n);
        j.topLeftCorner(n, k) = td_.tangent_frame(y);
        j.bottomLeftCorner(n, k) = td_.conormal_frame_y_derivative(y, f, td_.options().fd_step);
        j.bottomRightCorner(n, n - k) = td_.conormal_frame(y);
        return j;
    }

    // Inverse chart map for states on N*X: Newton on chi(y) = x, then read the
    // fiber coefficients off the orthonormal frame.
    std::pair<Vec, Vec> from_cotangent(const Vec& x, const Vec& xi) const {
        const int k = param_dim();
        Vec y = td_.embedding().params().center();
        for (int it = 0; it < 50 && k > 0; ++it) {
            Vec r = td_.embedding().chi(y) - x;
            if (r.norm() < 1e-13) break;
            Mat t = td_.tangent_frame(y);
            Vec step = pseudo_inverse(t) * r;
            y -= step;
            for (int j = 0; j < k; ++j) {
                const auto& b = td_.embedding().params().bounds()[static_cast<std::size_t>(j)];
                y[j] = std::clamp(y[j], b[0], b[1]);
            }
            if (step.norm() < 1e-15) break;
        }
        if ((td_.embedding().chi(y) - x).norm() > 1e-9 * std::max(1.0, x.norm()))
            throw OutOfDomain("point is not on the transversal image");
        Mat nf = td_.conormal_frame(y);
        Vec f = nf.transpose() * xi;
        if ((nf * f - xi).norm() > 1e-9 * std::max(1.0, xi.norm()))
            throw OutOfDomain("covector is not conormal at this point");
        return {y, f};
    }

private:
    TransversalData td_;
    double fiber_bound_{1.0};
};

inline ConormalChart conormal_chart(const TransversalData& td, double fiber_bound) {
    return ConormalChart(td, fiber_bound);
}

} // namespace pnf
