// Small dense linear-algebra helpers on top of Eigen: rank decisions with
// explicit thresholds, pseudo-inverses, null spaces, a matrix exponential,
// and a symplectic (Darboux) basis construction.
#pragma once

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "pnf/chart.hpp"
#include "pnf/errors.hpp"

namespace pnf {

inline double max_abs(const Mat& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

inline void require_finite(const Mat& m, const std::string& context) {
    if (!m.allFinite())
        throw NumericFailure("non-finite values in " + context);
}

inline double antisymmetry_residual(const Mat& m) { return max_abs(m + m.transpose()); }

inline Mat symmetrize_antisym(const Mat& m) { return 0.5 * (m - m.transpose()); }

struct SingularValues {
    Eigen::JacobiSVD<Mat> svd;
    double smallest() const {
        return svd.singularValues().size() ? svd.singularValues().tail(1)(0) : 0.0;
    }
    double largest() const {
        return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
    }
    // sigma_min / sigma_max; 0 for rank-deficient, 1 for perfectly conditioned.
    double margin() const {
        double l = largest();
        return l == 0.0 ? 0.0 : smallest() / l;
    }
};

inline SingularValues singular_values(const Mat& m) {
    SingularValues s;
    s.svd.compute(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return s;
}

inline int numeric_rank(const Mat& m, double rel_threshold = 1e-8) {
    if (m.size() == 0) return 0;
    Eigen::JacobiSVD<Mat> svd(m);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) == 0.0) return 0;
    int r = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > rel_threshold * sv(0)) ++r;
    return r;
}

inline Mat pseudo_inverse(const Mat& m, double rel_threshold = 1e-12) {
    if (m.size() == 0) return Mat(m.cols(), m.rows());
    Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    double cut = sv.size() ? rel_threshold * sv(0) : 0.0;
    Eigen::VectorXd inv(sv.size());
    for (int i = 0; i < sv.size(); ++i) inv(i) = sv(i) > cut ? 1.0 / sv(i) : 0.0;
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

// Orthonormal basis of ker(m), columns in deterministic SVD order.
inline Mat null_space(const Mat& m, double rel_threshold = 1e-8) {
    if (m.size() == 0) return Mat::Identity(m.cols(), m.cols());
    Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    double cut = sv.size() && sv(0) > 0.0 ? rel_threshold * sv(0) : 0.0;
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > cut) ++rank;
    return svd.matrixV().rightCols(m.cols() - rank);
}

// Solve with an explicit conditioning guard; Degenerate inputs surface as the
// caller-supplied error message rather than as silent garbage.
inline Mat guarded_inverse(const Mat& m, double margin_threshold, const std::string& what) {
    SingularValues s = singular_values(m);
    if (m.rows() == 0) return m;
    if (s.margin() < margin_threshold)
        throw SingularGauge(what + " (conditioning margin " + std::to_string(s.margin()) + ")");
    return m.inverse();
}

// Scaling-and-squaring Taylor exponential; adequate for the small generator
// matrices used by circle actions and test symplectomorphisms.
inline Mat expm(const Mat& a) {
    const int n = static_cast<int>(a.rows());
    double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
    int squarings = 0;
    Mat scaled = a;
    while (norm > 0.5) {
        norm *= 0.5;
        scaled *= 0.5;
        ++squarings;
    }
    Mat result = Mat::Identity(n, n);
    Mat term = Mat::Identity(n, n);
    for (int k = 1; k <= 24; ++k) {
        term = term * scaled / static_cast<double>(k);
        result += term;
        if (max_abs(term) < 1e-18 * std::max(1.0, max_abs(result))) break;
    }
    for (int s = 0; s < squarings; ++s) result = result * result;
    return result;
}

// Darboux basis of an invertible antisymmetric form S (2m x 2m): returns D
// with D^T S D = [[0, I], [-I, 0]] in (p, q) block order. Greedy symplectic
// Gram-Schmidt over the standard basis with deterministic pivoting.
inline Mat symplectic_basis(const Mat& form, double rel_threshold = 1e-10) {
    const int n = static_cast<int>(form.rows());
    if (n % 2 != 0)
        throw NotInvertible("symplectic basis of an odd-dimensional form");
    const int m = n / 2;
    double scale = std::max(1.0, max_abs(form));
    std::vector<Vec> pool;
    for (int i = 0; i < n; ++i) pool.push_back(Vec::Unit(n, i));
    std::vector<Vec> us, vs;
    for (int step = 0; step < m; ++step) {
        // Pick the pool vector with the largest pairing against the pool.
        int bi = -1, bj = -1;
        double best = -1.0;
        for (std::size_t i = 0; i < pool.size(); ++i)
            for (std::size_t j = 0; j < pool.size(); ++j) {
                double v = std::abs(pool[i].dot(form * pool[j]));
                if (v > best) {
                    best = v;
                    bi = static_cast<int>(i);
                    bj = static_cast<int>(j);
                }
            }
        if (best < rel_threshold * scale)
            throw NotInvertible("form is numerically degenerate");
        Vec u = pool[static_cast<std::size_t>(bi)];
        Vec v = pool[static_cast<std::size_t>(bj)] / u.dot(form * pool[static_cast<std::size_t>(bj)]);
        std::vector<Vec> reduced;
        for (std::size_t i = 0; i < pool.size(); ++i) {
            if (static_cast<int>(i) == bi || static_cast<int>(i) == bj) continue;
            Vec w = pool[i];
            w += v.dot(form * w) * u - u.dot(form * w) * v;
            reduced.push_back(std::move(w));
        }
        pool = std::move(reduced);
        us.push_back(std::move(u));
        vs.push_back(std::move(v));
    }
    Mat d(n, n);
    for (int i = 0; i < m; ++i) {
        d.col(i) = us[static_cast<std::size_t>(i)];
        d.col(m + i) = vs[static_cast<std::size_t>(i)];
    }
    return d;
}

} // namespace pnf
