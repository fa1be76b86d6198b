// Pointwise Dirac structures as explicit frames: columns of [A; C] span a
// Lagrangian subspace L of T_x M + T*_x M, with A the tangent block and C the
// cotangent block. Pullback and gauge become single matrix assemblies.
#pragma once

#include "pnf/fields.hpp"
#include "pnf/linalg.hpp"

namespace pnf {

// sigma_min([A; C]) / sigma_max below this means the frame is degenerate;
// sigma_min(C) / sigma_max([A; C]) below it means L is not a graph.
inline constexpr double kFrameRankThreshold = 1e-8;
inline constexpr double kIsotropyThreshold = 1e-10;

struct DiracFrame {
    Vec x;
    Mat A; // tangent block, n x n
    Mat C; // cotangent block, n x n

    int dim() const { return static_cast<int>(A.rows()); }

    Mat stacked() const {
        Mat s(2 * dim(), dim());
        s.topRows(dim()) = A;
        s.bottomRows(dim()) = C;
        return s;
    }

    // |A^T C + C^T A| relative to the squared frame scale.
    double isotropy_residual() const {
        double scale = std::max(1.0, max_abs(stacked()));
        return max_abs(A.transpose() * C + C.transpose() * A) / (scale * scale);
    }

    double rank_margin() const { return singular_values(stacked()).margin(); }

    void validate() const {
        require_finite(A, "Dirac tangent block");
        require_finite(C, "Dirac cotangent block");
        if (isotropy_residual() > 1e-12)
            throw NumericFailure("Dirac frame is not isotropic");
        if (rank_margin() < kFrameRankThreshold)
            throw NumericFailure("Dirac frame is rank deficient");
    }
};

// Graph of a bivector: L_pi = { pi#(xi) + xi : xi in T*M }.
inline DiracFrame dirac_graph(const Mat& pi, const Vec& x) {
    DiracFrame f;
    f.x = x;
    f.A = pi;
    f.C = Mat::Identity(pi.rows(), pi.cols());
    return f;
}

inline DiracFrame dirac_graph(const BivectorField& pi, const Vec& x) {
    return dirac_graph(pi.matrix(x), x);
}

// Pullback along a submersion p with derivative dp (rows = base dimension,
// columns = total dimension): spans { (v, dp^T xi) : (dp v, xi) in L }.
inline DiracFrame dirac_pullback(const DiracFrame& base, const Mat& dp, const Vec& z) {
    const int nb = static_cast<int>(dp.rows());
    const int nt = static_cast<int>(dp.cols());
    if (base.dim() != nb) throw Error("dirac_pullback: frame/derivative dimension mismatch");
    if (nb > 0) {
        SingularValues s = singular_values(dp);
        if (s.smallest() < kFrameRankThreshold * std::max(1.0, s.largest()))
            throw NotSubmersion("dp is row-rank deficient");
    }
    Mat dp_right_inverse = pseudo_inverse(dp);
    Mat kernel = null_space(dp); // nt x (nt - nb)
    DiracFrame out;
    out.x = z;
    out.A = Mat::Zero(nt, nt);
    out.C = Mat::Zero(nt, nt);
    out.A.leftCols(nb) = dp_right_inverse * base.A;
    out.C.leftCols(nb) = dp.transpose() * base.C;
    out.A.rightCols(nt - nb) = kernel;
    return out;
}

// Gauge transform by an antisymmetric B: X + xi -> X + xi + i_X B.
inline DiracFrame dirac_gauge(const DiracFrame& frame, const Mat& b) {
    if (antisymmetry_residual(b) > 1e-10 * std::max(1.0, max_abs(b)))
        throw Error("dirac_gauge: B must be antisymmetric");
    DiracFrame out = frame;
    out.C = frame.C + b * frame.A;
    return out;
}

// Inverse of dirac_graph where defined: A * C^{-1}, NotGraph when the
// cotangent block is singular relative to the frame scale.
inline Mat dirac_to_bivector(const DiracFrame& frame) {
    const int n = frame.dim();
    if (n == 0) return Mat(0, 0);
    double frame_scale = singular_values(frame.stacked()).largest();
    SingularValues c = singular_values(frame.C);
    if (frame_scale == 0.0 || c.smallest() / frame_scale < kFrameRankThreshold)
        throw NotGraph("cotangent block singular: Dirac structure is not Poisson here");
    Mat out = frame.A * frame.C.inverse();
    double res = antisymmetry_residual(out);
    if (res > 1e-10 * std::max(1.0, max_abs(out)))
        throw NumericFailure("graph bivector lost antisymmetry (residual " + std::to_string(res) + ")");
    return symmetrize_antisym(out);
}

} // namespace pnf
