// The averaged symplectic form of a Poisson spray and its verification as a
// symplectic realization / self-dual pair.
//
// Omega(z) = integral over [0,1] of the pullback of omega_can under the
// geodesic flow, assembled per Gauss-Legendre node as J(t)^T W J(t) with J the
// exact discrete flow Jacobian. W is the coordinate matrix of omega_can; its
// orientation is pinned by requiring dp . Omega^{-1} . dp^T = pi, which makes
// the zero-section block formula come out as [[0, -I], [I, pi]].
#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pnf/ext_derivative.hpp"
#include "pnf/quadrature.hpp"
#include "pnf/spray.hpp"

namespace pnf {

inline Mat canonical_omega_matrix(int n) {
    Mat w = Mat::Zero(2 * n, 2 * n);
    w.topRightCorner(n, n) = -Mat::Identity(n, n);
    w.bottomLeftCorner(n, n) = Mat::Identity(n, n);
    return w;
}

// The closed form of Omega along the zero section: omega_can plus the pi-block
// pairing fiber directions, [[0, -I], [I, pi(x)]].
inline Mat zero_section_omega(const Mat& pi) {
    const int n = static_cast<int>(pi.rows());
    Mat w = canonical_omega_matrix(n);
    w.bottomRightCorner(n, n) = pi;
    return w;
}

struct OmegaOptions {
    int steps = 64;
    int quadrature = 16;
};

inline Mat omega_spray(const SprayModel& s, const CotangentChart& chart, const Vec& x,
                       const Vec& xi, const OmegaOptions& opt = {}) {
    const int n = s.dim();
    Quadrature q = gauss_legendre_01(opt.quadrature);
    auto flows = geodesic_flow_checkpoints(s, chart, x, xi, q.nodes, opt.steps);
    Mat w = canonical_omega_matrix(n);
    Mat omega = Mat::Zero(2 * n, 2 * n);
    for (std::size_t k = 0; k < flows.size(); ++k) {
        const Mat& j = flows[k].jacobian;
        omega += q.weights[k] * (j.transpose() * w * j);
    }
    require_finite(omega, "averaged symplectic form");
    return symmetrize_antisym(omega);
}

// One record per verified property; checks aggregate these into reports.
struct CheckRecord {
    std::string name;
    double residual{0.0};
    double tolerance{0.0};
    bool pass{false};
    std::optional<double> probed_radius;
    std::string note;
};

struct SampleRow {
    int index{0};
    Vec state;
    std::string kind;
    double value{0.0};
};

struct CheckReport {
    std::vector<CheckRecord> records;
    std::vector<SampleRow> rows;
    std::vector<std::string> failures; // per-sample errors, collected not thrown

    bool pass() const {
        for (const auto& r : records)
            if (!r.pass) return false;
        return true;
    }

    void add(const std::string& name, double residual, double tol,
             std::optional<double> radius = std::nullopt, std::string note = {}) {
        records.push_back({name, residual, tol, residual <= tol, radius, std::move(note)});
    }
};

struct RealizationOptions {
    int steps = 64;
    int quadrature = 16;
    double tol = 1e-5;        // pushforward identity
    double tol_d = 1e-4;      // numeric closedness
    double fd_step = 1e-5;    // step for the closedness stencil
    bool check_closedness = true;
};

namespace detail {

inline Vec stack_state(const Vec& x, const Vec& xi) {
    Vec z(x.size() + xi.size());
    z << x, xi;
    return z;
}

} // namespace detail

// Theorem-level check: Omega is antisymmetric, invertible, closed, and
// p: (Sigma, Omega) -> (M, pi) pushes Omega^{-1} to pi.
inline CheckReport check_realization(const SprayModel& s, const CotangentChart& chart,
                                     const BivectorField& pi,
                                     const std::vector<std::pair<Vec, Vec>>& samples,
                                     const RealizationOptions& opt = {}) {
    const int n = s.dim();
    CheckReport rep;
    double worst_antisym = 0.0, worst_closed = 0.0, worst_push = 0.0;
    double worst_margin = 1.0, probed = 0.0;
    OmegaOptions oopt{opt.steps, opt.quadrature};
    auto omega_at = [&](const Vec& z) {
        return omega_spray(s, chart, z.head(n), z.tail(n), oopt);
    };
    int idx = -1;
    for (const auto& [x, xi] : samples) {
        ++idx;
        try {
            Mat omega = omega_spray(s, chart, x, xi, oopt);
            double scale = std::max(1.0, max_abs(omega));
            worst_antisym = std::max(worst_antisym, antisymmetry_residual(omega) / scale);
            worst_margin = std::min(worst_margin, singular_values(omega).margin());
            Mat inv = omega.inverse();
            Mat push = inv.topLeftCorner(n, n);
            double res = max_abs(push - pi.matrix(x));
            worst_push = std::max(worst_push, res);
            rep.rows.push_back({idx, detail::stack_state(x, xi), "pushforward", res});
            if (opt.check_closedness) {
                Vec z = detail::stack_state(x, xi);
                ThreeForm d = exterior_derivative_numeric(omega_at, z, opt.fd_step);
                worst_closed = std::max(worst_closed, d.max_abs);
                rep.rows.push_back({idx, z, "closedness", d.max_abs});
            }
            probed = std::max(probed, xi.norm());
        } catch (const DomainEscape& e) {
            rep.failures.push_back("sample " + std::to_string(idx) + ": " + e.what());
        }
    }
    rep.add("omega_antisymmetry", worst_antisym, 1e-10, probed);
    rep.add("omega_invertibility", std::max(0.0, 1e-8 - worst_margin), 0.0, probed,
            "min conditioning margin " + std::to_string(worst_margin));
    if (opt.check_closedness) rep.add("omega_closedness", worst_closed, opt.tol_d, probed);
    rep.add("realization_pushforward", worst_push, opt.tol, probed);
    return rep;
}

struct DualPairOptions {
    int steps = 64;
    int quadrature = 16;
    double tol = 1e-5;         // exp-leg pushforward
    double tol_orth = 1e-6;    // fiber orthogonality
};

// Self-dual pair: (M, pi) <-p- (Sigma, Omega) -exp-> (M, -pi); the exp leg
// pushes Omega^{-1} to -pi and the p/exp fibers are Omega-orthogonal.
inline CheckReport check_self_dual_pair(const SprayModel& s, const CotangentChart& chart,
                                        const BivectorField& pi,
                                        const std::vector<std::pair<Vec, Vec>>& samples,
                                        const DualPairOptions& opt = {}) {
    const int n = s.dim();
    CheckReport rep;
    double worst_push = 0.0, worst_orth = 0.0, probed = 0.0;
    OmegaOptions oopt{opt.steps, opt.quadrature};
    int idx = -1;
    for (const auto& [x, xi] : samples) {
        ++idx;
        try {
            Mat omega = omega_spray(s, chart, x, xi, oopt);
            FlowResult fl = geodesic_flow(s, chart, x, xi, 1.0, opt.steps);
            Mat dexp = fl.jacobian.topRows(n); // d(p o phi^1), n x 2n
            Mat inv = omega.inverse();
            Mat push = dexp * inv * dexp.transpose();
            double res = max_abs(push + pi.matrix(fl.x));
            worst_push = std::max(worst_push, res);
            rep.rows.push_back({idx, detail::stack_state(x, xi), "dual_pushforward", res});

            // ker dp = vertical directions; ker d(exp) from the SVD.
            Mat ker_p = Mat::Zero(2 * n, n);
            ker_p.bottomRows(n) = Mat::Identity(n, n);
            Mat ker_e = null_space(dexp);
            double scale = std::max(1e-30, max_abs(omega));
            double orth = 0.0;
            Mat pairing = ker_p.transpose() * omega * ker_e;
            for (int i = 0; i < pairing.rows(); ++i)
                for (int j = 0; j < pairing.cols(); ++j)
                    orth = std::max(orth, std::abs(pairing(i, j)) / scale);
            worst_orth = std::max(worst_orth, orth);
            rep.rows.push_back({idx, detail::stack_state(x, xi), "fiber_orthogonality", orth});
            probed = std::max(probed, xi.norm());
        } catch (const DomainEscape& e) {
            rep.failures.push_back("sample " + std::to_string(idx) + ": " + e.what());
        }
    }
    rep.add("dual_pair_pushforward", worst_push, opt.tol, probed);
    rep.add("fiber_orthogonality", worst_orth, opt.tol_orth, probed);
    return rep;
}

// Residual of the zero-section block formula at base points.
inline double zero_section_residual(const SprayModel& s, const CotangentChart& chart,
                                    const BivectorField& pi, const std::vector<Vec>& base_points,
                                    const OmegaOptions& opt = {}) {
    const int n = s.dim();
    double worst = 0.0;
    for (const auto& x : base_points) {
        Mat omega = omega_spray(s, chart, x, Vec::Zero(n), opt);
        worst = std::max(worst, max_abs(omega - zero_section_omega(pi.matrix(x))));
    }
    return worst;
}

} // namespace pnf
