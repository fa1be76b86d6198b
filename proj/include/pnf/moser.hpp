// Moser machinery: gauge paths pi_t = pi^{t d alpha}, the stabilizing flow,
// the fiberwise homotopy primitive, and extension independence of the local
// model.
//
// With the sharp and flat conventions fixed in fields.hpp, the field whose
// isotopy stabilizes the gauge path is V_t = +pi_t#(alpha); the verification
// identity is  dphi . pi_s(x) . dphi^T = pi_t(phi(x)).
#pragma once

#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "pnf/gauge.hpp"
#include "pnf/local_model.hpp"
#include "pnf/quadrature.hpp"

namespace pnf {

struct GaugePath {
    BivectorField pi;
    OneFormField alpha;

    // pi_t(x) = pi(x) gauged by t * d(alpha)(x); d(alpha) by exact jets.
    Mat eval(double t, const Vec& x) const {
        try {
            return gauge_bivector(pi.matrix(x), Mat(t * alpha.d(x)));
        } catch (const SingularGauge& e) {
            throw SingularGauge("gauge path leaves the Poisson locus at t = " + std::to_string(t) +
                                ": " + e.what());
        }
    }
};

struct MoserField {
    GaugePath path;

    // V_t = +pi_t#(alpha); vanishes wherever alpha vanishes.
    Vec eval(double t, const Vec& x) const { return path.eval(t, x) * path.alpha.value(x); }
};

struct MoserFlowResult {
    Vec x;
    Mat jacobian; // d(end)/d(start), central differences of the flow map
    int steps{0};
};

namespace detail {

inline Vec nonautonomous_rk4(const std::function<Vec(double, const Vec&)>& rhs,
                             const ChartBox* box, double s, double t, Vec x, int steps) {
    const double h = (t - s) / steps;
    double tau = s;
    for (int i = 0; i < steps; ++i) {
        if (box) box->require_inside(x);
        Vec k1 = rhs(tau, x);
        Vec k2 = rhs(tau + 0.5 * h, x + 0.5 * h * k1);
        Vec k3 = rhs(tau + 0.5 * h, x + 0.5 * h * k2);
        Vec k4 = rhs(tau + h, x + h * k3);
        x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        tau = s + (i + 1) * (t - s) / steps;
        if (!x.allFinite())
            throw NumericFailure("Moser trajectory became non-finite");
    }
    if (box) box->require_inside(x);
    return x;
}

} // namespace detail

// Flow of a time-dependent field from time s to time t. The trajectory is a
// numerically computed quantity, so its Jacobian comes from central
// differences of the end point (step fd_step), not from per-stage jets.
inline MoserFlowResult moser_flow(const std::function<Vec(double, const Vec&)>& rhs,
                                  const ChartBox* box, double s, double t, const Vec& x0,
                                  int steps, bool with_jacobian = true, double fd_step = 1e-5) {
    if (steps < 1) throw ConfigError("flow steps must be >= 1");
    MoserFlowResult out;
    try {
        out.x = detail::nonautonomous_rk4(rhs, box, s, t, x0, steps);
    } catch (const OutOfDomain&) {
        std::vector<double> loc(x0.data(), x0.data() + x0.size());
        throw DomainEscape("Moser flow left the chart", s, std::move(loc));
    }
    out.steps = steps;
    const int n = static_cast<int>(x0.size());
    if (with_jacobian) {
        out.jacobian.resize(n, n);
        for (int d = 0; d < n; ++d) {
            Vec xp = x0, xm = x0;
            xp[d] += fd_step;
            xm[d] -= fd_step;
            Vec ep = detail::nonautonomous_rk4(rhs, box, s, t, xp, steps);
            Vec em = detail::nonautonomous_rk4(rhs, box, s, t, xm, steps);
            out.jacobian.col(d) = (ep - em) / (2.0 * fd_step);
        }
    }
    return out;
}

inline MoserFlowResult moser_flow(const MoserField& field, const ChartBox& box, double s, double t,
                                  const Vec& x0, int steps, bool with_jacobian = true) {
    auto rhs = [&](double tau, const Vec& x) { return field.eval(tau, x); };
    return moser_flow(rhs, &box, s, t, x0, steps, with_jacobian);
}

// Fiberwise homotopy primitive on a (y, f) chart: for a closed 2-form Delta
// vanishing on TE|_X,
//   eta_(y,f)(v) = integral_0^1 Delta|_(y,tf)( (0,f), dm_t v ) dt,
// with m_t the fiber scaling. Then d(eta) = Delta, and eta vanishes to first
// order along f = 0.
inline Vec relative_primitive(const std::function<Mat(const Vec&)>& delta, int param_dim,
                              const Vec& z, int quad_order = 16,
                              double vanish_tol = 1e-8) {
    const int n = static_cast<int>(z.size());
    const int k = param_dim;
    Vec y = z.head(k), f = z.tail(n - k);
    {
        Vec z0(n);
        z0 << y, Vec::Zero(n - k);
        Mat at_x = delta(z0);
        if (max_abs(at_x) > vanish_tol * std::max(1.0, max_abs(delta(z))))
            throw NotVanishingOnX("Delta does not vanish on TE|_X (|Delta(y,0)| = " +
                                  std::to_string(max_abs(at_x)) + ")");
    }
    Quadrature q = gauss_legendre_01(quad_order);
    Vec eta = Vec::Zero(n);
    Vec u = Vec::Zero(n);
    u.tail(n - k) = f;
    for (std::size_t j = 0; j < q.nodes.size(); ++j) {
        double t = q.nodes[j];
        Vec zt(n);
        zt << y, Vec(t * f);
        Vec w = delta(zt).transpose() * u; // w_r = Delta(u, e_r)
        for (int r = 0; r < n; ++r)
            eta[r] += q.weights[j] * w[r] * (r < k ? 1.0 : t);
    }
    return eta;
}

struct ExtensionIndependenceOptions {
    int flow_steps = 32;
    int quad_order = 16;
    double tol = 1e-4;          // pushforward of pi(sigma_A) onto pi(sigma_B)
    double fix_tol = 1e-8;      // flow fixes f = 0
    double identity_tol = 1e-6; // differential at f = 0 is the identity
    double restriction_tol = 1e-8;
};

// Lemma-level check that two closed extensions of the same sigma give
// isomorphic local models via the Moser isotopy of eta = primitive(B - A).
inline CheckReport verify_extension_independence(const std::function<Mat(const Vec&)>& pi_x_at,
                                                 int param_dim, const ChartBox& joint_box,
                                                 const SigmaTilde& sig_a, const SigmaTilde& sig_b,
                                                 const std::vector<Vec>& samples,
                                                 const ExtensionIndependenceOptions& opt = {}) {
    const int n = joint_box.dim();
    const int k = param_dim;
    CheckReport rep;

    auto delta = [&](const Vec& z) {
        return Mat(sig_b.eval_packed(z, k) - sig_a.eval_packed(z, k));
    };
    auto model = [&](const SigmaTilde& sig, const Vec& z) {
        return local_model_bivector(pi_x_at(z.head(k)), sig.eval_packed(z, k), z);
    };
    auto pi_t = [&](double t, const Vec& z) {
        return gauge_bivector(model(sig_a, z), Mat(t * delta(z)));
    };
    auto rhs = [&](double t, const Vec& z) {
        return Vec(pi_t(t, z) * relative_primitive(delta, k, z, opt.quad_order));
    };

    // Both extensions restrict to the same sigma along X.
    double worst_restrict = 0.0;
    for (const auto& z : samples) {
        Vec z0(n);
        z0 << z.head(k), Vec::Zero(n - k);
        worst_restrict = std::max(worst_restrict, max_abs(delta(z0)));
    }
    rep.add("extensions_agree_on_X", worst_restrict, opt.restriction_tol);

    double worst_push = 0.0, worst_fix = 0.0, worst_id = 0.0, probed = 0.0;
    int idx = -1;
    for (const auto& z : samples) {
        ++idx;
        try {
            MoserFlowResult fl = moser_flow(rhs, &joint_box, 0.0, 1.0, z, opt.flow_steps);
            Mat pushed = fl.jacobian * model(sig_a, z) * fl.jacobian.transpose();
            double res = max_abs(pushed - model(sig_b, fl.x));
            worst_push = std::max(worst_push, res);
            rep.rows.push_back({idx, z, "extension_independence", res});
            probed = std::max(probed, z.tail(n - k).norm());

            Vec zx(n);
            zx << z.head(k), Vec::Zero(n - k);
            MoserFlowResult on_x = moser_flow(rhs, &joint_box, 0.0, 1.0, zx, opt.flow_steps);
            worst_fix = std::max(worst_fix, (on_x.x - zx).norm());
            worst_id = std::max(worst_id, max_abs(on_x.jacobian - Mat::Identity(n, n)));
        } catch (const Error& e) {
            rep.failures.push_back("sample " + std::to_string(idx) + ": " + e.what());
        }
    }
    rep.add("moser_pushforward", worst_push, opt.tol, probed);
    rep.add("flow_fixes_X", worst_fix, opt.fix_tol);
    rep.add("identity_differential_on_X", worst_id, opt.identity_tol);
    return rep;
}

// Stabilization of a gauge path under its Moser isotopy, checked for a set of
// (s, t) leg pairs.
inline CheckReport verify_stabilization(const GaugePath& path, const std::vector<Vec>& samples,
                                        const std::vector<std::pair<double, double>>& legs,
                                        int steps = 64, double tol = 1e-5) {
    CheckReport rep;
    MoserField field{path};
    double worst = 0.0;
    int idx = -1;
    for (const auto& x : samples) {
        ++idx;
        for (const auto& [s, t] : legs) {
            try {
                MoserFlowResult fl = moser_flow(field, path.pi.box(), s, t, x, steps);
                Mat lhs = fl.jacobian * path.eval(s, x) * fl.jacobian.transpose();
                double res = max_abs(lhs - path.eval(t, fl.x));
                worst = std::max(worst, res);
                rep.rows.push_back({idx, x, "stabilization", res});
            } catch (const Error& e) {
                rep.failures.push_back("sample " + std::to_string(idx) + ": " + e.what());
            }
        }
    }
    rep.add("moser_stabilization", worst, tol);
    return rep;
}

} // namespace pnf
