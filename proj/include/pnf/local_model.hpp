// The local model around a Poisson transversal: closed extensions sigma-tilde
// on the conormal chart, the gauged-pullback bivector pi(sigma-tilde), and the
// normal-form verification exp: (N*X, pi(sigma-tilde)) -> (M, pi).
#pragma once

#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "pnf/chebyshev.hpp"
#include "pnf/dirac.hpp"
#include "pnf/ext_derivative.hpp"
#include "pnf/realization.hpp"
#include "pnf/transversal.hpp"

namespace pnf {

// A 2-form on the (y, f) chart, the candidate closed extension.
class SigmaTilde {
public:
    virtual ~SigmaTilde() = default;
    virtual Mat eval(const Vec& y, const Vec& f) const = 0;
    Mat eval_packed(const Vec& z, int k) const { return eval(z.head(k), z.tail(z.size() - k)); }
};

// The spray-induced extension sigma = -Omega restricted to N*X, evaluated as
// -J_inc^T Omega(inc(y, f)) J_inc.
class SpraySigmaTilde final : public SigmaTilde {
public:
    SpraySigmaTilde(std::shared_ptr<const SprayModel> spray, CotangentChart flow_chart,
                    ConormalChart cc, OmegaOptions opt = {})
        : spray_(std::move(spray)), flow_chart_(std::move(flow_chart)), cc_(std::move(cc)),
          opt_(opt) {}

    Mat eval(const Vec& y, const Vec& f) const override {
        auto [x, xi] = cc_.to_cotangent(y, f);
        Mat omega = omega_spray(*spray_, flow_chart_, x, xi, opt_);
        Mat j = cc_.jacobian(y, f);
        return symmetrize_antisym(-(j.transpose() * omega * j));
    }

    const ConormalChart& chart() const { return cc_; }

private:
    std::shared_ptr<const SprayModel> spray_;
    CotangentChart flow_chart_;
    ConormalChart cc_;
    OmegaOptions opt_;
};

// Closed extension with f-independent fiber block: the exact differential of
// the fiberwise primitive (1/2) sigma_ab(y) f_a df_b, where sigma(y) = -w_X(y).
// Its (f, f) block is sigma(y); the (y, f) cross block is the unique term that
// keeps the form exactly closed when sigma varies over X.
class PrimitiveExtensionSigmaTilde final : public SigmaTilde {
public:
    PrimitiveExtensionSigmaTilde(std::function<Mat(const Vec&)> sigma_on_x, int param_dim,
                                 const ChartBox& param_box, double fd_step = 1e-5)
        : sigma_(std::move(sigma_on_x)), k_(param_dim), box_(param_box), h_(fd_step) {}

    Mat eval(const Vec& y, const Vec& f) const override {
        const int m = static_cast<int>(f.size());
        Mat out = Mat::Zero(k_ + m, k_ + m);
        Mat sig = sigma_(y);
        out.bottomRightCorner(m, m) = sig;
        for (int j = 0; j < k_; ++j) {
            const auto& b = box_.bounds()[static_cast<std::size_t>(j)];
            double hj = std::max(std::min({h_, 0.5 * (y[j] - b[0]), 0.5 * (b[1] - y[j])}), 1e-7);
            Vec yp = y, ym = y;
            yp[j] = std::min(y[j] + hj, b[1]);
            ym[j] = std::max(y[j] - hj, b[0]);
            Mat dsig = (sigma_(yp) - sigma_(ym)) / (yp[j] - ym[j]);
            for (int col = 0; col < m; ++col) {
                double g = 0.5 * f.dot(dsig.col(col));
                out(j, k_ + col) = g;
                out(k_ + col, j) = -g;
            }
        }
        return out;
    }

private:
    std::function<Mat(const Vec&)> sigma_;
    int k_{0};
    ChartBox box_;
    double h_{1e-5};
};

// Constant 2-form on the whole chart (the product-model target pr1*(omega_x)).
class ConstantSigmaTilde final : public SigmaTilde {
public:
    explicit ConstantSigmaTilde(Mat value) : value_(std::move(value)) {}
    Mat eval(const Vec&, const Vec&) const override { return value_; }

private:
    Mat value_;
};

// Chebyshev proxy wrapping an expensive extension. The fit error is probed on
// seeded points and carried along so reports can state what the proxy costs.
class ChebyshevSigmaTilde final : public SigmaTilde {
public:
    ChebyshevSigmaTilde(const SigmaTilde& inner, const ChartBox& param_box, double fiber_bound,
                        int fiber_dim, int degree, int probe_count = 20,
                        std::uint64_t probe_seed = 1234) {
        k_ = param_box.dim();
        std::vector<std::array<double, 2>> bounds = param_box.bounds();
        for (int a = 0; a < fiber_dim; ++a) bounds.push_back({-fiber_bound, fiber_bound});
        ChartBox joint(std::move(bounds), "sigma-proxy");
        auto f = [&](const Vec& z) { return inner.eval_packed(z, k_); };
        interp_ = ChebyshevInterpolant::fit(f, joint, degree);
        probe_error_ = interp_.probe_error(f, probe_count, probe_seed);
    }

    Mat eval(const Vec& y, const Vec& f) const override {
        Vec z(y.size() + f.size());
        z << y, f;
        return interp_.eval(z);
    }

    double probe_error() const { return probe_error_; }

private:
    ChebyshevInterpolant interp_;
    int k_{0};
    double probe_error_{0.0};
};

// pi(sigma-tilde) at a chart point: pull the graph of pi_X back along the
// bundle projection, gauge by sigma-tilde, read the bivector off the frame.
// NotGraph marks points outside U(sigma-tilde).
inline Mat local_model_bivector(const Mat& pi_x, const Mat& sigma, const Vec& z) {
    const int n = static_cast<int>(sigma.rows());
    const int k = static_cast<int>(pi_x.rows());
    Mat dp = Mat::Zero(k, n);
    dp.leftCols(k) = Mat::Identity(k, k);
    DiracFrame base = dirac_graph(pi_x, z.head(k));
    DiracFrame pulled = dirac_pullback(base, dp, z);
    DiracFrame gauged = dirac_gauge(pulled, sigma);
    return dirac_to_bivector(gauged);
}

struct NormalFormOptions {
    int steps = 64;
    int quadrature = 16;
    double tol = 1e-4;          // pushforward residual
    double identity_tol = 1e-10; // exp restricted to X
};

// Theorem-level check: exp o inc pushes pi(sigma-tilde) to pi, and restricts
// to the identity along X.
inline CheckReport verify_normal_form(const BivectorField& pi, const TransversalData& td,
                                      const ConormalChart& cc, const SprayModel& spray,
                                      const CotangentChart& flow_chart, const SigmaTilde& sigma,
                                      const std::vector<std::pair<Vec, Vec>>& samples,
                                      const NormalFormOptions& opt = {}) {
    const int n = td.ambient_dim();
    CheckReport rep;
    double worst = 0.0, worst_id = 0.0, probed = 0.0;
    int idx = -1;
    for (const auto& [y, f] : samples) {
        ++idx;
        try {
            Splitting split = split_restriction(pi, td, y);
            Mat sig = sigma.eval(y, f);
            Vec z(n);
            z << y, f;
            Mat model = local_model_bivector(split.pi_X, sig, z);

            auto [x, xi] = cc.to_cotangent(y, f);
            FlowResult fl = geodesic_flow(spray, flow_chart, x, xi, 1.0, opt.steps);
            Mat dexp_amb = fl.jacobian.topRows(n);   // n x 2n
            Mat a = dexp_amb * cc.jacobian(y, f);    // n x n
            double res = max_abs(a * model * a.transpose() - pi.matrix(fl.x));
            worst = std::max(worst, res);
            Vec state(2 * n);
            state << y, f;
            rep.rows.push_back({idx, state, "normal_form", res});
            if (f.norm() == 0.0)
                worst_id = std::max(worst_id, (fl.x - td.embedding().chi(y)).norm());
            probed = std::max(probed, f.norm());
        } catch (const DomainEscape& e) {
            rep.failures.push_back("sample " + std::to_string(idx) + ": " + e.what());
        } catch (const NotGraph& e) {
            rep.failures.push_back("sample " + std::to_string(idx) + ": " + e.what());
        }
    }
    rep.add("normal_form_pushforward", worst, opt.tol, probed);
    rep.add("exp_identity_on_X", worst_id, opt.identity_tol);
    return rep;
}

struct PullbackTransversalOptions {
    double poisson_tol = 1e-8;   // phi is verified Poisson at samples
    double rank_threshold = 1e-8;
    double induced_tol = 1e-6;   // induced map between transversals is Poisson
};

// Poisson maps pull Poisson transversals back: phi is transverse to X2, the
// preimage satisfies EQ3 for pi1, and phi restricts to a Poisson map between
// the induced structures. Samples are source points on (or near) the preimage.
inline CheckReport check_pullback_transversal(const std::vector<ExpressionField>& phi,
                                              const ChartBox& source_box,
                                              const std::function<Mat(const Vec&)>& pi1,
                                              const BivectorField& pi2, const TransversalData& td2,
                                              const std::vector<Vec>& samples,
                                              const PullbackTransversalOptions& opt = {}) {
    const int n1 = source_box.dim();
    const int n2 = pi2.dim();
    if (static_cast<int>(phi.size()) != n2)
        throw ConfigError("phi needs one component per target coordinate");
    CheckReport rep;
    double worst_poisson = 0.0, worst_induced = 0.0;
    double worst_trans_margin = 1.0, worst_eq3_margin = 1.0;
    int idx = -1;
    for (const auto& zraw : samples) {
        ++idx;
        source_box.require_inside(zraw);
        Mat dphi(n2, n1);
        Vec image(n2);
        for (int i = 0; i < n2; ++i) {
            Jet j = phi[static_cast<std::size_t>(i)].jet(zraw, 1);
            image[i] = j.value;
            dphi.row(i) = j.gradient.transpose();
        }
        Mat p1 = pi1(zraw);
        double pres = max_abs(dphi * p1 * dphi.transpose() - pi2.matrix(image));
        worst_poisson = std::max(worst_poisson, pres);
        if (pres > opt.poisson_tol) {
            rep.failures.push_back("sample " + std::to_string(idx) +
                                   ": phi is not Poisson here (residual " + std::to_string(pres) +
                                   ")");
            continue;
        }

        // Transversality of phi to X2 at the image point.
        Vec y2 = td2.param_dim() > 0
                     ? ConormalChart(td2, 1.0).from_cotangent(image, Vec::Zero(n2)).first
                     : Vec(0);
        Mat t2 = td2.tangent_frame(y2);
        Mat joint(n2, n1 + t2.cols());
        joint.leftCols(n1) = dphi;
        joint.rightCols(t2.cols()) = t2;
        SingularValues sj = singular_values(joint);
        double margin = sj.smallest() / std::max(1e-300, sj.largest());
        worst_trans_margin = std::min(worst_trans_margin, margin);

        // Preimage tangent = ker(N2^T dphi); conormal of X1 = dphi^T N2.
        Mat n2f = td2.conormal_frame(y2);
        Mat t1 = null_space(Mat(n2f.transpose() * dphi), opt.rank_threshold);
        Mat conormal1 = dphi.transpose() * n2f;
        Mat eq3(n1, t1.cols() + conormal1.cols());
        eq3.leftCols(t1.cols()) = t1;
        eq3.rightCols(conormal1.cols()) = p1 * conormal1;
        SingularValues se = singular_values(eq3);
        double eq3_margin = se.smallest() / std::max(1e-300, se.largest());
        worst_eq3_margin = std::min(worst_eq3_margin, eq3_margin);

        // Induced map between the transversal structures is Poisson.
        if (t1.cols() > 0 && eq3.rows() == eq3.cols() && eq3_margin > opt.rank_threshold) {
            Mat basis1 = eq3;
            Mat tilde = basis1.inverse() * p1 * basis1.inverse().transpose();
            Mat pi_x1 = tilde.topLeftCorner(t1.cols(), t1.cols());
            Splitting s2 = split_restriction(pi2, td2, y2);
            Mat dbar = pseudo_inverse(t2) * dphi * t1;
            double ind = max_abs(dbar * pi_x1 * dbar.transpose() - s2.pi_X);
            worst_induced = std::max(worst_induced, ind);
        }
        Vec state = zraw;
        rep.rows.push_back({idx, state, "pullback_transversality_margin", margin});
    }
    rep.add("poisson_map", worst_poisson, opt.poisson_tol);
    rep.add("transversality_margin",
            std::max(0.0, opt.rank_threshold - worst_trans_margin), 0.0, std::nullopt,
            "min margin " + std::to_string(worst_trans_margin));
    rep.add("preimage_eq3_margin", std::max(0.0, opt.rank_threshold - worst_eq3_margin), 0.0,
            std::nullopt, "min margin " + std::to_string(worst_eq3_margin));
    rep.add("induced_map_poisson", worst_induced, opt.induced_tol);
    return rep;
}

} // namespace pnf
