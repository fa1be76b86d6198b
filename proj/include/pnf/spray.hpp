// Poisson sprays on the cotangent chart and their geodesic flow. The flow
// integrator is a fixed-step classical 4th-order scheme; Jacobians are
// propagated by the variational equation chained through the same stages, so
// they are the exact derivatives of the discrete flow map (no finite
// differencing, no noise floor).
#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "pnf/fields.hpp"
#include "pnf/linalg.hpp"

namespace pnf {

struct CotangentChart {
    ChartBox base;
    double rho_max{1.0}; // covector norm cap

    CotangentChart() = default;
    CotangentChart(ChartBox b, double rho) : base(std::move(b)), rho_max(rho) {
        if (!(rho_max > 0.0)) throw ConfigError("fiber radius must be positive");
    }

    int base_dim() const { return base.dim(); }

    bool contains(const Vec& x, const Vec& xi) const {
        return base.contains(x) && xi.allFinite() && xi.norm() <= rho_max;
    }
};

// A spray is a vector field (dx, dxi) on T*M with base component pi#(xi)
// (projection axiom) and fiber-degree-2 vertical component (homogeneity).
class SprayModel {
public:
    virtual ~SprayModel() = default;
    virtual int dim() const = 0;
    virtual void value(const Vec& x, const Vec& xi, Vec& dx, Vec& dxi) const = 0;
    // Derivative of the field with respect to (x, xi), 2n x 2n.
    virtual Mat jacobian(const Vec& x, const Vec& xi) const = 0;
};

// Horizontal lift of pi#(xi) for the flat connection: X(x, xi) = (pi(x) xi, 0).
class FlatSpray final : public SprayModel {
public:
    explicit FlatSpray(BivectorField pi) : pi_(std::move(pi)) {}

    const BivectorField& pi() const { return pi_; }
    int dim() const override { return pi_.dim(); }

    void value(const Vec& x, const Vec& xi, Vec& dx, Vec& dxi) const override {
        dx = pi_.sharp(x, xi);
        dxi = Vec::Zero(dim());
    }

    Mat jacobian(const Vec& x, const Vec& xi) const override {
        const int n = dim();
        Mat a = Mat::Zero(2 * n, 2 * n);
        a.topLeftCorner(n, n) = pi_.sharp_x_jacobian(x, xi);
        a.topRightCorner(n, n) = pi_.matrix(x);
        return a;
    }

private:
    BivectorField pi_;
};

// Flat spray plus a vertical term quadratic in the fiber,
// dxi^a = sum_{jk} G^a_{jk}(x) xi_j xi_k. Keeps both spray axioms; used to
// exercise averaging and reserved for non-flat connections.
class VerticalQuadraticSpray final : public SprayModel {
public:
    VerticalQuadraticSpray(BivectorField pi, std::vector<Mat> vertical)
        : pi_(std::move(pi)), coeff_(std::move(vertical)) {
        if (static_cast<int>(coeff_.size()) != pi_.dim())
            throw Error("vertical term needs one coefficient matrix per fiber component");
    }

    int dim() const override { return pi_.dim(); }

    void value(const Vec& x, const Vec& xi, Vec& dx, Vec& dxi) const override {
        dx = pi_.sharp(x, xi);
        dxi.resize(dim());
        for (int a = 0; a < dim(); ++a)
            dxi[a] = xi.dot(coeff_[static_cast<std::size_t>(a)] * xi);
        (void)x;
    }

    Mat jacobian(const Vec& x, const Vec& xi) const override {
        const int n = dim();
        Mat a = Mat::Zero(2 * n, 2 * n);
        a.topLeftCorner(n, n) = pi_.sharp_x_jacobian(x, xi);
        a.topRightCorner(n, n) = pi_.matrix(x);
        for (int r = 0; r < n; ++r) {
            const Mat& g = coeff_[static_cast<std::size_t>(r)];
            a.bottomRightCorner(n, n).row(r) = ((g + g.transpose()) * xi).transpose();
        }
        return a;
    }

private:
    BivectorField pi_;
    std::vector<Mat> coeff_;
};

// s * X; with s = -1 this is a Poisson spray for -pi.
class ScaledSpray final : public SprayModel {
public:
    ScaledSpray(std::shared_ptr<const SprayModel> inner, double scale)
        : inner_(std::move(inner)), scale_(scale) {}

    int dim() const override { return inner_->dim(); }

    void value(const Vec& x, const Vec& xi, Vec& dx, Vec& dxi) const override {
        inner_->value(x, xi, dx, dxi);
        dx *= scale_;
        dxi *= scale_;
    }

    Mat jacobian(const Vec& x, const Vec& xi) const override {
        return scale_ * inner_->jacobian(x, xi);
    }

private:
    std::shared_ptr<const SprayModel> inner_;
    double scale_;
};

struct FlowResult {
    Vec x;
    Vec xi;
    Mat jacobian; // 2n x 2n derivative of the flow map at the initial state
    int steps{0};
};

namespace detail {

struct FlowState {
    Vec z; // (x, xi), 2n
    Mat j; // sensitivity, 2n x 2n
};

inline void spray_rhs(const SprayModel& s, const Vec& z, Vec& out) {
    const int n = s.dim();
    Vec x = z.head(n), xi = z.tail(n), dx, dxi;
    s.value(x, xi, dx, dxi);
    out.resize(2 * n);
    out.head(n) = dx;
    out.tail(n) = dxi;
}

// One classical 4th-order step of the state together with its variational
// system; the stage matrices reuse the stage states, which makes j the exact
// derivative of the discrete update.
inline void rk4_step(const SprayModel& s, FlowState& st, double h) {
    const int n = s.dim();
    Vec k1, k2, k3, k4;
    spray_rhs(s, st.z, k1);
    Mat a1 = s.jacobian(st.z.head(n), st.z.tail(n));
    Mat kj1 = a1 * st.j;

    Vec z2 = st.z + 0.5 * h * k1;
    spray_rhs(s, z2, k2);
    Mat a2 = s.jacobian(z2.head(n), z2.tail(n));
    Mat kj2 = a2 * (st.j + 0.5 * h * kj1);

    Vec z3 = st.z + 0.5 * h * k2;
    spray_rhs(s, z3, k3);
    Mat a3 = s.jacobian(z3.head(n), z3.tail(n));
    Mat kj3 = a3 * (st.j + 0.5 * h * kj2);

    Vec z4 = st.z + h * k3;
    spray_rhs(s, z4, k4);
    Mat a4 = s.jacobian(z4.head(n), z4.tail(n));
    Mat kj4 = a4 * (st.j + h * kj3);

    st.z += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    st.j += (h / 6.0) * (kj1 + 2.0 * kj2 + 2.0 * kj3 + kj4);
}

inline void require_in_chart(const CotangentChart& chart, const Vec& z, double t) {
    const int n = chart.base_dim();
    if (!chart.contains(z.head(n), z.tail(n))) {
        std::vector<double> loc(z.data(), z.data() + z.size());
        throw DomainEscape("geodesic flow left the cotangent chart", t, std::move(loc));
    }
}

} // namespace detail

// Flow to every requested time in (0, t_final], returning the state and exact
// discrete Jacobian at each checkpoint. The time grid is the uniform grid of
// `steps` sub-intervals per unit time merged with the checkpoint times, so one
// pass serves quadrature nodes and endpoint alike.
inline std::vector<FlowResult> geodesic_flow_checkpoints(const SprayModel& s,
                                                         const CotangentChart& chart,
                                                         const Vec& x0, const Vec& xi0,
                                                         std::vector<double> times, int steps) {
    if (steps < 1) throw ConfigError("flow steps must be >= 1");
    const int n = s.dim();
    if (x0.size() != n || xi0.size() != n) throw Error("flow state dimension mismatch");
    std::sort(times.begin(), times.end());
    if (!times.empty() && times.front() < 0.0)
        throw Error("flow checkpoints must be nonnegative");
    const double t_final = times.empty() ? 0.0 : times.back();

    detail::FlowState st;
    st.z.resize(2 * n);
    st.z.head(n) = x0;
    st.z.tail(n) = xi0;
    st.j = Mat::Identity(2 * n, 2 * n);
    detail::require_in_chart(chart, st.z, 0.0);

    // Merged grid: `steps` uniform sub-intervals of [0, t_final] plus every
    // checkpoint, deduplicated.
    std::vector<double> grid;
    for (int i = 1; i <= steps; ++i) grid.push_back(t_final * i / steps);
    grid.insert(grid.end(), times.begin(), times.end());
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end(),
                           [](double a, double b) { return std::abs(a - b) < 1e-14; }),
               grid.end());

    std::vector<FlowResult> out;
    out.reserve(times.size());
    double t = 0.0;
    std::size_t next_time = 0;
    // Checkpoints at t = 0 (empty flow) are legal.
    while (next_time < times.size() && times[next_time] <= 1e-14) {
        out.push_back({x0, xi0, st.j, 0});
        ++next_time;
    }
    int taken = 0;
    for (double target : grid) {
        if (target <= 1e-14) continue;
        double h = target - t;
        try {
            detail::rk4_step(s, st, h);
        } catch (const OutOfDomain&) {
            // A stage state left the chart of the underlying fields.
            std::vector<double> loc(st.z.data(), st.z.data() + st.z.size());
            throw DomainEscape("geodesic flow left the chart during a step", t, std::move(loc));
        }
        ++taken;
        t = target;
        detail::require_in_chart(chart, st.z, t);
        while (next_time < times.size() && std::abs(times[next_time] - t) < 1e-14) {
            out.push_back({st.z.head(n), st.z.tail(n), st.j, taken});
            ++next_time;
        }
    }
    if (out.size() != times.size())
        throw Error("internal: flow checkpoint bookkeeping failed");
    return out;
}

inline FlowResult geodesic_flow(const SprayModel& s, const CotangentChart& chart, const Vec& x0,
                                const Vec& xi0, double t, int steps) {
    if (t < 0.0) {
        // Flow backwards by integrating the reversed field.
        ScaledSpray reversed(std::shared_ptr<const SprayModel>(&s, [](const SprayModel*) {}), -1.0);
        return geodesic_flow(reversed, chart, x0, xi0, -t, steps);
    }
    auto r = geodesic_flow_checkpoints(s, chart, x0, xi0, {t}, steps);
    return r.front();
}

// Base projection of the time-1 geodesic flow.
inline Vec contravariant_exp(const SprayModel& s, const CotangentChart& chart, const Vec& x0,
                             const Vec& xi0, int steps) {
    return geodesic_flow(s, chart, x0, xi0, 1.0, steps).x;
}

} // namespace pnf
