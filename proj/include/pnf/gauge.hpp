// Gauge (B-field) transform of a bivector by a closed 2-form:
//   (pi^B)# = pi# o (id + B_flat o pi#)^{-1},  in matrices pi (I + B pi)^{-1}.
#pragma once

#include "pnf/fields.hpp"
#include "pnf/linalg.hpp"

namespace pnf {

// Margin below which I + B*pi counts as singular: the transform leaves the
// Poisson (graph) locus at this point.
inline constexpr double kGaugeMarginThreshold = 1e-12;

inline Mat gauge_bivector(const Mat& pi, const Mat& b, double margin_threshold = kGaugeMarginThreshold) {
    const int n = static_cast<int>(pi.rows());
    require_finite(pi, "gauge input bivector");
    require_finite(b, "gauge 2-form");
    Mat k = Mat::Identity(n, n) + b * pi;
    SingularValues s = singular_values(k);
    if (n > 0 && s.margin() < margin_threshold)
        throw SingularGauge("I + B*pi numerically singular (margin " + std::to_string(s.margin()) + ")");
    Mat out = pi * k.inverse();
    double res = antisymmetry_residual(out);
    if (res > 1e-10 * std::max(1.0, max_abs(out)))
        throw NumericFailure("gauged bivector lost antisymmetry (residual " + std::to_string(res) + ")");
    return symmetrize_antisym(out);
}

inline Mat gauge_bivector(const BivectorField& pi, const TwoFormField& b, const Vec& x,
                          double margin_threshold = kGaugeMarginThreshold) {
    return gauge_bivector(pi.matrix(x), b.matrix(x), margin_threshold);
}

} // namespace pnf
