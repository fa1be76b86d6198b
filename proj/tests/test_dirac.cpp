#include <catch2/catch_amalgamated.hpp>

#include "pnf/dirac.hpp"
#include "pnf/gauge.hpp"
#include "pnf/rng.hpp"

using namespace pnf;

namespace {
Mat j2() {
    Mat m(2, 2);
    m << 0, -1, 1, 0;
    return m;
}
BivectorField so3_star() {
    BivectorField pi(ChartBox::cube(3, 2.0, "so3*"));
    pi.set_entry(0, 1, ExpressionField::parse("x3"));
    pi.set_entry(0, 2, ExpressionField::parse("neg(x2)"));
    pi.set_entry(1, 2, ExpressionField::parse("x1"));
    return pi;
}
} // namespace

TEST_CASE("graph frames satisfy the invariants and round-trip") {
    Vec x = Vec::Zero(2);
    DiracFrame zero = dirac_graph(Mat::Zero(2, 2), x);
    CHECK(zero.isotropy_residual() <= 1e-15);
    CHECK(zero.rank_margin() >= 0.5);
    CHECK(max_abs(dirac_to_bivector(zero)) == 0.0);

    DiracFrame rot = dirac_graph(j2(), x);
    CHECK(rot.isotropy_residual() <= 1e-15);
    CHECK(max_abs(dirac_to_bivector(rot) - j2()) <= 1e-14);

    Vec p(3);
    p << 0, 0, 1;
    BivectorField so3 = so3_star();
    DiracFrame g = dirac_graph(so3, p);
    CHECK(g.rank_margin() > 1e-2);
    CHECK(max_abs(dirac_to_bivector(g) - so3.matrix(p)) <= 1e-12);
}

TEST_CASE("tangent space is not a graph") {
    DiracFrame f;
    f.x = Vec::Zero(2);
    f.A = Mat::Identity(2, 2);
    f.C = Mat::Zero(2, 2);
    CHECK(f.isotropy_residual() <= 1e-15);
    CHECK_THROWS_AS(dirac_to_bivector(f), NotGraph);
}

TEST_CASE("gauged frame agrees with gauge_bivector and detects the singular gauge") {
    Vec x = Vec::Zero(2);
    DiracFrame rot = dirac_graph(j2(), x);

    Mat b = -j2();
    DiracFrame gauged = dirac_gauge(rot, b);
    CHECK(gauged.isotropy_residual() <= 1e-15);
    CHECK(max_abs(dirac_to_bivector(gauged) - gauge_bivector(j2(), b)) <= 1e-12);

    // B = j2 makes I + B pi = 0; the gauged frame must stop being a graph.
    DiracFrame bad = dirac_gauge(rot, j2());
    CHECK_THROWS_AS(dirac_to_bivector(bad), NotGraph);

    DiracFrame zero_pi = dirac_graph(Mat::Zero(2, 2), x);
    DiracFrame same = dirac_gauge(zero_pi, b);
    CHECK(max_abs(same.A - zero_pi.A) == 0.0);
    CHECK(max_abs(same.C - zero_pi.C) == 0.0);
}

TEST_CASE("pullback along the identity and along a bundle projection") {
    Vec x = Vec::Zero(2);
    DiracFrame rot = dirac_graph(j2(), x);
    DiracFrame same = dirac_pullback(rot, Mat::Identity(2, 2), x);
    CHECK(max_abs(dirac_to_bivector(same) - j2()) <= 1e-12);

    // Base = 1-dim with pi_X = 0 (transversal axis), total = 3-dim bundle chart.
    Vec y = Vec::Zero(1);
    DiracFrame base = dirac_graph(Mat::Zero(1, 1), y);
    Mat dp(1, 3);
    dp << 1, 0, 0;
    Vec z = Vec::Zero(3);
    DiracFrame pulled = dirac_pullback(base, dp, z);
    CHECK(pulled.dim() == 3);
    CHECK(pulled.isotropy_residual() <= 1e-12);
    CHECK(pulled.rank_margin() >= kFrameRankThreshold);
    // Presymplectic with zero 2-form: fiber directions free, base covector kept.
    CHECK_THROWS_AS(dirac_to_bivector(pulled), NotGraph);

    Mat bad(2, 3);
    bad << 1, 0, 0, 2, 0, 0;
    DiracFrame base2 = dirac_graph(Mat::Zero(2, 2), Vec::Zero(2));
    CHECK_THROWS_AS(dirac_pullback(base2, bad, z), NotSubmersion);
}

TEST_CASE("frame quantities are basis independent") {
    SplitMix64 rng(11);
    BivectorField so3 = so3_star();
    Vec p(3);
    p << 0.2, -0.4, 1.0;
    DiracFrame g = dirac_gauge(dirac_graph(so3, p), Mat::Zero(3, 3));
    Mat pi0 = dirac_to_bivector(g);
    for (int trial = 0; trial < 10; ++trial) {
        Mat t(3, 3);
        for (int i = 0; i < 9; ++i) t(i / 3, i % 3) = rng.next_in(-1.0, 1.0);
        if (std::abs(t.determinant()) < 0.05) continue;
        DiracFrame h = g;
        h.A = g.A * t;
        h.C = g.C * t;
        CHECK(h.isotropy_residual() <= 1e-10);
        CHECK(max_abs(dirac_to_bivector(h) - pi0) <= 1e-10);
    }
}
