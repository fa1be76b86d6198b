#include <catch2/catch_amalgamated.hpp>

#include "pnf/ext_derivative.hpp"
#include "pnf/fields.hpp"
#include "pnf/gauge.hpp"
#include "pnf/rng.hpp"

using namespace pnf;

namespace {

BivectorField so3_star(double box_r = 2.0) {
    BivectorField pi(ChartBox::cube(3, box_r, "so3*"));
    pi.set_entry(0, 1, ExpressionField::parse("x3"));
    pi.set_entry(0, 2, ExpressionField::parse("neg(x2)"));
    pi.set_entry(1, 2, ExpressionField::parse("x1"));
    return pi;
}

Mat j2() {
    Mat m(2, 2);
    m << 0, -1, 1, 0;
    return m;
}

Vec vec3(double a, double b, double c) {
    Vec v(3);
    v << a, b, c;
    return v;
}

} // namespace

TEST_CASE("sharp follows the pinned index convention") {
    BivectorField pi = so3_star();
    Vec x = vec3(0, 0, 1);
    Vec xi = vec3(1, 0, 0);
    Vec v = pi.sharp(x, xi);
    CHECK(v[0] == Catch::Approx(0.0).margin(1e-15));
    CHECK(v[1] == Catch::Approx(-1.0));
    CHECK(v[2] == Catch::Approx(0.0).margin(1e-15));

    BivectorField zero = BivectorField::zero(ChartBox::cube(3, 1.0));
    CHECK(max_abs(zero.sharp(vec3(0.1, 0.2, 0.3), xi)) == 0.0);

    BivectorField rot = BivectorField::constant(ChartBox::cube(2, 1.0), j2());
    Vec xi2(2);
    xi2 << 1, 0;
    Vec v2 = rot.sharp(Vec::Zero(2), xi2);
    CHECK(v2[0] == Catch::Approx(0.0).margin(1e-15));
    CHECK(v2[1] == Catch::Approx(1.0));
}

TEST_CASE("jacobiator vanishes exactly for Lie-Poisson and constant structures") {
    BivectorField pi = so3_star();
    auto pts = sample_box(pi.box(), 100, 2024);
    for (const auto& x : pts)
        CHECK(jacobiator(pi, x).max_abs <= 1e-12);

    BivectorField c = BivectorField::constant(ChartBox::cube(3, 1.0), Mat::Zero(3, 3));
    CHECK(jacobiator(c, vec3(0.3, 0.1, -0.5)).max_abs == 0.0);
}

TEST_CASE("jacobiator detects the non-Poisson fixture") {
    // pi^{12} = x2, pi^{23} = 1: the only surviving term is pi^{32} d_2 pi^{12} = -1.
    BivectorField pi(ChartBox::cube(3, 1.0));
    pi.set_entry(0, 1, ExpressionField::parse("x2"));
    pi.set_entry(1, 2, ExpressionField::constant(1.0));
    auto pts = sample_box(pi.box(), 25, 7);
    for (const auto& x : pts) {
        Jacobiator j = jacobiator(pi, x);
        REQUIRE(j.components.size() == 1);
        CHECK(std::get<3>(j.components[0]) == Catch::Approx(-1.0));
    }
}

TEST_CASE("gauge transform matches the closed forms") {
    Mat pi = j2();
    Mat b = -j2(); // B = [[0,1],[-1,0]]: (omega + B)^{-1} = (2 omega)^{-1}
    Mat gauged = gauge_bivector(pi, b);
    CHECK(gauged(0, 1) == Catch::Approx(-0.5));
    CHECK(gauged(1, 0) == Catch::Approx(0.5));

    CHECK(max_abs(gauge_bivector(pi, Mat::Zero(2, 2)) - pi) <= 1e-15);

    // I + B pi = 0 for B = j2: the gauge leaves the graph locus.
    CHECK_THROWS_AS(gauge_bivector(pi, j2()), SingularGauge);
}

TEST_CASE("gauge composition law") {
    SplitMix64 rng(99);
    BivectorField so3 = so3_star();
    for (int trial = 0; trial < 20; ++trial) {
        Vec x(3);
        for (int i = 0; i < 3; ++i) x[i] = rng.next_in(-1.0, 1.0);
        Mat pi = so3.matrix(x);
        Mat b1 = Mat::Zero(3, 3), b2 = Mat::Zero(3, 3);
        for (int i = 0; i < 3; ++i)
            for (int j = i + 1; j < 3; ++j) {
                b1(i, j) = rng.next_in(-0.4, 0.4);
                b1(j, i) = -b1(i, j);
                b2(i, j) = rng.next_in(-0.4, 0.4);
                b2(j, i) = -b2(i, j);
            }
        Mat lhs = gauge_bivector(gauge_bivector(pi, b1), b2);
        Mat rhs = gauge_bivector(pi, b1 + b2);
        CHECK(max_abs(lhs - rhs) <= 1e-9);
    }
}

TEST_CASE("gauge by a closed form preserves the Jacobi identity") {
    BivectorField pi = so3_star();
    // B = d(x1 x2 dx3) = x2 dx1^dx3 + x1 dx2^dx3, closed by construction.
    TwoFormField b(ChartBox::cube(3, 2.0));
    b.set_entry(0, 2, ExpressionField::parse("x2"));
    b.set_entry(1, 2, ExpressionField::parse("x1"));
    auto gauged = [&](const Vec& x) { return gauge_bivector(pi, b, x); };
    auto pts = sample_box(ChartBox::cube(3, 0.6), 10, 5);
    for (const auto& x : pts)
        CHECK(jacobiator_fd(gauged, x) <= 1e-4);
}

TEST_CASE("one-form exterior derivative via jets") {
    ChartBox box = ChartBox::cube(2, 1.0);
    OneFormField alpha(box, {ExpressionField::constant(0.0), ExpressionField::parse("x1")});
    Mat d = alpha.d(Vec::Zero(2));
    CHECK(d(0, 1) == Catch::Approx(1.0));
    CHECK(d(1, 0) == Catch::Approx(-1.0));
}

TEST_CASE("numeric exterior derivative") {
    ChartBox box = ChartBox::cube(3, 1.0);

    Mat cst = Mat::Zero(3, 3);
    cst(0, 1) = 2.0;
    cst(1, 0) = -2.0;
    auto constant = [&](const Vec&) { return cst; };
    CHECK(exterior_derivative_numeric(constant, Vec::Zero(3), 1e-5, &box).max_abs == 0.0);

    // omega = x1 dx2^dx3  =>  (d omega)_{123} = 1.
    auto omega = [](const Vec& x) {
        Mat m = Mat::Zero(3, 3);
        m(1, 2) = x[0];
        m(2, 1) = -x[0];
        return m;
    };
    ThreeForm d = exterior_derivative_numeric(omega, vec3(0.2, -0.1, 0.3), 1e-5, &box);
    REQUIRE(d.components.size() == 1);
    CHECK(std::get<3>(d.components[0]) == Catch::Approx(1.0).epsilon(1e-8));

    // omega = d(x1 x2 dx3): d omega = 0 up to O(h^2).
    auto exact = [](const Vec& x) {
        Mat m = Mat::Zero(3, 3);
        m(0, 2) = x[1];
        m(2, 0) = -x[1];
        m(1, 2) = x[0];
        m(2, 1) = -x[0];
        return m;
    };
    CHECK(exterior_derivative_numeric(exact, vec3(0.2, -0.1, 0.3), 1e-5, &box).max_abs <= 1e-9);

    Vec edge = vec3(0.999999, 0.0, 0.0);
    CHECK_THROWS_AS(exterior_derivative_numeric(omega, edge, 1e-5, &box), OutOfDomain);
}

TEST_CASE("bivector rejects diagonal entries and bad coordinates") {
    BivectorField pi(ChartBox::cube(2, 1.0));
    CHECK_THROWS_AS(pi.set_entry(0, 0, ExpressionField::constant(1.0)), ConfigError);
    CHECK_THROWS_AS(pi.set_entry(0, 1, ExpressionField::parse("x5")), ConfigError);
}
