#include <catch2/catch_amalgamated.hpp>

#include "pnf/rng.hpp"
#include "pnf/spray.hpp"

using namespace pnf;

namespace {
BivectorField so3_star() {
    BivectorField pi(ChartBox::cube(3, 2.0, "so3*"));
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

TEST_CASE("flat spray satisfies projection and homogeneity") {
    FlatSpray s(so3_star());
    SplitMix64 rng(314);
    for (int trial = 0; trial < 100; ++trial) {
        Vec x(3), xi(3);
        for (int i = 0; i < 3; ++i) {
            x[i] = rng.next_in(-1.0, 1.0);
            xi[i] = rng.next_in(-0.5, 0.5);
        }
        Vec dx, dxi;
        s.value(x, xi, dx, dxi);
        CHECK(max_abs(dx - s.pi().sharp(x, xi)) == 0.0);
        CHECK(max_abs(dxi) == 0.0);
        for (double t : {0.5, 2.0}) {
            Vec dxs, dxis;
            s.value(x, Vec(t * xi), dxs, dxis);
            CHECK(max_abs(dxs - t * dx) <= 1e-12);
            CHECK(max_abs(dxis - t * t * dxi) <= 1e-12);
        }
    }
}

TEST_CASE("spray examples") {
    // pi = 0: the flow is the identity.
    FlatSpray zero(BivectorField::zero(ChartBox::cube(2, 1.0)));
    CotangentChart chart2(ChartBox::cube(2, 1.0), 1.0);
    Vec x0(2), xi0(2);
    x0 << 0.3, -0.2;
    xi0 << 0.4, 0.1;
    FlowResult r = geodesic_flow(zero, chart2, x0, xi0, 1.0, 8);
    CHECK(max_abs(r.x - x0) == 0.0);
    CHECK(max_abs(r.xi - xi0) == 0.0);
    CHECK(max_abs(r.jacobian - Mat::Identity(4, 4)) == 0.0);

    // Constant pi: X(x, xi) = (pi xi, 0).
    FlatSpray rot(BivectorField::constant(ChartBox::cube(2, 4.0), j2()));
    Vec dx, dxi;
    rot.value(x0, xi0, dx, dxi);
    CHECK(dx[0] == Catch::Approx(-xi0[1]));
    CHECK(dx[1] == Catch::Approx(xi0[0]));
    CHECK(max_abs(dxi) == 0.0);

    // so(3)* at ((0,0,1),(1,0,0)): X = ((0,-1,0),(0,0,0)).
    FlatSpray s3(so3_star());
    s3.value(vec3(0, 0, 1), vec3(1, 0, 0), dx, dxi);
    CHECK(dx[1] == Catch::Approx(-1.0));
    CHECK(max_abs(dxi) == 0.0);
}

TEST_CASE("constant-pi flow is exact and matches the linear model") {
    BivectorField pi = BivectorField::constant(ChartBox::cube(2, 4.0), j2());
    FlatSpray s(pi);
    CotangentChart chart(ChartBox::cube(2, 4.0), 4.0);
    Vec x0(2), xi0(2);
    x0 << 0.25, -0.5;
    xi0 << 0.7, 0.3;
    for (double t : {0.25, 1.0}) {
        FlowResult r = geodesic_flow(s, chart, x0, xi0, t, 16);
        CHECK(max_abs(r.x - (x0 + t * (j2() * xi0))) <= 1e-14);
        CHECK(max_abs(r.xi - xi0) <= 1e-15);
        Mat expected = Mat::Identity(4, 4);
        expected.topRightCorner(2, 2) = t * j2();
        CHECK(max_abs(r.jacobian - expected) <= 1e-14);
    }
    CHECK(max_abs(contravariant_exp(s, chart, x0, xi0, 16) - (x0 + j2() * xi0)) <= 1e-14);
}

TEST_CASE("zero covector is fixed with base-identity differential") {
    FlatSpray s(so3_star());
    CotangentChart chart(ChartBox::cube(3, 2.0), 2.0);
    Vec x0 = vec3(0.2, 0.4, 0.9);
    FlowResult r = geodesic_flow(s, chart, x0, Vec::Zero(3), 1.0, 32);
    CHECK(max_abs(r.x - x0) == 0.0);
    CHECK(max_abs(r.jacobian.topLeftCorner(3, 3) - Mat::Identity(3, 3)) <= 1e-14);
    CHECK(max_abs(contravariant_exp(s, chart, x0, Vec::Zero(3), 8) - x0) == 0.0);
}

TEST_CASE("step doubling shows at least 4th order") {
    FlatSpray s(so3_star());
    CotangentChart chart(ChartBox::cube(3, 2.0), 2.0);
    Vec x0 = vec3(0, 0, 1), xi0 = vec3(0.1, 0, 0);
    FlowResult a = geodesic_flow(s, chart, x0, xi0, 1.0, 64);
    FlowResult b = geodesic_flow(s, chart, x0, xi0, 1.0, 128);
    CHECK(max_abs(a.x - b.x) <= 1e-10);
    CHECK(max_abs(a.xi - b.xi) <= 1e-12);
}

TEST_CASE("flow group law and reversibility") {
    FlatSpray s(so3_star());
    CotangentChart chart(ChartBox::cube(3, 2.0), 2.0);
    Vec x0 = vec3(0.1, -0.3, 0.8), xi0 = vec3(0.2, 0.1, -0.2);
    for (auto [t1, t2] : std::vector<std::pair<double, double>>{{0.25, 0.5}, {0.5, 0.25}}) {
        FlowResult ab = geodesic_flow(s, chart, x0, xi0, t1 + t2, 64);
        FlowResult a = geodesic_flow(s, chart, x0, xi0, t1, 32);
        FlowResult b = geodesic_flow(s, chart, a.x, a.xi, t2, 32);
        CHECK(max_abs(ab.x - b.x) <= 1e-8);
        CHECK(max_abs(ab.xi - b.xi) <= 1e-8);
    }

    FlowResult fwd = geodesic_flow(s, chart, x0, xi0, 1.0, 64);
    FlowResult back = geodesic_flow(s, chart, fwd.x, fwd.xi, -1.0, 64);
    CHECK(max_abs(back.x - x0) <= 1e-8 * std::max(1.0, x0.norm()));
    CHECK(max_abs(back.xi - xi0) <= 1e-8);

    // Flows are diffeomorphisms and the Jacobian is step-converged.
    CHECK(std::abs(fwd.jacobian.determinant()) > 0.1);
    FlowResult fine = geodesic_flow(s, chart, x0, xi0, 1.0, 128);
    CHECK(std::abs(fwd.jacobian.determinant() / fine.jacobian.determinant() - 1.0) < 0.1);
}

TEST_CASE("checkpointed flow agrees with single flows") {
    FlatSpray s(so3_star());
    CotangentChart chart(ChartBox::cube(3, 2.0), 2.0);
    Vec x0 = vec3(0.1, -0.3, 0.8), xi0 = vec3(0.2, 0.1, -0.2);
    auto multi = geodesic_flow_checkpoints(s, chart, x0, xi0, {0.3, 0.7, 1.0}, 64);
    REQUIRE(multi.size() == 3);
    double ts[] = {0.3, 0.7, 1.0};
    for (int i = 0; i < 3; ++i) {
        FlowResult single = geodesic_flow(s, chart, x0, xi0, ts[i], 256);
        CHECK(max_abs(multi[static_cast<std::size_t>(i)].x - single.x) <= 1e-9);
        CHECK(max_abs(multi[static_cast<std::size_t>(i)].jacobian - single.jacobian) <= 1e-8);
    }
}

TEST_CASE("domain escape reports time and location") {
    FlatSpray s(BivectorField::constant(ChartBox::cube(2, 1.0), j2()));
    CotangentChart chart(ChartBox::cube(2, 1.0), 2.0);
    Vec x0(2), xi0(2);
    x0 << 0.9, 0.0;
    xi0 << 0.0, -2.0; // drives x1 outward at rate 2
    try {
        geodesic_flow(s, chart, x0, xi0, 1.0, 64);
        FAIL("expected DomainEscape");
    } catch (const DomainEscape& e) {
        CHECK(e.time > 0.0);
        CHECK(e.time < 0.2);
        CHECK(e.location.size() == 4);
    }
}

TEST_CASE("flow jacobian matches a finite-difference probe") {
    FlatSpray s(so3_star());
    CotangentChart chart(ChartBox::cube(3, 2.0), 2.0);
    Vec x0 = vec3(0.1, 0.2, 0.9), xi0 = vec3(0.15, -0.1, 0.05);
    FlowResult r = geodesic_flow(s, chart, x0, xi0, 1.0, 64);
    const double h = 1e-6;
    for (int d = 0; d < 6; ++d) {
        Vec xp = x0, xip = xi0, xm = x0, xim = xi0;
        if (d < 3) {
            xp[d] += h;
            xm[d] -= h;
        } else {
            xip[d - 3] += h;
            xim[d - 3] -= h;
        }
        FlowResult rp = geodesic_flow(s, chart, xp, xip, 1.0, 64);
        FlowResult rm = geodesic_flow(s, chart, xm, xim, 1.0, 64);
        Vec col(6);
        col.head(3) = (rp.x - rm.x) / (2 * h);
        col.tail(3) = (rp.xi - rm.xi) / (2 * h);
        CHECK(max_abs(Vec(r.jacobian.col(d) - col)) <= 5e-8);
    }
}
