#include <catch2/catch_amalgamated.hpp>

#include "pnf/expression.hpp"
#include "pnf/fields.hpp"
#include "pnf/quadrature.hpp"
#include "pnf/rng.hpp"

using namespace pnf;

namespace {
Vec vec2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}
} // namespace

TEST_CASE("parser handles the documented grammar") {
    auto e = Expr::parse(" x1 * x2 + 3.5 ");
    std::vector<double> x{2.0, 3.0};
    CHECK(e.eval(std::span<const double>(x)) == Catch::Approx(9.5));

    CHECK(Expr::parse("2^3").eval(std::span<const double>(x)) == Catch::Approx(8.0));
    CHECK(Expr::parse("x1^-1").eval(std::span<const double>(x)) == Catch::Approx(0.5));
    CHECK(Expr::parse("neg(x1)").eval(std::span<const double>(x)) == Catch::Approx(-2.0));
    CHECK(Expr::parse("-x1 + sin(0)").eval(std::span<const double>(x)) == Catch::Approx(-2.0));
    CHECK(Expr::parse("sqrt(x2 + 1)").eval(std::span<const double>(x)) == Catch::Approx(2.0));
    CHECK(Expr::parse("1e2 + 1").eval(std::span<const double>(x)) == Catch::Approx(101.0));
    CHECK(Expr::parse("(x1 + x2) / 5").eval(std::span<const double>(x)) == Catch::Approx(1.0));

    CHECK_THROWS_AS(Expr::parse("x0"), ParseError);
    CHECK_THROWS_AS(Expr::parse("tan(x1)"), ParseError);
    CHECK_THROWS_AS(Expr::parse("x1 +"), ParseError);
    CHECK_THROWS_AS(Expr::parse("x1 ^ x2"), ParseError);
    CHECK_THROWS_AS(Expr::parse("1 2"), ParseError);
}

TEST_CASE("domain guards") {
    std::vector<double> x{0.0, -1.0};
    CHECK_THROWS_AS(Expr::parse("1/x1").eval(std::span<const double>(x)), UndefinedExpression);
    CHECK_THROWS_AS(Expr::parse("sqrt(x2)").eval(std::span<const double>(x)), UndefinedExpression);
}

TEST_CASE("eval_with_jet matches hand derivatives") {
    ChartBox box = ChartBox::cube(2, 5.0);

    auto f = ExpressionField::parse("x1 * x2");
    Jet j = eval_with_jet(f, box, vec2(2.0, 3.0), 1);
    CHECK(j.value == Catch::Approx(6.0));
    CHECK(j.gradient[0] == Catch::Approx(3.0));
    CHECK(j.gradient[1] == Catch::Approx(2.0));

    ChartBox box1 = ChartBox::cube(1, 5.0);
    auto g = ExpressionField::parse("sin(x1)");
    Vec origin = Vec::Zero(1);
    Jet jg = eval_with_jet(g, box1, origin, 2);
    CHECK(jg.value == Catch::Approx(0.0));
    CHECK(jg.gradient[0] == Catch::Approx(1.0));
    REQUIRE(jg.hessian);
    CHECK((*jg.hessian)(0, 0) == Catch::Approx(0.0).margin(1e-15));

    auto h = ExpressionField::parse("x1^2 + x2^2");
    Jet jh = eval_with_jet(h, box, vec2(1.0, 1.0), 2);
    CHECK(jh.value == Catch::Approx(2.0));
    CHECK(jh.gradient[0] == Catch::Approx(2.0));
    CHECK(jh.gradient[1] == Catch::Approx(2.0));
    CHECK((*jh.hessian)(0, 0) == Catch::Approx(2.0));
    CHECK((*jh.hessian)(1, 1) == Catch::Approx(2.0));
    CHECK((*jh.hessian)(0, 1) == Catch::Approx(0.0).margin(1e-15));

    Vec outside = vec2(10.0, 0.0);
    CHECK_THROWS_AS(eval_with_jet(f, box, outside, 1), OutOfDomain);
}

TEST_CASE("second-order jets are exact on mixed products") {
    ChartBox box = ChartBox::cube(3, 2.0);
    auto f = ExpressionField::parse("x1 * sin(x2) + exp(x3) * x1^2");
    Vec x(3);
    x << 0.7, 0.3, -0.2;
    Jet j = eval_with_jet(f, box, x, 2);
    double e3 = std::exp(-0.2);
    CHECK(j.value == Catch::Approx(0.7 * std::sin(0.3) + e3 * 0.49));
    CHECK(j.gradient[0] == Catch::Approx(std::sin(0.3) + 2.0 * 0.7 * e3));
    CHECK(j.gradient[1] == Catch::Approx(0.7 * std::cos(0.3)));
    CHECK(j.gradient[2] == Catch::Approx(e3 * 0.49));
    CHECK((*j.hessian)(0, 0) == Catch::Approx(2.0 * e3));
    CHECK((*j.hessian)(0, 1) == Catch::Approx(std::cos(0.3)));
    CHECK((*j.hessian)(0, 2) == Catch::Approx(2.0 * 0.7 * e3));
    CHECK((*j.hessian)(1, 1) == Catch::Approx(-0.7 * std::sin(0.3)));
    CHECK((*j.hessian)(1, 2) == Catch::Approx(0.0).margin(1e-15));
    CHECK((*j.hessian)(2, 2) == Catch::Approx(e3 * 0.49));
}

TEST_CASE("gauss-legendre integrates polynomials exactly") {
    for (int order : {1, 2, 4, 8, 16}) {
        Quadrature q = gauss_legendre_01(order);
        double sum_w = 0.0;
        for (double w : q.weights) sum_w += w;
        CHECK(sum_w == Catch::Approx(1.0));
        // exact through degree 2*order - 1
        int deg = 2 * order - 1;
        double integral = 0.0;
        for (std::size_t i = 0; i < q.nodes.size(); ++i)
            integral += q.weights[i] * std::pow(q.nodes[i], deg);
        CHECK(integral == Catch::Approx(1.0 / (deg + 1)).epsilon(1e-13));
    }
}

TEST_CASE("splitmix sampler is deterministic and in-box") {
    ChartBox box({{-1.0, 2.0}, {0.5, 0.75}});
    auto a = sample_box(box, 20, 42);
    auto b = sample_box(box, 20, 42);
    REQUIRE(a.size() == 20);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i] == b[i]);
        CHECK(box.contains(a[i]));
    }
    auto c = sample_box(box, 20, 43);
    CHECK(a[0] != c[0]);
}
