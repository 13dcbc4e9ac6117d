#include <gtest/gtest.h>

#include <random>

#include "asymgame/payoff_expr.hpp"

using namespace asymgame;

namespace {

double eval(const PayoffExpr& e, std::vector<double> x, double t, std::vector<double> u,
            std::vector<double> v) {
  return e.evaluate(x, t, u, v);
}

}  // namespace

TEST(PayoffExpr, ParsesToExpectedTrees) {
  EXPECT_EQ(PayoffExpr::parse("abs(x1 - u1)").print(), "abs((x1 - u1))");
  EXPECT_EQ(PayoffExpr::parse("u1*v1").print(), "(u1 * v1)");
  EXPECT_EQ(PayoffExpr::parse("1 + 2 * 3 - 4").print(), "((1 + (2 * 3)) - 4)");
  EXPECT_EQ(PayoffExpr::parse("2 ^ 3 ^ 2").print(), "(2 ^ (3 ^ 2))");
  EXPECT_EQ(PayoffExpr::parse("max(x1, t, v2)").print(), "max(x1, t, v2)");
}

TEST(PayoffExpr, PrecedenceUnaryMinusBindsTighterThanPower) {
  EXPECT_EQ(eval(PayoffExpr::parse("-2^2"), {}, 0, {}, {}), 4.0);
  EXPECT_EQ(eval(PayoffExpr::parse("-(2^2)"), {}, 0, {}, {}), -4.0);
  EXPECT_EQ(eval(PayoffExpr::parse("2*3^2"), {}, 0, {}, {}), 18.0);
  EXPECT_EQ(eval(PayoffExpr::parse("8/2/2"), {}, 0, {}, {}), 2.0);
}

TEST(PayoffExpr, SyntaxErrorsCarryOffsets) {
  try {
    PayoffExpr::parse("min(x1,");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 7u);
  }
  try {
    PayoffExpr::parse("x1 + y");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 5u);
    EXPECT_NE(std::string(e.what()).find("unknown identifier"), std::string::npos);
  }
  EXPECT_THROW(PayoffExpr::parse("abs(x1, x2)"), ParseError);  // arity
  EXPECT_THROW(PayoffExpr::parse("pow(2)"), ParseError);
  EXPECT_THROW(PayoffExpr::parse("min(1)"), ParseError);
  EXPECT_THROW(PayoffExpr::parse("x0"), ParseError);
  EXPECT_THROW(PayoffExpr::parse("(1 + 2"), ParseError);
  EXPECT_THROW(PayoffExpr::parse("1 2"), ParseError);
  EXPECT_THROW(PayoffExpr::parse(""), ParseError);
}

TEST(PayoffExpr, Evaluates) {
  EXPECT_EQ(eval(PayoffExpr::parse("abs(x1 - u1)"), {0}, 0, {1}, {}), 1.0);
  EXPECT_EQ(eval(PayoffExpr::parse("u1*v1"), {}, 0, {1}, {-1}), -1.0);
  for (double t : {0.0, 0.3, 7.0}) EXPECT_EQ(eval(PayoffExpr::parse("exp(0*t)*2"), {}, t, {}, {}), 2.0);
  EXPECT_EQ(eval(PayoffExpr::parse("pow(x2, 2) + min(u1, v1, 3)"), {0, 3}, 0, {5}, {4}), 12.0);
}

TEST(PayoffExpr, EvaluationErrors) {
  EXPECT_THROW(eval(PayoffExpr::parse("1 / (x1 - x1)"), {2}, 0, {}, {}), EvalError);
  EXPECT_THROW(eval(PayoffExpr::parse("x2"), {2}, 0, {}, {}), EvalError);
  EXPECT_THROW(eval(PayoffExpr::parse("exp(1000)"), {}, 0, {}, {}), EvalError);
}

TEST(PayoffExpr, DimensionCheck) {
  const auto e = PayoffExpr::parse("x2 * u1 + v3");
  const auto d = e.required_dims();
  EXPECT_EQ(d.x, 2u);
  EXPECT_EQ(d.u, 1u);
  EXPECT_EQ(d.v, 3u);
  EXPECT_NO_THROW(e.check_dims({2, 1, 3}));
  EXPECT_THROW(e.check_dims({1, 1, 3}), ConfigError);
}

TEST(PayoffExpr, PrintParseRoundTripEvaluatesIdentically) {
  const std::vector<std::string> sources{
      "abs(x1 - u1) * 0.1 + 3.3e-3 * t", "-x1 ^ 2 / (1 + abs(v1))", "max(x1, u1 * v1, -0.7) - exp(-t)",
      "pow(abs(x1) + 1, 0.5) * min(u1, v1)", "1/3 * x1 - 2/7 * v1 + t * t"};
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> d(-2, 2);
  for (const auto& src : sources) {
    const auto e = PayoffExpr::parse(src);
    const auto again = PayoffExpr::parse(e.print());
    EXPECT_EQ(again.print(), e.print());
    for (int i = 0; i < 100; ++i) {
      std::vector<double> x{d(gen)}, u{d(gen)}, v{d(gen)};
      const double t = d(gen);
      EXPECT_EQ(e.evaluate(x, t, u, v), again.evaluate(x, t, u, v)) << src;
    }
  }
}

TEST(PayoffExpr, LipschitzEstimates) {
  SampleDomain dom;
  dom.x_box = {{0.0, 1.0}};
  dom.t_lo = 0.0;
  dom.t_hi = 1.0;
  dom.controls_u = {{0.0}, {1.0}};
  dom.controls_v = {{0.0}};
  const auto abs_est = lipschitz_bound(PayoffExpr::parse("abs(x1 - u1)"), dom);
  EXPECT_DOUBLE_EQ(abs_est.lip_x, 1.0);
  EXPECT_DOUBLE_EQ(abs_est.sup_bound, 1.0);
  EXPECT_EQ(abs_est.lip_t, 0.0);

  const auto c = lipschitz_bound(PayoffExpr::parse("3"), dom);
  EXPECT_EQ(c.sup_bound, 3.0);
  EXPECT_EQ(c.lip_x, 0.0);
  EXPECT_EQ(c.lip_t, 0.0);

  // Oracle: d/dx1 (x1 t) = t <= 1, d/dt (x1 t) = x1 <= 2 on [0,2] x [0,1].
  dom.x_box = {{0.0, 2.0}};
  const auto xt = lipschitz_bound(PayoffExpr::parse("x1*t"), dom);
  EXPECT_NEAR(xt.lip_x, 1.0, 1e-12);
  EXPECT_NEAR(xt.lip_t, 2.0, 1e-12);
  EXPECT_NEAR(xt.sup_bound, 2.0, 1e-12);
}
