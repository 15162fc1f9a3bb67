#include <gtest/gtest.h>

#include <cmath>

#include "rfm/problem.hpp"

using namespace rfm;

namespace {

ManufacturedSolution parse_u(const char* text) { return ManufacturedSolution(Expression::parse(text)); }

PDEProblem with_coefficients(ScalarField a, ScalarField b, ScalarField c, double R = 1.0) {
  PDEProblem p;
  p.domain = Domain(R);
  p.a = std::move(a);
  p.b = std::move(b);
  p.c = std::move(c);
  return p;
}

double central_second(const ManufacturedSolution& u, double x, double h) {
  return (u.u(x + h) - 2.0 * u.u(x) + u.u(x - h)) / (h * h);
}

double central_first(const ManufacturedSolution& u, double x, double h) {
  return (u.u(x + h) - u.u(x - h)) / (2.0 * h);
}

}  // namespace

TEST(ApplyL, SecondDerivativeOfSquare) {
  const auto p = with_coefficients(ScalarField::constant(1), ScalarField::constant(0),
                                   ScalarField::constant(0));
  EXPECT_NEAR(apply_L(p, parse_u("x^2"), 0.3), 2.0, 1e-14);
}

TEST(ApplyL, HelmholtzOfSine) {
  const auto p = with_coefficients(ScalarField::constant(1), ScalarField::constant(0),
                                   ScalarField::constant(-1));
  for (double x : {-0.9, -0.2, 0.0, 0.4, 1.0})
    EXPECT_NEAR(apply_L(p, parse_u("sin(x)"), x), -2.0 * std::sin(x), 1e-14);
}

TEST(ApplyL, VariableCoefficientsAgainstFiniteDifferences) {
  const Domain dom(1.0);
  const auto p = with_coefficients(ScalarField::from_expression(Expression::parse("exp(x)"), dom),
                                   ScalarField::from_expression(Expression::parse("x"), dom),
                                   ScalarField::constant(1.0));
  const auto u = parse_u("cos(2*x)");
  const double x = 0.5, h = 1e-5;
  const double fd = std::exp(x) * central_second(u, x, h) + x * central_first(u, x, h) + u.u(x);
  EXPECT_NEAR(apply_L(p, u, x), fd, 1e-4);
}

TEST(ApplyL, RejectsPointsOutsideDomain) {
  const auto p = with_coefficients(ScalarField::constant(1), ScalarField::constant(0),
                                   ScalarField::constant(0));
  EXPECT_THROW(apply_L(p, parse_u("x"), 1.5), std::domain_error);
}

TEST(Manufactured, SineDirichlet) {
  const auto u = parse_u("sin(x)");
  const auto p = make_manufactured(u, ScalarField::constant(1), ScalarField::constant(0),
                                   ScalarField::constant(0), BoundaryOperator::dirichlet(), Domain(1.0));
  for (double x : {-0.7, 0.1, 0.8}) EXPECT_NEAR(p.f(x), -std::sin(x), 1e-14);
  EXPECT_NEAR(p.boundary.g_left, std::sin(-1.0), 1e-15);
  EXPECT_NEAR(p.boundary.g_right, std::sin(1.0), 1e-15);
  ASSERT_TRUE(p.exact.has_value());
}

TEST(Manufactured, SquareWithAdvection) {
  const auto p = make_manufactured(parse_u("x^2"), ScalarField::constant(1), ScalarField::constant(1),
                                   ScalarField::constant(0), BoundaryOperator::dirichlet(), Domain(1.0));
  for (double x : {-1.0, -0.3, 0.0, 0.6}) EXPECT_NEAR(p.f(x), 2.0 + 2.0 * x, 1e-14);
}

TEST(Manufactured, ResidualMatchesFiniteDifferences) {
  const auto u = parse_u("exp(x)+cos(3*x)");
  const auto p = make_manufactured(u, ScalarField::constant(1), ScalarField::constant(0),
                                   ScalarField::constant(-1), BoundaryOperator::dirichlet(), Domain(1.0));
  for (double x : {-0.5, 0.0, 0.25, 0.75}) {
    const double fd = central_second(u, x, 1e-4) - u.u(x);
    EXPECT_NEAR(p.f(x), fd, 1e-5);
  }
}

TEST(Manufactured, RobinData) {
  BoundaryOperator bc;
  bc.g1_left = 2.0;
  bc.g2_left = 0.5;
  bc.g1_right = -1.0;
  bc.g2_right = 3.0;
  const auto u = parse_u("exp(x)");
  const auto p = make_manufactured(u, ScalarField::constant(1), ScalarField::constant(0),
                                   ScalarField::constant(0), bc, Domain(0.5));
  EXPECT_NEAR(p.boundary.g_left, 2.5 * std::exp(-0.5), 1e-14);
  EXPECT_NEAR(p.boundary.g_right, 2.0 * std::exp(0.5), 1e-14);
}

TEST(Manufactured, RejectsNonPositivePenalty) {
  EXPECT_THROW(make_manufactured(parse_u("x"), ScalarField::constant(1), ScalarField::constant(0),
                                 ScalarField::constant(0), BoundaryOperator::dirichlet(), Domain(1.0), 0.0),
               std::invalid_argument);
}

TEST(Domain, RejectsNonPositiveRadius) {
  EXPECT_THROW(Domain(0.0), std::invalid_argument);
  EXPECT_THROW(Domain(-1.0), std::invalid_argument);
}

TEST(Envelope, Primitives) {
  const auto c = envelope_primitive("cos", {.w = 3}, 1.0);
  EXPECT_DOUBLE_EQ(c.M, 1.0);
  EXPECT_DOUBLE_EQ(c.C, 3.0);
  EXPECT_DOUBLE_EQ(c.s, 0.0);
  const auto e = envelope_primitive("exp", {.w = 2}, 0.5);
  EXPECT_NEAR(e.M, std::exp(1.0), 1e-15);
  EXPECT_DOUBLE_EQ(e.C, 2.0);
  const auto m = envelope_primitive("monomial", {.degree = 4}, 2.0);
  EXPECT_DOUBLE_EQ(m.M, 16.0);
  EXPECT_DOUBLE_EQ(m.C, 2.0);
  EXPECT_THROW(envelope_primitive("tanh", {}, 1.0), std::invalid_argument);
}

TEST(Envelope, ClosureRules) {
  const GevreyEnvelope c{1, 1, 0}, e{std::exp(1.0), 2, 0}, t{1, 3, 0};
  const auto prod = envelope_combine(EnvelopeOp::product, c, e);
  EXPECT_NEAR(prod.M, std::exp(1.0), 1e-15);
  EXPECT_DOUBLE_EQ(prod.C, 3.0);
  const auto d = envelope_combine(EnvelopeOp::derivative, t);
  EXPECT_DOUBLE_EQ(d.M, 3.0);
  EXPECT_DOUBLE_EQ(d.C, 3.0);
  const auto s = envelope_combine(EnvelopeOp::scale, t, std::nullopt, -2.0);
  EXPECT_DOUBLE_EQ(s.M, 2.0);
  EXPECT_DOUBLE_EQ(s.C, 3.0);
  const auto sum = envelope_combine(EnvelopeOp::sum, c, t);
  EXPECT_DOUBLE_EQ(sum.M, 2.0);
  EXPECT_DOUBLE_EQ(sum.C, 3.0);
}

TEST(Envelope, CertifiesDerivativesOfParsedExpressions) {
  for (const char* text : {"sin(3*x)+exp(x)", "x^3+x", "cos(2*x)*exp(-x)", "2*sin(x)"}) {
    const auto u = parse_u(text);
    const auto env = u.envelope(1.0);
    ASSERT_TRUE(env.has_value()) << text;
    for (int n = 0; n <= 12; ++n)
      for (int i = 0; i <= 40; ++i) {
        const double x = -1.0 + i / 20.0;
        EXPECT_LE(std::abs(u.derivative(x, n)), env->bound(n) * (1 + 1e-12)) << text << " n=" << n;
      }
  }
}

TEST(Expression, DerivativesAtZero) {
  const auto u = parse_u("exp(x)");
  for (int n = 0; n < 20; ++n) EXPECT_NEAR(u.derivative_at_zero(n), 1.0, 1e-14);
  const auto s = parse_u("sin(3*x)");
  EXPECT_NEAR(s.derivative_at_zero(3), -27.0, 1e-12);
  EXPECT_THROW(s.derivative_at_zero(-1), std::invalid_argument);
}

TEST(Expression, ParseErrors) {
  EXPECT_THROW(Expression::parse("sin(x"), std::invalid_argument);
  EXPECT_THROW(Expression::parse("foo(x)"), std::invalid_argument);
}
