#include <gtest/gtest.h>

#include <cmath>

#include "rfm/solver.hpp"

using namespace rfm;

namespace {

PDEProblem manufactured(const char* u, double R, double c = -1.0) {
  return make_manufactured(ManufacturedSolution(Expression::parse(u)), ScalarField::constant(1),
                           ScalarField::constant(0), ScalarField::constant(c),
                           BoundaryOperator::dirichlet(), Domain(R));
}

RandomFeatureModel two_feature_model() {
  FeatureSample s;
  s.k = {0.7, 1.3};
  return RandomFeatureModel(s, {1.0, 0.0, 0.0, 2.0});
}

}  // namespace

TEST(Lstsq, Identity) {
  const auto r = lstsq_svd(Eigen::Matrix2d::Identity(), Eigen::Vector2d(1, 2), 1e-13);
  EXPECT_NEAR(r.alpha(0), 1.0, 1e-15);
  EXPECT_NEAR(r.alpha(1), 2.0, 1e-15);
  EXPECT_EQ(r.rank, 2);
}

TEST(Lstsq, MinimumNormOnRankDeficientMatrix) {
  Eigen::Matrix2d A;
  A << 1, 1, 1, 1;
  const auto r = lstsq_svd(A, Eigen::Vector2d(1, 1), 1e-13);
  EXPECT_NEAR(r.alpha(0), 0.5, 1e-14);
  EXPECT_NEAR(r.alpha(1), 0.5, 1e-14);
  EXPECT_EQ(r.rank, 1);
}

TEST(Lstsq, NormalEquationsOracle) {
  SplitMix64 rng(3);
  Eigen::MatrixXd A(50, 20);
  Eigen::VectorXd b(50);
  for (Eigen::Index i = 0; i < A.size(); ++i) A.data()[i] = 2 * rng.next_open01() - 1;
  for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = 2 * rng.next_open01() - 1;
  const auto r = lstsq_svd(A, b, 1e-13);
  const Eigen::VectorXd x = (A.transpose() * A).ldlt().solve(A.transpose() * b);
  EXPECT_NEAR(r.residual, (A * x - b).norm(), 1e-10);
  EXPECT_LE((r.alpha - x).norm(), 1e-10 * x.norm());
}

TEST(Lstsq, ShapeErrors) {
  EXPECT_THROW(lstsq_svd(Eigen::MatrixXd(), Eigen::VectorXd(), 1e-13), std::invalid_argument);
  EXPECT_THROW(lstsq_svd(Eigen::MatrixXd::Identity(3, 3), Eigen::VectorXd::Ones(2), 1e-13),
               std::invalid_argument);
}

TEST(Loss, ZeroForExactRepresentation) {
  const auto p = manufactured("cos(0.7*x)+2*sin(1.3*x)", 1.0);
  EXPECT_LE(loss_eval(p, two_feature_model()), 1e-20);
}

TEST(Loss, ZeroModelGivesDataNorm) {
  // u = sin(x), a = 1, c = 0: f = -sin(x), g = sin(+-1)
  auto p = manufactured("sin(x)", 1.0, 0.0);
  p.gamma = 2.0;
  FeatureSample s;
  s.k = {0.5};
  const TrialModel zero = RandomFeatureModel(s);
  const double f2 = 1.0 - std::sin(1.0) * std::cos(1.0);
  const double g2 = 2.0 * std::sin(1.0) * std::sin(1.0);
  EXPECT_NEAR(loss_eval(p, zero), f2 + 2.0 * g2, 1e-13);
}

TEST(Loss, QuadratureRefinement) {
  const auto p = manufactured("exp(x)+sin(3*x)", 1.0);
  RandomFeatureModel m(sample_frequencies(6, 2.0, 1));
  for (std::size_t i = 0; i < m.alpha().size(); ++i) m.alpha()[i] = 0.1 * (i + 1.0);
  const double l1 = loss_eval(p, m, {16, 8});
  const double l2 = loss_eval(p, m, {32, 8});
  EXPECT_LT(std::abs(l1 - l2), 1e-8 * l2);
}

TEST(ErrorNorms, ClosedFormIntegral) {
  FeatureSample s;
  s.k = {1.0};
  const TrialModel zero = RandomFeatureModel(s);
  const auto e = error_norms(zero, ManufacturedSolution(Expression::parse("sin(x)")), Domain(1.0));
  EXPECT_NEAR(e.e0 * e.e0, 1.0 - std::sin(1.0) * std::cos(1.0), 1e-14);
  EXPECT_NEAR(e.e1 * e.e1, 1.0 + std::sin(1.0) * std::cos(1.0), 1e-14);
  EXPECT_NEAR(e.u0, e.e0, 1e-15);
}

TEST(ErrorNorms, ExactRepresentation) {
  const auto e = error_norms(two_feature_model(),
                             ManufacturedSolution(Expression::parse("cos(0.7*x)+2*sin(1.3*x)")),
                             Domain(1.0));
  EXPECT_LE(e.e0, 1e-12);
  EXPECT_LE(e.e1, 1e-12);
  EXPECT_LE(e.e2, 1e-12);
}

TEST(ErrorNorms, FirstDerivativeNormUnderPerturbation) {
  // adding eps*sin(k x) to an exact model changes e1 by eps*||k cos(k x)||
  auto m = two_feature_model();
  const double eps = 1e-3, k = 1.3;
  m.alpha()[3] += eps;
  const auto e = error_norms(m, ManufacturedSolution(Expression::parse("cos(0.7*x)+2*sin(1.3*x)")),
                             Domain(1.0));
  const double expected = eps * k * std::sqrt(1.0 + std::sin(2 * k) / (2 * k));
  EXPECT_NEAR(e.e1, expected, 1e-12);
}

TEST(Solve, SpectralAccuracyForAnalyticSolution) {
  const auto p = manufactured("sin(3*x)", 0.5);
  FeatureConfig fc;
  fc.N = 20;
  fc.S = 6.0;
  fc.seed = 0;
  const auto r = solve_problem(p, fc, equidistant_grid(200, 0.5));
  ASSERT_TRUE(r.errors.has_value());
  EXPECT_LE(r.relative_e0(), 1e-6);
  EXPECT_EQ(r.rows, 200u);
  EXPECT_EQ(r.cols, 40u);
}

TEST(Solve, SingleFeatureLossIsBounded) {
  const auto p = manufactured("sin(3*x)", 0.5);
  FeatureConfig fc;
  fc.N = 1;
  fc.S = 0.1;
  SolveOptions o;
  o.row_weights = true;
  const auto r = solve_problem(p, fc, equidistant_grid(50, 0.5), o);
  FeatureSample s;
  s.k = {1.0};
  const double zero_loss = loss_eval(p, RandomFeatureModel(s));
  EXPECT_GE(r.loss, 0.0);
  EXPECT_LE(r.loss, zero_loss);
}

TEST(Solve, CollocationSaturationWithQuadratureWeights) {
  const auto p = manufactured("sin(3*x)+exp(x)", 0.5);
  SolveOptions o;
  o.row_weights = true;
  for (std::uint64_t seed : {1, 5}) {
    FeatureConfig fc;
    fc.N = 4;
    fc.S = 4.0;
    fc.seed = seed;
    const double e1 = solve_problem(p, fc, equidistant_grid(80, 0.5), o).errors->e0;
    const double e2 = solve_problem(p, fc, equidistant_grid(160, 0.5), o).errors->e0;
    EXPECT_GT(e1, 1e-10);
    EXPECT_LT(std::abs(e1 - e2), 0.1 * e1) << "seed " << seed;
  }
}

TEST(Solve, PumRecoversSmoothSolution) {
  const auto p = manufactured("sin(3*x)+exp(x)", 1.0);
  FeatureConfig fc;
  fc.S = 1.0;
  fc.pum = PumConfig{4, 8};
  const auto r = solve_problem(p, fc, equidistant_grid(401, 1.0));
  EXPECT_LE(r.relative_e0(), 1e-8);
  EXPECT_EQ(r.cols, 80u);
}

TEST(Solve, Deterministic) {
  const auto p = manufactured("exp(x)", 0.5);
  FeatureConfig fc;
  fc.N = 10;
  fc.seed = 17;
  const auto a = solve_problem(p, fc, equidistant_grid(100, 0.5));
  const auto b = solve_problem(p, fc, equidistant_grid(100, 0.5));
  EXPECT_EQ(a.alpha, b.alpha);
  EXPECT_EQ(a.loss, b.loss);
}

TEST(Solve, RejectsBadCutoff) {
  SolveOptions o;
  o.rcond = 0.0;
  EXPECT_THROW(o.validate(), std::invalid_argument);
}
