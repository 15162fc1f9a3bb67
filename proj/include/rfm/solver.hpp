#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "rfm/assembly.hpp"
#include "rfm/errors.hpp"
#include "rfm/features.hpp"
#include "rfm/problem.hpp"
#include "rfm/quadrature.hpp"

namespace rfm {

/// rcond is relative to sigma_1. Singular values of the feature matrix decay
/// superexponentially, so an untruncated solve amplifies rounding without bound.
struct SolveOptions {
  double rcond = 1e-13;
  int quadrature_panels = 64;
  int nodes_per_panel = 16;
  bool row_weights = false;  // scale interior rows by sqrt(trapezoid weight)

  void validate() const {
    if (!(rcond > 0.0 && rcond < 1.0)) throw std::invalid_argument("rcond must lie in (0, 1)");
    if (quadrature_panels < 1 || nodes_per_panel < 1)
      throw std::invalid_argument("quadrature sizes must be positive");
  }
};

struct LstsqResult {
  Eigen::VectorXd alpha;
  Eigen::Index rank = 0;
  double residual = 0.0;
  Eigen::VectorXd singular_values;  // descending
};

/// Minimum-norm least squares through the SVD, discarding sigma_i <= rcond * sigma_1.
inline LstsqResult lstsq_svd(const Eigen::MatrixXd& A, const Eigen::VectorXd& rhs, double rcond) {
  if (A.size() == 0) throw std::invalid_argument("lstsq_svd: empty matrix");
  if (A.rows() != rhs.size()) throw std::invalid_argument("lstsq_svd: shape mismatch");
  Eigen::BDCSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  LstsqResult out;
  out.singular_values = svd.singularValues();
  out.alpha = Eigen::VectorXd::Zero(A.cols());
  const auto& s = out.singular_values;
  if (s.size() == 0 || s(0) == 0.0) {
    out.residual = rhs.norm();
    return out;
  }
  const double cut = rcond * s(0);
  Eigen::VectorXd coeff = svd.matrixU().transpose() * rhs;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cut) {
      coeff(i) /= s(i);
      ++out.rank;
    } else {
      coeff(i) = 0.0;
    }
  }
  out.alpha = svd.matrixV() * coeff;
  out.residual = (A * out.alpha - rhs).norm();
  return out;
}

using TrialModel = std::variant<RandomFeatureModel, GlobalPUMModel>;

inline double eval_trial(const TrialModel& m, double x, int order) {
  return std::visit(
      [&](const auto& model) {
        if constexpr (std::is_same_v<std::decay_t<decltype(model)>, RandomFeatureModel>)
          return eval_model(model, x, order);
        else
          return eval_pum_model(model, x, order);
      },
      m);
}

/// Panel breakpoints where the trial function is only piecewise smooth.
inline std::vector<double> trial_breakpoints(const TrialModel& m) {
  if (const auto* g = std::get_if<GlobalPUMModel>(&m)) return g->grid.breakpoints();
  return {};
}

struct QuadratureSpec {
  int panels = 64;
  int nodes_per_panel = 16;
};

/// ||L u_N - f||^2 over (-R, R) by composite Gauss-Legendre plus
/// gamma * [(B u_N - g)(-R)^2 + (B u_N - g)(R)^2].
inline double loss_eval(const PDEProblem& p, const TrialModel& model, const QuadratureSpec& q = {}) {
  const double R = p.R();
  CompositeQuadrature quad(-R, R, q.panels, q.nodes_per_panel, trial_breakpoints(model));
  const double interior = quad.integrate([&](double x) {
    const double Lu = p.a(x) * eval_trial(model, x, 2) + p.b(x) * eval_trial(model, x, 1) +
                      p.c(x) * eval_trial(model, x, 0);
    const double res = Lu - p.f(x);
    return res * res;
  });
  const auto& bc = p.boundary;
  const double left = bc.g1_left * eval_trial(model, -R, 1) + bc.g2_left * eval_trial(model, -R, 0) -
                      bc.g_left;
  const double right = bc.g1_right * eval_trial(model, R, 1) +
                       bc.g2_right * eval_trial(model, R, 0) - bc.g_right;
  return interior + p.gamma * (left * left + right * right);
}

struct ErrorNorms {
  double e0 = 0, e1 = 0, e2 = 0;  // L2 norms of (u_N - u)^(l)
  double u0 = 0;                  // ||u||_{L2}, for relative errors
};

inline ErrorNorms error_norms(const TrialModel& model, const ManufacturedSolution& u,
                              const Domain& dom, const QuadratureSpec& q = {}) {
  const double R = dom.R();
  CompositeQuadrature quad(-R, R, q.panels, q.nodes_per_panel, trial_breakpoints(model));
  ErrorNorms out;
  double s0 = 0, s1 = 0, s2 = 0, su = 0;
  const auto& xs = quad.points();
  const auto& ws = quad.weights();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double x = xs[i], w = ws[i];
    const double d0 = eval_trial(model, x, 0) - u.u(x);
    const double d1 = eval_trial(model, x, 1) - u.du(x);
    const double d2 = eval_trial(model, x, 2) - u.d2u(x);
    s0 += w * d0 * d0;
    s1 += w * d1 * d1;
    s2 += w * d2 * d2;
    su += w * u.u(x) * u.u(x);
  }
  out.e0 = std::sqrt(s0);
  out.e1 = std::sqrt(s1);
  out.e2 = std::sqrt(s2);
  out.u0 = std::sqrt(su);
  return out;
}

struct PumConfig {
  int P = 1;
  std::size_t Np = 1;
};

struct FeatureConfig {
  std::size_t N = 1;  // plain model; ignored when pum is set
  double S = 1.0;
  std::uint64_t seed = 0;
  std::optional<PumConfig> pum;
};

struct SolveResult {
  Eigen::VectorXd alpha;
  double residual_2norm = 0.0;
  Eigen::Index numerical_rank = 0;
  double loss = 0.0;
  std::optional<ErrorNorms> errors;  // present when the problem carries its exact solution
  double kappa = 0.0;                // sigma_1 / sigma_M, +inf when singular
  Eigen::VectorXd singular_values;
  std::size_t rows = 0, cols = 0;
  std::vector<std::string> warnings;
  TrialModel model;

  explicit SolveResult(TrialModel m) : model(std::move(m)) {}

  double relative_e0() const {
    if (!errors) return std::numeric_limits<double>::quiet_NaN();
    return errors->e0 / errors->u0;
  }
};

inline TrialModel make_trial_model(const FeatureConfig& fc, double R) {
  if (fc.pum) {
    if (fc.pum->Np == 0) throw std::invalid_argument("N_p must be >= 1");
    return make_pum_model(PoUGrid(R, fc.pum->P), fc.pum->Np, fc.S, fc.seed);
  }
  return RandomFeatureModel(sample_frequencies(fc.N, fc.S, fc.seed));
}

inline Assembly assemble(const PDEProblem& problem, const TrialModel& model,
                         const CollocationGrid& grid) {
  if (const auto* g = std::get_if<GlobalPUMModel>(&model)) return assemble_pum(problem, *g, grid);
  return assemble_plain(problem, std::get<RandomFeatureModel>(model).sample(), grid);
}

inline void set_coefficients(TrialModel& model, const Eigen::VectorXd& alpha) {
  if (auto* plain = std::get_if<RandomFeatureModel>(&model)) {
    plain->alpha().assign(alpha.data(), alpha.data() + alpha.size());
    return;
  }
  auto& g = std::get<GlobalPUMModel>(model);
  const auto np2 = static_cast<Eigen::Index>(2 * g.local_frequencies());
  for (std::size_t p = 0; p < g.locals.size(); ++p) {
    auto& a = g.locals[p].alpha();
    const Eigen::Index off = np2 * static_cast<Eigen::Index>(p);
    a.assign(alpha.data() + off, alpha.data() + off + np2);
  }
}

/// Condition number sigma_1 / sigma_M with M = min(rows, cols).
inline double condition_number(const Eigen::VectorXd& sigma) {
  if (sigma.size() == 0) return std::numeric_limits<double>::infinity();
  const double smin = sigma(sigma.size() - 1);
  if (smin == 0.0) return std::numeric_limits<double>::infinity();
  return sigma(0) / smin;
}

inline SolveResult solve_problem(const PDEProblem& problem, const FeatureConfig& features,
                                 const CollocationGrid& grid, const SolveOptions& options = {}) {
  options.validate();
  SolveResult out(make_trial_model(features, problem.R()));
  Assembly sys = assemble(problem, out.model, grid);
  out.warnings = sys.matrix.warnings;
  if (options.row_weights) {
    const double w = std::sqrt(2.0 * grid.R / static_cast<double>(grid.n() - 1));
    const auto ni = static_cast<Eigen::Index>(grid.interior.size());
    sys.matrix.values.topRows(ni) *= w;
    sys.rhs.head(ni) *= w;
  }
  if (!sys.matrix.values.allFinite() || !sys.rhs.allFinite())
    throw NumericalError("non-finite entry in assembled system");
  out.rows = static_cast<std::size_t>(sys.matrix.values.rows());
  out.cols = static_cast<std::size_t>(sys.matrix.values.cols());

  const LstsqResult ls = lstsq_svd(sys.matrix.values, sys.rhs, options.rcond);
  if (!ls.alpha.allFinite()) throw NumericalError("non-finite least-squares solution");
  out.alpha = ls.alpha;
  out.residual_2norm = ls.residual;
  out.numerical_rank = ls.rank;
  out.singular_values = ls.singular_values;
  out.kappa = condition_number(ls.singular_values);
  set_coefficients(out.model, ls.alpha);

  const QuadratureSpec q{options.quadrature_panels, options.nodes_per_panel};
  out.loss = loss_eval(problem, out.model, q);
  if (problem.exact) out.errors = error_norms(out.model, *problem.exact, problem.domain, q);
  if (!std::isfinite(out.loss)) throw NumericalError("non-finite loss");
  return out;
}

}  // namespace rfm
