#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

#include "rfm/envelope.hpp"
#include "rfm/expression.hpp"

namespace rfm {

/// Omega = (-R, R).
class Domain {
 public:
  explicit Domain(double R) : R_(R) {
    if (!(R > 0.0) || !std::isfinite(R)) throw std::invalid_argument("Domain: R must be positive");
  }
  double R() const { return R_; }
  bool contains_closed(double x) const { return x >= -R_ && x <= R_; }

 private:
  double R_;
};

/// Pointwise field on [-R, R] with a sup-norm bound. Derivatives are optional:
/// the solver only ever evaluates values of a, b, c.
struct ScalarField {
  std::function<double(double)> value;
  std::function<double(double)> d1;
  std::function<double(double)> d2;
  double sup_bound = 0.0;

  double operator()(double x) const { return value(x); }

  static ScalarField constant(double c) {
    return {[c](double) { return c; }, [](double) { return 0.0; }, [](double) { return 0.0; },
            std::abs(c)};
  }

  /// The sup bound is the certified envelope M when the expression is Gevrey,
  /// otherwise the max over a 4001-point grid.
  static ScalarField from_expression(const Expression& e, const Domain& dom) {
    ScalarField f;
    f.value = [e](double x) { return e(x); };
    f.d1 = [e](double x) { return e.derivative(x, 1); };
    f.d2 = [e](double x) { return e.derivative(x, 2); };
    if (const auto env = e.envelope(dom.R())) {
      f.sup_bound = env->M;
    } else {
      f.sup_bound = sampled_sup(f.value, dom, 4001);
    }
    return f;
  }

  static double sampled_sup(const std::function<double(double)>& g, const Domain& dom, int n) {
    double m = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = -dom.R() + 2.0 * dom.R() * i / (n - 1);
      m = std::max(m, std::abs(g(x)));
    }
    return m;
  }
};

/// B u = g1 u' + g2 u at x = -R (left) and x = R (right).
struct BoundaryOperator {
  double g1_left = 0.0, g1_right = 0.0;
  double g2_left = 1.0, g2_right = 1.0;
  double g_left = 0.0, g_right = 0.0;

  static BoundaryOperator dirichlet(double g_left = 0.0, double g_right = 0.0) {
    return {0.0, 0.0, 1.0, 1.0, g_left, g_right};
  }

  double g1_norm() const { return std::hypot(g1_left, g1_right); }
  double g2_norm() const { return std::hypot(g2_left, g2_right); }
  bool is_dirichlet() const {
    return g1_left == 0.0 && g1_right == 0.0 && g2_left == 1.0 && g2_right == 1.0;
  }
};

/// Closed-form solution with derivatives of every order.
class ManufacturedSolution {
 public:
  explicit ManufacturedSolution(Expression e, int max_derivative_order = 64)
      : expr_(std::move(e)), max_order_(max_derivative_order) {}

  double u(double x) const { return expr_(x); }
  double du(double x) const { return expr_.derivative(x, 1); }
  double d2u(double x) const { return expr_.derivative(x, 2); }
  double derivative(double x, int n) const { return expr_.derivative(x, n); }

  /// u^(n)(0); orders above the configured maximum are rejected.
  double derivative_at_zero(int n) const {
    if (n < 0 || n > max_order_)
      throw std::invalid_argument("derivative order " + std::to_string(n) + " unavailable");
    return expr_.derivative(0.0, n);
  }

  int max_derivative_order() const { return max_order_; }
  std::optional<GevreyEnvelope> envelope(double R) const { return expr_.envelope(R); }
  const Expression& expression() const { return expr_; }

 private:
  Expression expr_;
  int max_order_;
};

struct PDEProblem {
  Domain domain{1.0};
  ScalarField a = ScalarField::constant(1.0);
  ScalarField b = ScalarField::constant(0.0);
  ScalarField c = ScalarField::constant(0.0);
  ScalarField f = ScalarField::constant(0.0);
  BoundaryOperator boundary = BoundaryOperator::dirichlet();
  double gamma = 1.0;
  std::optional<ManufacturedSolution> exact;

  double R() const { return domain.R(); }
  double lambda1() const { return a.sup_bound; }
  double lambda2() const { return b.sup_bound; }
  double lambda3() const { return c.sup_bound; }
};

/// L u = a u'' + b u' + c u.
inline double apply_L(const PDEProblem& p, const ManufacturedSolution& u, double x) {
  if (!p.domain.contains_closed(x)) throw std::domain_error("apply_L: x outside [-R, R]");
  return p.a(x) * u.d2u(x) + p.b(x) * u.du(x) + p.c(x) * u.u(x);
}

/// f := L u and g := B u at +-R, so that u solves the resulting problem exactly.
inline PDEProblem make_manufactured(const ManufacturedSolution& u, ScalarField a, ScalarField b,
                                    ScalarField c, BoundaryOperator boundary, const Domain& domain,
                                    double gamma = 1.0) {
  if (!(gamma > 0.0)) throw std::invalid_argument("make_manufactured: gamma must be positive");
  PDEProblem p;
  p.domain = domain;
  p.a = std::move(a);
  p.b = std::move(b);
  p.c = std::move(c);
  p.gamma = gamma;
  p.exact = u;
  const auto af = p.a.value, bf = p.b.value, cf = p.c.value;
  p.f.value = [u, af, bf, cf](double x) {
    return af(x) * u.d2u(x) + bf(x) * u.du(x) + cf(x) * u.u(x);
  };
  p.f.sup_bound = ScalarField::sampled_sup(p.f.value, domain, 4001);
  const double R = domain.R();
  boundary.g_left = boundary.g1_left * u.du(-R) + boundary.g2_left * u.u(-R);
  boundary.g_right = boundary.g1_right * u.du(R) + boundary.g2_right * u.u(R);
  p.boundary = boundary;
  return p;
}

}  // namespace rfm
