#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace rfm {

struct GaussLegendreRule {
  std::vector<double> nodes;    // on [-1, 1], ascending
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule by Newton iteration on P_n with the
/// Chebyshev initial guess. Accurate to a few ulp for n up to a few hundred.
inline GaussLegendreRule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  GaussLegendreRule rule;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // recompute derivative at the converged node
    double p0 = 1.0, p1 = z;
    for (int k = 2; k <= n; ++k) {
      const double pk = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    dp = (n == 1) ? 1.0 : n * (z * p1 - p0) / (z * z - 1.0);
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    rule.nodes[i] = -z;
    rule.nodes[n - 1 - i] = z;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

/// Composite Gauss-Legendre on [lo, hi]. Breakpoints inside (lo, hi) cut the
/// interval into segments; roughly `panels` equal panels are spread over the
/// segments in proportion to their length, never fewer than one per segment.
class CompositeQuadrature {
 public:
  CompositeQuadrature(double lo, double hi, int panels, int nodes_per_panel = 16,
                      std::vector<double> breakpoints = {})
      : rule_(gauss_legendre(nodes_per_panel)) {
    if (!(hi > lo)) throw std::invalid_argument("CompositeQuadrature: empty interval");
    if (panels < 1) throw std::invalid_argument("CompositeQuadrature: panels must be >= 1");
    std::vector<double> cuts{lo, hi};
    for (double b : breakpoints)
      if (b > lo && b < hi) cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end(),
                           [](double a, double b) { return std::abs(a - b) < 1e-14; }),
               cuts.end());
    // distribute panels in proportion to segment length, at least one each
    const double len = hi - lo;
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
      const double a = cuts[s], b = cuts[s + 1];
      const int np = std::max(1, static_cast<int>(std::ceil(panels * (b - a) / len)));
      const double h = (b - a) / np;
      for (int q = 0; q < np; ++q) {
        const double pa = a + q * h;
        const double mid = pa + 0.5 * h, rad = 0.5 * h;
        for (std::size_t k = 0; k < rule_.nodes.size(); ++k) {
          points_.push_back(mid + rad * rule_.nodes[k]);
          weights_.push_back(rad * rule_.weights[k]);
        }
      }
    }
  }

  const std::vector<double>& points() const { return points_; }
  const std::vector<double>& weights() const { return weights_; }

  template <class F>
  double integrate(F&& f) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < points_.size(); ++i) sum += weights_[i] * f(points_[i]);
    return sum;
  }

 private:
  GaussLegendreRule rule_;
  std::vector<double> points_;
  std::vector<double> weights_;
};

}  // namespace rfm
