#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "rfm/rng.hpp"

namespace rfm {

/// Hidden weights k_i ~ Unif(0, S), pairwise distinct.
struct FeatureSample {
  std::vector<double> k;
  double S = 1.0;
  std::uint64_t seed = 0;

  std::size_t size() const { return k.size(); }
};

/// Draws N frequencies from SplitMix64(seed): k = (next_u64 >> 11) * 2^-53 * S,
/// zeros and exact repeats redrawn.
inline FeatureSample sample_frequencies(std::size_t N, double S, std::uint64_t seed) {
  if (N == 0) throw std::invalid_argument("sample_frequencies: N must be >= 1");
  if (!(S > 0.0)) throw std::invalid_argument("sample_frequencies: S must be positive");
  SplitMix64 rng(seed);
  FeatureSample out{{}, S, seed};
  out.k.reserve(N);
  while (out.k.size() < N) {
    const double k = rng.next_open01() * S;
    if (k >= S) continue;
    if (std::find(out.k.begin(), out.k.end(), k) != out.k.end()) continue;
    out.k.push_back(k);
  }
  return out;
}

inline void write_frequencies_csv(std::ostream& os, const FeatureSample& sample) {
  os << "# rfm frequencies v1 seed=" << sample.seed << " S=" << sample.S << "\n";
  os << "i,k\n";
  os.precision(17);
  for (std::size_t i = 0; i < sample.k.size(); ++i) os << i << "," << sample.k[i] << "\n";
}

enum class TrigKind { cos, sin };

/// l-th derivative of cos(k t) or sin(k t) with respect to t.
inline double trig_derivative(TrigKind kind, double k, double t, int l) {
  const int shift = (kind == TrigKind::sin ? l + 3 : l) % 4;
  const double kl = l == 0 ? 1.0 : (l == 1 ? k : (l == 2 ? k * k : std::pow(k, l)));
  switch (shift) {
    case 0: return kl * std::cos(k * t);
    case 1: return -kl * std::sin(k * t);
    case 2: return -kl * std::cos(k * t);
    default: return kl * std::sin(k * t);
  }
}

/// u_N(x) = sum_i alpha_i cos(k_i x) + alpha_{N+i} sin(k_i x).
class RandomFeatureModel {
 public:
  RandomFeatureModel(FeatureSample sample, std::vector<double> alpha)
      : sample_(std::move(sample)), alpha_(std::move(alpha)) {
    if (alpha_.size() != 2 * sample_.size())
      throw std::invalid_argument("RandomFeatureModel: alpha must have length 2N");
  }

  explicit RandomFeatureModel(FeatureSample sample)
      : RandomFeatureModel(sample, std::vector<double>(2 * sample.size(), 0.0)) {}

  const FeatureSample& sample() const { return sample_; }
  const std::vector<double>& alpha() const { return alpha_; }
  std::vector<double>& alpha() { return alpha_; }
  std::size_t num_frequencies() const { return sample_.size(); }

 private:
  FeatureSample sample_;
  std::vector<double> alpha_;
};

inline double eval_model(const RandomFeatureModel& m, double x, int order = 0) {
  if (order < 0 || order > 2) throw std::invalid_argument("eval_model: order must be 0, 1 or 2");
  const auto& k = m.sample().k;
  const auto& a = m.alpha();
  const std::size_t N = k.size();
  double sum = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    sum += a[i] * trig_derivative(TrigKind::cos, k[i], x, order);
    sum += a[N + i] * trig_derivative(TrigKind::sin, k[i], x, order);
  }
  return sum;
}

/// Partition-of-unity bump on [-5/4, 5/4) with a flat top on [-3/4, 3/4);
/// returns the order-l derivative of the branch containing t (C^1 overall).
inline double pou_bump(double t, int order = 0) {
  constexpr double pi = std::numbers::pi;
  if (order < 0 || order > 2) throw std::invalid_argument("pou_bump: order must be 0, 1 or 2");
  double side = 0.0;  // +1 on the rising ramp, -1 on the falling ramp
  if (t >= -1.25 && t < -0.75) side = 1.0;
  else if (t >= -0.75 && t < 0.75) return order == 0 ? 1.0 : 0.0;
  else if (t >= 0.75 && t < 1.25) side = -1.0;
  else return 0.0;
  const double arg = 2.0 * pi * t;
  switch (order) {
    case 0: return 0.5 * (1.0 + side * std::sin(arg));
    case 1: return side * pi * std::cos(arg);
    default: return -side * 2.0 * pi * pi * std::sin(arg);
  }
}

/// P+1 centers x_p = -R + 2 r p with r = R / P.
class PoUGrid {
 public:
  PoUGrid(double R, int P) : R_(R), P_(P) {
    if (!(R > 0.0)) throw std::invalid_argument("PoUGrid: R must be positive");
    if (P < 1) throw std::invalid_argument("PoUGrid: P must be >= 1 (use the plain model for P = 0)");
    r_ = R / P;
  }

  double R() const { return R_; }
  int P() const { return P_; }
  int num_patches() const { return P_ + 1; }
  double r() const { return r_; }
  double center(int p) const { return -R_ + 2.0 * r_ * p; }
  /// Snapped onto +-3/4 and +-5/4 when within rounding, so that neighbouring
  /// patches pick the same one-sided branch of phi''.
  double local_coordinate(int p, double x) const {
    const double t = (x - center(p)) / r_;
    for (double b : {-1.25, -0.75, 0.75, 1.25})
      if (std::abs(t - b) <= 1e-12) return b;
    return t;
  }

  /// phi_p vanishes identically outside [-5/4, 5/4) in the local coordinate.
  bool in_support(int p, double x) const {
    const double t = local_coordinate(p, x);
    return t >= -1.25 && t < 1.25;
  }

  double phi(int p, double x, int order = 0) const {
    if (!in_support(p, x)) return 0.0;
    return pou_bump(local_coordinate(p, x), order) / std::pow(r_, order);
  }

  /// Points where some phi_p changes branch: x_p +- 3r/4 and x_p +- 5r/4.
  std::vector<double> breakpoints() const {
    std::vector<double> out;
    for (int p = 0; p <= P_; ++p)
      for (double t : {-1.25, -0.75, 0.75, 1.25}) out.push_back(center(p) + t * r_);
    return out;
  }

 private:
  double R_;
  int P_;
  double r_;
};

/// u_N(x) = sum_p phi_p(x) v_p(x) with local models in the normalized coordinate l_p(x).
struct GlobalPUMModel {
  PoUGrid grid;
  std::vector<RandomFeatureModel> locals;

  GlobalPUMModel(PoUGrid g, std::vector<RandomFeatureModel> l) : grid(g), locals(std::move(l)) {
    if (locals.size() != static_cast<std::size_t>(grid.num_patches()))
      throw std::invalid_argument("GlobalPUMModel: need one local model per patch");
    const std::size_t np = locals.front().num_frequencies();
    for (const auto& m : locals)
      if (m.num_frequencies() != np)
        throw std::invalid_argument("GlobalPUMModel: patches must share N_p");
  }

  std::size_t local_frequencies() const { return locals.front().num_frequencies(); }
  std::size_t num_coefficients() const { return 2 * locals.size() * local_frequencies(); }
};

/// Independent local samples: patch p draws from the p-th split of SplitMix64(seed).
inline std::vector<FeatureSample> sample_local_frequencies(int num_patches, std::size_t Np,
                                                           double S, std::uint64_t seed) {
  SplitMix64 parent(seed);
  std::vector<FeatureSample> out;
  out.reserve(num_patches);
  for (int p = 0; p < num_patches; ++p) {
    auto s = sample_frequencies(Np, S, parent.next_u64());
    s.seed = seed;
    out.push_back(std::move(s));
  }
  return out;
}

inline GlobalPUMModel make_pum_model(const PoUGrid& grid, std::size_t Np, double S,
                                     std::uint64_t seed) {
  std::vector<RandomFeatureModel> locals;
  for (auto& s : sample_local_frequencies(grid.num_patches(), Np, S, seed))
    locals.emplace_back(std::move(s));
  return GlobalPUMModel(grid, std::move(locals));
}

/// (phi v)^(l) = sum_j C(l, j) phi^(j) v^(l-j), each factor carrying 1/r per derivative.
inline double eval_pum_model(const GlobalPUMModel& g, double x, int order = 0) {
  if (order < 0 || order > 2) throw std::invalid_argument("eval_pum_model: order must be 0, 1 or 2");
  static constexpr double binom[3][3] = {{1, 0, 0}, {1, 1, 0}, {1, 2, 1}};
  const double r = g.grid.r();
  double sum = 0.0;
  for (int p = 0; p < g.grid.num_patches(); ++p) {
    if (!g.grid.in_support(p, x)) continue;
    const double t = g.grid.local_coordinate(p, x);
    for (int j = 0; j <= order; ++j) {
      const double phi = pou_bump(t, j);
      if (phi == 0.0) continue;
      const double v = eval_model(g.locals[p], t, order - j);
      sum += binom[order][j] * phi * v / std::pow(r, order);
    }
  }
  return sum;
}

/// max over n equidistant points of |sum_p phi_p(x) - 1|.
inline double partition_check(const PoUGrid& grid, int n_samples) {
  if (n_samples < 2) throw std::invalid_argument("partition_check: need at least 2 samples");
  double worst = 0.0;
  for (int i = 0; i < n_samples; ++i) {
    const double x = -grid.R() + 2.0 * grid.R() * i / (n_samples - 1);
    double s = 0.0;
    for (int p = 0; p < grid.num_patches(); ++p) s += grid.phi(p, x);
    worst = std::max(worst, std::abs(s - 1.0));
  }
  return worst;
}

}  // namespace rfm
