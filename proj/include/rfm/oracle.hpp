#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rfm/features.hpp"
#include "rfm/problem.hpp"
#include "rfm/quadrature.hpp"
#include "rfm/rng.hpp"

namespace rfm {

namespace detail {

// Error-free transformations for compensated polynomial expansion.
inline void two_sum(double a, double b, double& s, double& e) {
  s = a + b;
  const double bb = s - a;
  e = (a - (s - bb)) + (b - bb);
}

inline void two_prod(double a, double b, double& p, double& e) {
  p = a * b;
  e = std::fma(a, b, -p);
}

/// sigma_0..sigma_n of xs, read off prod (t + x_i) expanded with compensated updates.
inline std::vector<double> symmetric_values(const std::vector<double>& xs) {
  const std::size_t n = xs.size();
  std::vector<double> s(n + 1, 0.0), err(n + 1, 0.0);
  s[0] = 1.0;
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t m = v + 1; m >= 1; --m) {
      double p, ep, t, et;
      two_prod(xs[v], s[m - 1], p, ep);
      two_sum(s[m], p, t, et);
      err[m] = err[m] + xs[v] * err[m - 1] + ep + et;
      s[m] = t;
    }
  }
  for (std::size_t m = 0; m <= n; ++m) s[m] += err[m];
  return s;
}

}  // namespace detail

/// Elementary symmetric functions sigma_m of xs, with the leave-one-out table sigma_m^i.
struct SymFuncTable {
  std::vector<double> values;                   // sigma_0..sigma_n
  std::vector<std::vector<double>> leave_one_out;  // [i][m], m = 0..n-1

  double sigma(std::size_t m) const { return m < values.size() ? values[m] : 0.0; }
  double sigma_without(std::size_t i, std::size_t m) const {
    const auto& row = leave_one_out.at(i);
    return m < row.size() ? row[m] : 0.0;
  }
};

inline SymFuncTable elementary_symmetric(const std::vector<double>& xs) {
  SymFuncTable t;
  t.values = detail::symmetric_values(xs);
  t.leave_one_out.reserve(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    std::vector<double> reduced;
    reduced.reserve(xs.size() - 1);
    for (std::size_t j = 0; j < xs.size(); ++j)
      if (j != i) reduced.push_back(xs[j]);
    t.leave_one_out.push_back(detail::symmetric_values(reduced));
  }
  return t;
}

/// V has rows of powers: V(j, i) = x_i^j. The inverse is
/// v_ij = (-1)^{j-1} sigma^i_{n-j} / prod_{l != i} (x_l - x_i), 1-based.
inline Eigen::MatrixXd vandermonde_inverse(const std::vector<double>& xs) {
  const std::size_t n = xs.size();
  if (n == 0) throw std::invalid_argument("vandermonde_inverse: empty node set");
  const SymFuncTable t = elementary_symmetric(xs);
  Eigen::MatrixXd inv(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    double denom = 1.0;
    for (std::size_t l = 0; l < n; ++l) {
      if (l == i) continue;
      if (xs[l] == xs[i]) throw std::domain_error("vandermonde_inverse: repeated node");
      denom *= xs[l] - xs[i];
    }
    for (std::size_t j = 1; j <= n; ++j) {
      const double sign = (j - 1) % 2 == 0 ? 1.0 : -1.0;
      inv(i, j - 1) = sign * t.sigma_without(i, n - j) / denom;
    }
  }
  return inv;
}

inline Eigen::MatrixXd vandermonde(const std::vector<double>& xs) {
  const auto n = static_cast<Eigen::Index>(xs.size());
  Eigen::MatrixXd V(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double p = 1.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      V(j, i) = p;
      p *= xs[i];
    }
  }
  return V;
}

/// Derivatives of u at 0 and the Taylor-matching coefficients on nodes -k_i^2.
struct TaylorPair {
  Eigen::VectorXd F, G;  // F_i = u^(2i-2)(0), G_i = u^(2i-1)(0)
  Eigen::VectorXd X, Y;

  Eigen::VectorXd alpha() const {
    Eigen::VectorXd a(X.size() + Y.size());
    a << X, Y;
    return a;
  }
};

/// Solves V X = F and V K Y = G with V = V(-k_1^2, ..., -k_N^2), K = diag(k).
/// The closed-form inverse is specialised to these nodes: sigma_m(-k^2) = (-1)^m e_m(k^2)
/// folds every sign into the common factor (-1)^{N-1}, and prod (x_l - x_i) is formed as
/// prod (k_i - k_l)(k_i + k_l) without squaring first.
inline TaylorPair alphaV(const std::vector<double>& k, const ManufacturedSolution& u, std::size_t N) {
  if (k.size() != N) throw std::invalid_argument("alphaV: sample size must equal N");
  if (N == 0) throw std::invalid_argument("alphaV: N must be >= 1");
  TaylorPair out;
  out.F.resize(N);
  out.G.resize(N);
  for (std::size_t i = 0; i < N; ++i) {
    out.F(i) = u.derivative_at_zero(static_cast<int>(2 * i));
    out.G(i) = u.derivative_at_zero(static_cast<int>(2 * i + 1));
  }
  std::vector<double> k2(N);
  for (std::size_t i = 0; i < N; ++i) k2[i] = k[i] * k[i];
  const SymFuncTable e = elementary_symmetric(k2);
  out.X.resize(N);
  out.Y.resize(N);
  for (std::size_t i = 0; i < N; ++i) {
    double denom = 1.0;
    for (std::size_t l = 0; l < N; ++l) {
      if (l == i) continue;
      if (k[l] == k[i]) throw std::domain_error("alphaV: repeated frequency");
      denom *= (k[i] - k[l]) * (k[i] + k[l]);
    }
    // v_ij = (-1)^{j-1} sigma^i_{N-j}(-k^2) / prod_{l != i}(x_l - x_i) = (-1)^{N-1} e^i_{N-j}(k^2) / denom
    if ((N - 1) % 2 == 1) denom = -denom;
    double sx = 0.0, sy = 0.0;
    for (std::size_t j = 1; j <= N; ++j) {
      const double w = e.sigma_without(i, N - j);
      sx += w * out.F(j - 1);
      sy += w * out.G(j - 1);
    }
    out.X(i) = sx / denom;
    out.Y(i) = sy / denom / k[i];
  }
  return out;
}

enum class Parity { even, odd };

/// prod_{j != i} (C_u^2 + k_j^2) / |k_i^2 - k_j^2|.
inline double vandermonde_product(std::size_t i, const std::vector<double>& k, double C_u) {
  double prod = 1.0;
  for (std::size_t j = 0; j < k.size(); ++j) {
    if (j == i) continue;
    prod *= (C_u * C_u + k[j] * k[j]) / std::abs(k[i] * k[i] - k[j] * k[j]);
  }
  return prod;
}

/// |X_i| <= M_u [(2N-2)!]^s prod, |Y_i| <= M_u C_u [(2N-1)!]^s / k_i prod.
inline double alphaV_bound(std::size_t i, const std::vector<double>& k, double M_u, double C_u,
                           double s, std::size_t N, Parity parity) {
  if (i >= k.size()) throw std::out_of_range("alphaV_bound: index out of range");
  const double prod = vandermonde_product(i, k, C_u);
  const double n2 = 2.0 * static_cast<double>(N);
  if (parity == Parity::even) return M_u * std::exp(s * std::lgamma(n2 - 1.0)) * prod;
  return M_u * C_u * std::exp(s * std::lgamma(n2)) / k[i] * prod;
}

struct EventAi {
  double lhs = 1.0, rhs = 1.0;
  bool indicator = false;  // lhs < rhs
};

inline EventAi event_Ai(const std::vector<double>& k, std::size_t i, double C_u, double S,
                        double c_free) {
  if (!(c_free > 1.0)) throw std::invalid_argument("event_Ai: c must exceed 1");
  if (i >= k.size()) throw std::out_of_range("event_Ai: index out of range");
  EventAi e;
  e.lhs = vandermonde_product(i, k, C_u);
  const double w2 = (C_u / S) * (C_u / S);
  const double ki = k[i] / S;
  const double E = 2.0 * std::exp(c_free) * std::max(w2 / ki, (w2 + 1.0) / (ki + 1.0));
  e.rhs = std::pow(E, static_cast<double>(k.size() - 1));
  e.indicator = e.lhs < e.rhs;
  return e;
}

/// e^{-(c - 1 - ln c)(N - 1)}.
inline double event_Ai_complement_bound(std::size_t N, double c_free) {
  return std::exp(-(c_free - 1.0 - std::log(c_free)) * (static_cast<double>(N) - 1.0));
}

struct ProportionEstimate {
  std::size_t successes = 0, trials = 0;
  double frequency() const { return trials ? static_cast<double>(successes) / trials : 0.0; }
};

inline double binomial_sigma(double p, std::size_t trials) {
  return std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
}

struct Interval {
  double lo = 0, hi = 0;
};

/// Wilson score interval with z standard deviations.
inline Interval wilson_interval(std::size_t successes, std::size_t trials, double z = 3.0) {
  if (trials == 0) throw std::invalid_argument("wilson_interval: no trials");
  const double n = static_cast<double>(trials);
  const double p = successes / n;
  const double z2 = z * z;
  const double centre = (p + z2 / (2 * n)) / (1 + z2 / n);
  const double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / (1 + z2 / n);
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

/// Frequency of A_i^c (for i = 0) over independent draws of N frequencies on (0, S).
inline ProportionEstimate event_Ai_monte_carlo(std::size_t N, double c_free, double C_u, double S,
                                               std::size_t trials, std::uint64_t seed) {
  SplitMix64 seeds(seed);
  ProportionEstimate est{0, trials};
  for (std::size_t t = 0; t < trials; ++t) {
    const auto sample = sample_frequencies(N, S, seeds.next_u64());
    if (!event_Ai(sample.k, 0, C_u, S, c_free).indicator) ++est.successes;
  }
  return est;
}

struct MeanEstimate {
  double mean = 0, std_error = 0, bound = 0;
  std::size_t trials = 0;
  Interval ci(double z = 3.0) const { return {mean - z * std_error, mean + z * std_error}; }
};

/// k^{4N} [max((C_u/S)^2/(k/S), ((C_u/S)^2 + 1)/(k/S + 1))]^{2N-2}.
inline double lemma33_integrand(double k, std::size_t N, double S, double C_u) {
  const double w2 = (C_u / S) * (C_u / S);
  const double kh = k / S;
  const double m = std::max(w2 / kh, (w2 + 1.0) / (kh + 1.0));
  const double n = static_cast<double>(N);
  return std::exp(4.0 * n * std::log(k) + (2.0 * n - 2.0) * std::log(m));
}

/// S^4 max(C_u, S)^{4N-4} / (2N + 3).
inline double lemma33_bound(std::size_t N, double S, double C_u) {
  const double n = static_cast<double>(N);
  return std::pow(S, 4) * std::pow(std::max(C_u, S), 4 * n - 4) / (2 * n + 3);
}

/// Monte-Carlo estimate of E[lemma33_integrand(k_1)] for k_1 ~ Unif(0, S).
inline MeanEstimate lemma33_check(std::size_t N, double S, double C_u, std::size_t trials,
                                  std::uint64_t seed) {
  if (trials < 1000) throw std::invalid_argument("lemma33_check: need at least 1000 trials");
  if (N == 0) throw std::invalid_argument("lemma33_check: N must be >= 1");
  SplitMix64 rng(seed);
  double sum = 0, sum2 = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    const double v = lemma33_integrand(rng.next_open01() * S, N, S, C_u);
    sum += v;
    sum2 += v * v;
  }
  MeanEstimate est;
  est.trials = trials;
  const double n = static_cast<double>(trials);
  est.mean = sum / n;
  est.std_error = std::sqrt(std::max(0.0, sum2 / n - est.mean * est.mean) / (n - 1.0));
  est.bound = lemma33_bound(N, S, C_u);
  return est;
}

/// J(alpha) = int_0^1 exp(-lambda k^4 - lambda alpha^2 + 2 lambda delta alpha k^2) dk.
inline double jalpha(double alpha, double lambda, double delta, int n_nodes = 64) {
  if (!(lambda > 0.0)) throw std::invalid_argument("jalpha: lambda must be positive");
  const auto rule = gauss_legendre(n_nodes);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double k = 0.5 * (rule.nodes[i] + 1.0);
    const double k2 = k * k;
    sum += 0.5 * rule.weights[i] *
           std::exp(-lambda * k2 * k2 - lambda * alpha * alpha + 2.0 * lambda * delta * alpha * k2);
  }
  return sum;
}

struct JalphaMax {
  double alpha = 0, value = 0;
};

/// Max of J over alpha in [0, delta] on a uniform grid.
inline JalphaMax jalpha_max(double lambda, double delta, double step = 1e-3, int n_nodes = 64) {
  JalphaMax best{0.0, -1.0};
  const auto steps = static_cast<long>(std::floor(delta / step + 1e-9));
  for (long i = 0; i <= steps; ++i) {
    const double a = std::min(delta, i * step);
    const double v = jalpha(a, lambda, delta, n_nodes);
    if (v > best.value) best = {a, v};
  }
  return best;
}

/// c = Gamma(5/4) [2 erf(pi Gamma(5/4)^{-2} / 16) + 1].
inline double lemmaB1_constant() {
  const double g = std::tgamma(1.25);
  return g * (2.0 * std::erf(std::numbers::pi / (g * g) / 16.0) + 1.0);
}

inline double lemmaB1_bound(double lambda, double delta) {
  if (!(lambda > 0.0)) throw std::invalid_argument("lemmaB1_bound: lambda must be positive");
  if (!(delta > 1.0)) throw std::invalid_argument("lemmaB1_bound: delta must exceed 1");
  return lemmaB1_constant() * std::pow(lambda, -0.25) * std::exp(2.0 * lambda * (delta * delta - 1.0));
}

/// rho for a = c = 1 at every collocation point: sum (k^2 - 1)^2 / sum (k^4 + 1).
inline double rho_unit_coefficients(const std::vector<double>& k) {
  double num = 0, den = 0;
  for (double kj : k) {
    const double k2 = kj * kj;
    num += (k2 - 1.0) * (k2 - 1.0);
    den += k2 * k2 + 1.0;
  }
  return num / den;
}

/// Frequency of rho <= threshold over draws of N frequencies on (0, S), a = c = 1.
inline ProportionEstimate rho_monte_carlo(std::size_t N, double S, double threshold,
                                          std::size_t trials, std::uint64_t seed) {
  SplitMix64 seeds(seed);
  ProportionEstimate est{0, trials};
  for (std::size_t t = 0; t < trials; ++t) {
    const auto sample = sample_frequencies(N, S, seeds.next_u64());
    if (rho_unit_coefficients(sample.k) <= threshold) ++est.successes;
  }
  return est;
}

/// True when every pair satisfies |k_i - k_j| >= min_gap.
inline bool has_min_gap(const std::vector<double>& k, double min_gap) {
  for (std::size_t i = 0; i < k.size(); ++i)
    for (std::size_t j = i + 1; j < k.size(); ++j)
      if (std::abs(k[i] - k[j]) < min_gap) return false;
  return true;
}

struct MonteCarloRow {
  std::string claim;
  std::string params;
  double empirical = 0, bound = 0;
  double ci_lo = 0, ci_hi = 0;
  std::size_t trials = 0;
  bool pass = false;
};

inline void write_monte_carlo_csv(std::ostream& os, const std::vector<MonteCarloRow>& rows) {
  os << "# rfm monte-carlo v1\n";
  os << "claim,params,trials,empirical,bound,ci_lo,ci_hi,pass\n";
  os.precision(12);
  for (const auto& r : rows)
    os << r.claim << ",\"" << r.params << "\"," << r.trials << "," << r.empirical << "," << r.bound
       << "," << r.ci_lo << "," << r.ci_hi << "," << (r.pass ? 1 : 0) << "\n";
}

}  // namespace rfm
