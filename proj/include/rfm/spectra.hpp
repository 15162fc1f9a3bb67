#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rfm/assembly.hpp"
#include "rfm/errors.hpp"
#include "rfm/problem.hpp"

namespace rfm {

/// Descending singular values with the derived condition number and precision floor.
struct SpectralReport {
  Eigen::VectorXd sigma;
  double kappa = 1.0;
  double floor = 0.0;  // sigma_1 * rcond
  Eigen::Index above_floor_count = 0;

  /// Threshold for comparing computed values against bounds: one decade above the cutoff.
  double comparison_floor() const { return 10.0 * floor; }

  /// Largest index m (1-based) with sigma_m >= comparison_floor().
  Eigen::Index last_comparable_index() const {
    Eigen::Index m = 0;
    while (m < sigma.size() && sigma(m) >= comparison_floor()) ++m;
    return m;
  }

  double sigma_at(Eigen::Index m) const {  // 1-based, zero past the end
    return (m >= 1 && m <= sigma.size()) ? sigma(m - 1) : 0.0;
  }
};

inline Eigen::VectorXd singular_value_vector(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return {};
  return Eigen::BDCSVD<Eigen::MatrixXd>(m).singularValues();
}

/// Full SVD spectrum of the matrix itself (the Gram route would square the condition number).
inline SpectralReport singular_values(const Eigen::MatrixXd& m, double rcond = 1e-13) {
  if (m.size() == 0) throw std::invalid_argument("singular_values: empty matrix");
  SpectralReport rep;
  rep.sigma = singular_value_vector(m);
  const double s1 = rep.sigma(0);
  const double sM = rep.sigma(rep.sigma.size() - 1);
  rep.kappa = sM > 0.0 ? s1 / sM : std::numeric_limits<double>::infinity();
  rep.floor = s1 * rcond;
  for (Eigen::Index i = 0; i < rep.sigma.size(); ++i)
    if (rep.sigma(i) >= rep.floor) ++rep.above_floor_count;
  return rep;
}

inline constexpr double euler_mascheroni = 0.57721566490153286061;

/// tau_hat(m) = S R Gamma(m-2)^{-1/(m-3)}. At m = 3 the exponent degenerates and
/// the m -> 3+ limit S R exp(-psi(1)) = S R e^{gamma_EM} is used.
inline double tau_hat(int m, double S, double R) {
  if (m < 3) throw std::invalid_argument("tau_hat: m must be >= 3");
  if (m == 3) return S * R * std::exp(euler_mascheroni);
  return S * R * std::exp(-std::lgamma(m - 2.0) / (m - 3.0));
}

/// Problem, sampling and grid constants entering the spectral bounds.
struct BoundParams {
  double S = 1.0, R = 1.0;
  double lambda1 = 0, lambda2 = 0, lambda3 = 0;
  double g1_norm = 0, g2_norm = 0;  // already carry the sqrt(gamma) row scaling
  std::size_t n = 0, N = 0;         // collocation points, frequencies
  double QA = 0, QB = 0, QC = 0;    // sqrt(sum a^2), sum a c, sqrt(sum c^2) over interior points
  double frobenius = 0;             // ||Phi||_F, for m = 1, 2
};

inline BoundParams make_bound_params(const PDEProblem& p, const CollocationGrid& grid, double S,
                                     std::size_t N, double frobenius = 0.0) {
  BoundParams bp;
  bp.S = S;
  bp.R = p.R();
  bp.lambda1 = p.lambda1();
  bp.lambda2 = p.lambda2();
  bp.lambda3 = p.lambda3();
  const double sg = std::sqrt(grid.gamma);
  bp.g1_norm = sg * p.boundary.g1_norm();
  bp.g2_norm = sg * p.boundary.g2_norm();
  bp.n = grid.n();
  bp.N = N;
  double a2 = 0, ac = 0, c2 = 0;
  for (double x : grid.interior) {
    const double a = p.a(x), c = p.c(x);
    a2 += a * a;
    ac += a * c;
    c2 += c * c;
  }
  bp.QA = std::sqrt(a2);
  bp.QB = ac;
  bp.QC = std::sqrt(c2);
  bp.frobenius = frobenius;
  return bp;
}

/// Upper bound on sigma_m of the plain feature matrix:
///   sqrt(N) [sqrt(3n-6)(L1 S^2 + L2 S t + L3 t^2) + sqrt(2)(|g1| S + |g2| t) t] (1+t) t^{m-3}
/// with t = tau_hat(m); for m = 1, 2 the Frobenius bound ||Phi||_F / sqrt(m).
inline double sigma_upper_bound(int m, const BoundParams& p) {
  if (m < 1) throw std::invalid_argument("sigma_upper_bound: m must be >= 1");
  if (m <= 2) return p.frobenius / std::sqrt(static_cast<double>(m));
  const double t = tau_hat(m, p.S, p.R);
  const double S = p.S;
  const double interior = std::sqrt(3.0 * static_cast<double>(p.n) - 6.0) *
                          (p.lambda1 * S * S + p.lambda2 * S * t + p.lambda3 * t * t);
  const double boundary = std::sqrt(2.0) * (p.g1_norm * S + p.g2_norm * t) * t;
  return std::sqrt(static_cast<double>(p.N)) * (interior + boundary) * (1.0 + t) *
         std::pow(t, m - 3);
}

struct RhoKappa {
  double rho = 1.0;                  // exact ratio for this frequency sample
  std::optional<double> rho_bound;   // closed-form lower bound, when a case applies
  double kappa_lower = 1.0;
  int M = 0;
};

/// rho = sum(A^2 k^4 - 2 B k^2 + C^2) / sum(A^2 k^4 + C^2) and the resulting
/// lower bound sqrt(rho/(6M)) t^{3-M} / max(1, t^3), t = tau_hat(M), M = min(n, 2N).
inline RhoKappa rho_and_kappa_lower(const BoundParams& p, const std::vector<double>& k) {
  if (k.empty()) throw std::invalid_argument("rho_and_kappa_lower: empty sample");
  RhoKappa out;
  const double A = p.QA, B = p.QB, C = p.QC;
  double num = 0, den = 0;
  for (double kj : k) {
    const double k2 = kj * kj;
    num += A * A * k2 * k2 - 2.0 * B * k2 + C * C;
    den += A * A * k2 * k2 + C * C;
  }
  out.rho = den > 0.0 ? num / den : 1.0;

  const double AC = A * C;
  if (B <= 0.0) {
    out.rho_bound = 1.0;
  } else if (std::abs(B - AC) > 1e-12 * AC) {
    out.rho_bound = 1.0 - B / AC;
  } else if (A * p.S * p.S < C) {
    out.rho_bound = 1.0 - 2.0 * B * p.S * p.S / (A * A * std::pow(p.S, 4) + C * C);
  }

  out.M = static_cast<int>(std::min(p.n, 2 * p.N));
  if (out.M < 3) return out;
  const double rho_used = std::min(1.0, out.rho_bound.value_or(out.rho));
  if (rho_used <= 0.0) {
    out.kappa_lower = 0.0;
    return out;
  }
  const double t = tau_hat(out.M, p.S, p.R);
  const double log_bound = 0.5 * std::log(rho_used / (6.0 * out.M)) + (3.0 - out.M) * std::log(t) -
                           std::log(std::max(1.0, t * t * t));
  out.kappa_lower = std::exp(log_bound);
  return out;
}

struct SandwichBounds {
  double lower = 0, upper = 0;
  double lower_simplified = 0, upper_simplified = 0;
};

/// Bounds on sigma_m of a PUM feature matrix from its block-diagonal comparison
/// matrices. Spectra are computed once; `at(m)` is then cheap.
class SandwichCalculator {
 public:
  explicit SandwichCalculator(const std::vector<PatchBlocks>& blocks) {
    if (blocks.empty()) throw std::invalid_argument("SandwichCalculator: no blocks");
    const auto cmp = blockdiag_compare(blocks);
    sigma_B_ = singular_value_vector(cmp.B_diag);
    sigma_De_ = singular_value_vector(cmp.D_even);
    sigma_Do_ = singular_value_vector(cmp.D_odd);
    Ne_ = cmp.D_even.cols();
    No_ = cmp.D_odd.cols();
    total_cols_ = Ne_ + No_;
    patches_ = static_cast<int>(blocks.size());
    for (const auto& b : blocks) {
      sigma_Bp_.push_back(singular_value_vector(b.B));
      sigma_Dp_.push_back(singular_value_vector(b.D));
    }
  }

  SandwichBounds at(Eigen::Index m) const {
    if (m < 1 || m > total_cols_)
      throw std::invalid_argument("pum_sandwich: m must lie in [1, 2N]");
    SandwichBounds out;
    out.lower = nth(sigma_B_, m);
    double best = std::numeric_limits<double>::infinity();
    const Eigen::Index kmin = std::max<Eigen::Index>(1, m - No_);
    const Eigen::Index kmax = std::min<Eigen::Index>(m, Ne_ + 1);
    for (Eigen::Index k = kmin; k <= kmax; ++k) {
      const double se = nth(sigma_De_, k), so = nth(sigma_Do_, m + 1 - k);
      best = std::min(best, std::sqrt(se * se + so * so));
    }
    out.upper = best;
    const Eigen::Index q = (m + patches_ - 1) / patches_;  // ceil(m / (P+1))
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (int p = 0; p < patches_; ++p) {
      lo = std::min(lo, nth(sigma_Bp_[p], q));
      hi = std::max(hi, nth(sigma_Dp_[p], q));
    }
    out.lower_simplified = lo;
    out.upper_simplified = std::sqrt(2.0) * hi;
    return out;
  }

  const Eigen::VectorXd& sigma_B() const { return sigma_B_; }
  const Eigen::VectorXd& sigma_D_even() const { return sigma_De_; }
  const Eigen::VectorXd& sigma_D_odd() const { return sigma_Do_; }
  Eigen::Index N_even() const { return Ne_; }
  Eigen::Index N_odd() const { return No_; }

 private:
  // 1-based; sigma past the end of the spectrum is 0
  static double nth(const Eigen::VectorXd& s, Eigen::Index m) {
    return (m >= 1 && m <= s.size()) ? s(m - 1) : 0.0;
  }

  Eigen::VectorXd sigma_B_, sigma_De_, sigma_Do_;
  std::vector<Eigen::VectorXd> sigma_Bp_, sigma_Dp_;
  Eigen::Index Ne_ = 0, No_ = 0, total_cols_ = 0;
  int patches_ = 0;
};

inline SandwichBounds pum_sandwich(const std::vector<PatchBlocks>& blocks, Eigen::Index m) {
  return SandwichCalculator(blocks).at(m);
}

struct Theorem24Params {
  double M_u = 1, C_u = 1, s = 0;
  double S = 1, R = 1;
  std::size_t N = 2;
  double c_free = 2;
  double gamma = 1;
  double lambda1 = 1, lambda2 = 0, lambda3 = 0;
  double g1_norm = 0, g2_norm = std::sqrt(2.0);
};

struct Theorem24Bound {
  double tau = 0;
  double probabilistic_term = 0;  // [eta_in(1) + eta_bd(1)] N e^{-(c-1-ln c)(N-1)}
  double taylor_term = 0;         // [eta_in(tau) + (1 + N^{1-2s}) eta_bd(tau)] (2 e^c tau^2)^{2N-2}
  double total() const { return probabilistic_term + taylor_term; }
};

/// tau = R max(C_u, S) Gamma(2N-1)^{(s-1)/(2N-2)}.
inline double theorem24_tau(const Theorem24Params& p) {
  if (p.N < 2) throw std::invalid_argument("theorem24: N must be >= 2");
  const double m = std::max(p.C_u, p.S);
  const double n2 = 2.0 * static_cast<double>(p.N);
  return p.R * m * std::exp((p.s - 1.0) * std::lgamma(n2 - 1.0) / (n2 - 2.0));
}

/// Expected-loss bound for a G^s solution, s <= 1, evaluated with unit prefactor.
inline Theorem24Bound theorem24_bound(const Theorem24Params& p) {
  if (p.s > 1.0) throw UnsupportedError("theorem24_bound: s > 1 is covered by rate fits only");
  if (!(p.c_free > 1.0)) throw std::invalid_argument("theorem24_bound: c must exceed 1");
  const double m = std::max(p.C_u, p.S);
  const double Mu2 = p.M_u * p.M_u;
  auto eta_in = [&](double t) {
    return Mu2 * p.R *
           (p.lambda1 * p.lambda1 * std::pow(m, 4) + p.lambda2 * p.lambda2 * m * m * t * t +
            p.lambda3 * p.lambda3 * std::pow(t, 4)) *
           (1.0 + t * t);
  };
  auto eta_bd = [&](double t) {
    return p.gamma * Mu2 * (p.g1_norm * p.g1_norm * m * m + p.g2_norm * p.g2_norm * t * t) *
           (1.0 + t * t) * t * t;
  };
  Theorem24Bound out;
  out.tau = theorem24_tau(p);
  const double N = static_cast<double>(p.N);
  const double c = p.c_free;
  out.probabilistic_term =
      (eta_in(1.0) + eta_bd(1.0)) * N * std::exp(-(c - 1.0 - std::log(c)) * (N - 1.0));
  const double geometric = std::exp((2.0 * N - 2.0) * (std::log(2.0) + c + 2.0 * std::log(out.tau)));
  out.taylor_term =
      (eta_in(out.tau) + (1.0 + std::pow(N, 1.0 - 2.0 * p.s)) * eta_bd(out.tau)) * geometric;
  return out;
}

enum class RateModel { exponential, stretched_exponential, algebraic, patch_power };

inline std::string to_string(RateModel m) {
  switch (m) {
    case RateModel::exponential: return "exponential";
    case RateModel::stretched_exponential: return "stretched_exponential";
    case RateModel::algebraic: return "algebraic";
    case RateModel::patch_power: return "patch_power";
  }
  return "unknown";
}

struct RateRecord {
  double x = 0;  // N, or patch size r
  double error = 0;
};

struct RateFit {
  RateModel kind = RateModel::exponential;
  double rate = 0;       // kappa for exp(-kappa g(N)); slope for power laws
  double intercept = 0;  // of log(error)
  double residual = 0;   // RMS of log-error residuals
};

struct RateFitReport {
  RateFit best;
  std::vector<RateFit> candidates;
};

enum class RateVariable { features, patch_size };

/// Drops the records past the onset of the precision floor: keeps everything up to
/// and including the first record whose error is within `factor` of the smallest one.
inline std::vector<RateRecord> drop_saturated(const std::vector<RateRecord>& records,
                                              double factor = 100.0) {
  if (records.empty()) return {};
  double emin = records.front().error;
  for (const auto& r : records) emin = std::min(emin, r.error);
  std::vector<RateRecord> out;
  for (const auto& r : records) {
    out.push_back(r);
    if (r.error <= factor * emin) break;
  }
  return out;
}

namespace detail {

/// Least-squares line y = c0 + c1 * t.
inline std::pair<double, double> fit_line(const std::vector<double>& t, const std::vector<double>& y,
                                          double& rms) {
  const double n = static_cast<double>(t.size());
  double st = 0, sy = 0, stt = 0, sty = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    st += t[i];
    sy += y[i];
    stt += t[i] * t[i];
    sty += t[i] * y[i];
  }
  const double denom = n * stt - st * st;
  const double c1 = denom != 0.0 ? (n * sty - st * sy) / denom : 0.0;
  const double c0 = (sy - c1 * st) / n;
  double ss = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double r = y[i] - c0 - c1 * t[i];
    ss += r * r;
  }
  rms = std::sqrt(ss / n);
  return {c0, c1};
}

}  // namespace detail

/// Fits log(error) against each candidate law and keeps the smallest residual.
/// Features: exp(-kappa N), exp(-kappa N^{1/s}) when s is given, and N^p.
/// Patch size: r^p.
inline RateFitReport rate_fit(const std::vector<RateRecord>& records,
                              RateVariable variable = RateVariable::features,
                              std::optional<double> gevrey_s = std::nullopt) {
  if (records.size() < 4) throw std::invalid_argument("rate_fit: need at least 4 records");
  std::vector<double> x, logy;
  for (const auto& r : records) {
    if (!(r.error > 0.0) || !std::isfinite(r.error))
      throw std::invalid_argument("rate_fit: errors must be positive and finite");
    if (!(r.x > 0.0)) throw std::invalid_argument("rate_fit: abscissae must be positive");
    x.push_back(r.x);
    logy.push_back(std::log(r.error));
  }
  RateFitReport rep;
  auto add = [&](RateModel kind, const std::vector<double>& t, bool decay_rate) {
    RateFit f;
    f.kind = kind;
    auto [c0, c1] = detail::fit_line(t, logy, f.residual);
    f.intercept = c0;
    f.rate = decay_rate ? -c1 : c1;
    rep.candidates.push_back(f);
  };
  std::vector<double> logx(x.size());
  std::transform(x.begin(), x.end(), logx.begin(), [](double v) { return std::log(v); });
  if (variable == RateVariable::patch_size) {
    add(RateModel::patch_power, logx, false);
  } else {
    add(RateModel::exponential, x, true);
    if (gevrey_s) {
      std::vector<double> xs(x.size());
      std::transform(x.begin(), x.end(), xs.begin(),
                     [&](double v) { return std::pow(v, 1.0 / *gevrey_s); });
      add(RateModel::stretched_exponential, xs, true);
    }
    add(RateModel::algebraic, logx, false);
  }
  rep.best = *std::min_element(rep.candidates.begin(), rep.candidates.end(),
                               [](const RateFit& a, const RateFit& b) { return a.residual < b.residual; });
  return rep;
}

}  // namespace rfm
