// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "rfm/experiment.hpp"
#include "rfm/rfm.hpp"

using namespace rfm;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double time_limit;  // seconds
  std::function<Outcome()> run;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

PDEProblem plain_problem(double R, double c) {
  PDEProblem p;
  p.domain = Domain(R);
  p.c = ScalarField::constant(c);
  return p;
}

Outcome partition_of_unity() {
  double worst = 0.0;
  for (auto [R, P] : {std::pair{1.0, 4}, std::pair{4.0, 5}, std::pair{1.0, 1}})
    worst = std::max(worst, partition_check(PoUGrid(R, P), 10000));
  return {worst <= 1e-12, fmt("max |sum phi - 1| = %.3e", worst)};
}

Outcome sigma_decay_bound() {
  const PDEProblem p = plain_problem(0.5, 0.0);
  const auto grid = equidistant_grid(200, 0.5);
  std::size_t checked = 0, violations = 0;
  double worst_ratio = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto sample = sample_frequencies(18, 1.0, seed);
    const auto A = assemble_plain(p, sample, grid).matrix.values;
    const auto rep = singular_values(A, 1e-13);
    const auto bp = make_bound_params(p, grid, 1.0, 18, A.norm());
    for (Eigen::Index m = 1; m <= rep.sigma.size(); ++m) {
      const double s = rep.sigma_at(m);
      if (s < rep.comparison_floor()) continue;
      const double ub = sigma_upper_bound(static_cast<int>(m), bp);
      ++checked;
      worst_ratio = std::max(worst_ratio, s / ub);
      if (s > ub) ++violations;
    }
  }
  std::ostringstream os;
  os << checked << " values checked, " << violations << " above bound, max sigma/bound "
     << worst_ratio;
  return {violations == 0 && checked > 0, os.str()};
}

Outcome kappa_lower_bound() {
  const PDEProblem p = plain_problem(0.5, -1.0);
  const auto grid = equidistant_grid(200, 0.5);
  std::size_t checked = 0, violations = 0;
  auto kappa_floor = [](const SpectralReport& rep) {
    return rep.sigma(0) / rep.sigma(rep.above_floor_count - 1);
  };
  std::vector<std::size_t> sizes{4, 5, 6, 7, 8, 9, 10, 18};
  std::vector<std::vector<double>> kf(10);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    for (std::size_t N : sizes) {
      const auto sample = sample_frequencies(N, 1.0, seed);
      const auto A = assemble_plain(p, sample, grid).matrix.values;
      const auto rep = singular_values(A, 1e-13);
      const auto bp = make_bound_params(p, grid, 1.0, N, A.norm());
      const auto rk = rho_and_kappa_lower(bp, sample.k);
      if (!rk.rho_bound || *rk.rho_bound != 1.0) ++violations;
      if (rep.sigma_at(rk.M) >= rep.floor) {
        ++checked;
        if (rep.kappa < rk.kappa_lower) ++violations;
      }
      if (N <= 10) kf[seed].push_back(kappa_floor(rep));
    }
  }
  // growth of the floor-restricted condition number, median over seeds, N = 4..10
  double min_growth = std::numeric_limits<double>::infinity();
  std::ostringstream growth;
  for (std::size_t i = 0; i + 1 < 7; ++i) {
    std::vector<double> ratios;
    for (const auto& row : kf) ratios.push_back(row[i + 1] / row[i]);
    const double g = median(ratios);
    min_growth = std::min(min_growth, g);
    growth << (i ? " " : "") << fmt("%.2g", g);
  }
  std::ostringstream os;
  os << checked << " kappa comparisons, " << violations << " violations; growth per added frequency "
     << "(N=4..10): " << growth.str();
  return {violations == 0 && min_growth >= 10.0, os.str()};
}

Outcome pum_sandwich_bounds() {
  PDEProblem p = plain_problem(4.0, 0.0);
  std::size_t checked = 0, violations = 0;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    FeatureConfig fc;
    fc.S = 1.0;
    fc.seed = seed;
    fc.pum = PumConfig{5, 10};
    const auto s = spectrum_for(p, fc, 501, 1e-13);
    for (const auto& r : s.rows) {
      if (r.sigma < s.report.comparison_floor()) continue;
      ++checked;
    }
    violations += s.violations;
  }
  std::ostringstream os;
  os << checked << " singular values checked against full and simplified bounds, " << violations
     << " violations";
  return {violations == 0 && checked > 0, os.str()};
}

SweepResult sweep_n(const std::vector<std::size_t>& Ns) {
  ExperimentConfig cfg;
  cfg.problem.solution = "sin(3*x)+exp(x)";
  cfg.problem.c = "-1";
  cfg.problem.R = 0.5;
  cfg.features.S = 8.0;
  cfg.n = 400;
  cfg.solver.rcond = 1e-13;
  cfg.sweep.N = Ns;
  cfg.seeds.clear();
  for (std::uint64_t s = 0; s < 20; ++s) cfg.seeds.push_back(s);
  return converge_n(cfg);
}

Outcome spectral_convergence() {
  const SweepResult s = sweep_n({4, 5, 6, 7, 8, 10, 15, 20, 25, 30});
  auto at = [&](std::size_t N) {
    for (const auto& p : s.points)
      if (p.N == N) return p.median_rel_e0;
    return std::numeric_limits<double>::quiet_NaN();
  };
  const double e5 = at(5), e30 = at(30);
  const bool fit_ok = s.fit && s.fit->best.kind == RateModel::exponential && s.fit->best.rate > 0;
  std::ostringstream os;
  os << "median rel e0: N=5 " << e5 << ", N=30 " << e30 << "; fit over " << s.fitted_points
     << " pre-floor points: " << (s.fit ? to_string(s.fit->best.kind) : "none");
  if (s.fit) os << " rate " << s.fit->best.rate;
  return {e30 <= 1e-6 && e30 <= 1e-3 * e5 && fit_ok, os.str()};
}

Outcome pum_convergence() {
  ExperimentConfig cfg;
  cfg.problem.solution = "sin(3*x)+exp(x)";
  cfg.problem.c = "-1";
  cfg.problem.R = 1.0;
  cfg.features.S = 1.0;
  cfg.features.pum = PumConfig{2, 8};
  cfg.n = 1001;
  cfg.solver.rcond = 1e-13;
  cfg.sweep.P = {2, 4, 8, 16};
  cfg.sweep.saturation_factor = 0.0;  // fit every point
  cfg.seeds.clear();
  for (std::uint64_t s = 0; s < 20; ++s) cfg.seeds.push_back(s);
  const SweepResult s = converge_r(cfg);
  bool monotone = true;
  std::ostringstream os;
  os << "median rel e0 by P:";
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    os << " " << s.points[i].P << ":" << fmt("%.2e", s.points[i].median_rel_e0);
    if (i && !(s.points[i].median_rel_e0 < s.points[i - 1].median_rel_e0)) monotone = false;
  }
  const double slope = s.fit ? s.fit->best.rate : 0.0;
  os << "; monotone " << (monotone ? "yes" : "no") << "; slope vs r " << slope;
  return {monotone && slope >= 2.0, os.str()};
}

Outcome lemma32_monte_carlo() {
  const auto est = event_Ai_monte_carlo(8, 2.0, 1.0, 1.0, 100000, 7);
  const double bound = event_Ai_complement_bound(8, 2.0);
  const double limit = bound + 3.0 * binomial_sigma(bound, est.trials);
  std::ostringstream os;
  os << "P(A_i^c) empirical " << est.frequency() << ", bound " << bound << ", limit " << limit;
  return {est.frequency() <= limit, os.str()};
}

Outcome lemma31_dominance() {
  const double S = 2.0;
  std::size_t checked = 0, violations = 0;
  for (const char* text : {"cos(2*x)", "exp(x)", "x^3+x"}) {
    const ManufacturedSolution u(Expression::parse(text));
    const auto env = u.envelope(1.0);
    if (!env) return {false, std::string("no envelope for ") + text};
    for (std::size_t N = 1; N <= 6; ++N) {
      SplitMix64 seeds(1000 + N);
      std::size_t draws = 0;
      while (draws < 100) {
        const auto sample = sample_frequencies(N, S, seeds.next_u64());
        if (!has_min_gap(sample.k, 1e-3 * S)) continue;
        ++draws;
        const auto tp = alphaV(sample.k, u, N);
        for (std::size_t i = 0; i < N; ++i) {
          checked += 2;
          if (std::abs(tp.X(i)) > alphaV_bound(i, sample.k, env->M, env->C, env->s, N, Parity::even))
            ++violations;
          if (std::abs(tp.Y(i)) > alphaV_bound(i, sample.k, env->M, env->C, env->s, N, Parity::odd))
            ++violations;
        }
      }
    }
  }
  std::ostringstream os;
  os << checked << " components, " << violations << " above bound";
  return {violations == 0, os.str()};
}

Outcome rho_claim() {
  const auto est = rho_monte_carlo(50, 1.0, 1.0 / 200.0, 10000, 11);
  const double bound = std::pow(0.95, 50);
  const double limit = bound + 3.0 * binomial_sigma(bound, est.trials);
  std::ostringstream os;
  os << "P(rho <= 1/200) empirical " << est.frequency() << ", limit " << limit;
  return {est.frequency() <= limit, os.str()};
}

Outcome appendix_b() {
  const auto jm = jalpha_max(7.15, 1.1, 1e-3);
  bool dominated = true;
  double worst = 0.0;
  for (int a = 0; a < 5; ++a)
    for (int b = 0; b < 5; ++b) {
      const double lam = 0.5 + a * (8.0 - 0.5) / 4.0;
      const double del = 1.05 + b * (1.5 - 1.05) / 4.0;
      const double ratio = jalpha_max(lam, del, 1e-3).value / lemmaB1_bound(lam, del);
      worst = std::max(worst, ratio);
      if (ratio > 1.0) dominated = false;
    }
  std::ostringstream os;
  os << "max J = " << jm.value << " at alpha " << jm.alpha << "; max J/bound on grid " << worst;
  return {jm.value <= 0.72 && dominated, os.str()};
}

Outcome taylor_reconstruction() {
  const double S = 2.0;
  double worst = 0.0;
  for (const char* text : {"exp(x)", "cos(2*x)", "x^3+x", "sin(x)+exp(-0.5*x)"}) {
    const ManufacturedSolution u(Expression::parse(text));
    for (std::size_t N = 1; N <= 6; ++N) {
      SplitMix64 seeds(2000 + N);
      std::size_t draws = 0;
      while (draws < 20) {
        const auto sample = sample_frequencies(N, S, seeds.next_u64());
        if (!has_min_gap(sample.k, 1e-3 * S)) continue;
        ++draws;
        const auto tp = alphaV(sample.k, u, N);
        double scale = 0.0;
        for (std::size_t j = 0; j < 2 * N; ++j)
          scale = std::max(scale, std::abs(u.derivative_at_zero(static_cast<int>(j))));
        for (std::size_t j = 0; j < 2 * N; ++j) {
          // u^(j)(0) of sum X_i cos(k_i x) + Y_i sin(k_i x)
          long double rec = 0.0L;
          for (std::size_t i = 0; i < N; ++i) {
            const long double c = j % 2 == 0 ? tp.X(i) : tp.Y(i);
            const long double sign = (j / 2) % 2 == 0 ? 1.0L : -1.0L;
            rec += c * sign * std::pow(static_cast<long double>(sample.k[i]), static_cast<int>(j));
          }
          const double truth = u.derivative_at_zero(static_cast<int>(j));
          const double err = truth != 0.0 ? std::abs(static_cast<double>(rec) - truth) / std::abs(truth)
                                          : std::abs(static_cast<double>(rec)) / scale;
          worst = std::max(worst, err);
        }
      }
    }
  }
  return {worst <= 1e-6, fmt("max relative coefficient error %.3e", worst)};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "partition of unity", 1, partition_of_unity},
      {2, "singular value decay bound", 10, sigma_decay_bound},
      {3, "condition number lower bound and growth", 30, kappa_lower_bound},
      {4, "PUM sandwich bounds", 30, pum_sandwich_bounds},
      {5, "spectral convergence in N", 120, spectral_convergence},
      {6, "PUM convergence in patch size", 180, pum_convergence},
      {7, "event A_i Monte-Carlo", 30, lemma32_monte_carlo},
      {8, "Taylor-matching coefficient bound", 10, lemma31_dominance},
      {9, "rho probability claim", 30, rho_claim},
      {10, "J(alpha) bound", 10, appendix_b},
      {11, "Maclaurin reconstruction", 5, taylor_reconstruction},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.time_limit;
    const bool pass = out.pass && in_time;
    if (!pass) ++failures;
    std::printf("%s  [%2d] %s: %s (%.2fs of %.0fs%s)\n", pass ? "PASS" : "FAIL", c.id, c.name.c_str(),
                out.detail.c_str(), secs, c.time_limit, in_time ? "" : ", over time limit");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
