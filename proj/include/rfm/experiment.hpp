#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rfm/assembly.hpp"
#include "rfm/errors.hpp"
#include "rfm/expression.hpp"
#include "rfm/oracle.hpp"
#include "rfm/problem.hpp"
#include "rfm/solver.hpp"
#include "rfm/spectra.hpp"

namespace rfm {

using json = nlohmann::json;

/// Invalid or incomplete experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* csv_schema_version = "v1";

struct ProblemSpec {
  std::optional<std::string> solution;  // manufactured u; f and g follow from it
  std::string a = "1", b = "0", c = "0";
  std::string f = "0";                  // used only without a solution
  double R = 1.0;
  BoundaryOperator boundary = BoundaryOperator::dirichlet();
  double gamma = 1.0;
};

struct SweepSpec {
  std::vector<std::size_t> N;  // converge-n
  std::vector<int> P;          // converge-r
  double saturation_factor = 100.0;
  std::optional<double> gevrey_s;
};

struct ProbabilitySpec {
  std::size_t rho_N = 50, rho_trials = 10000;
  double rho_S = 1.0, rho_threshold = 1.0 / 200.0;
  std::vector<std::size_t> ai_N{4, 8};
  std::vector<double> ai_c{1.5, 2.0, 3.0};
  std::size_t ai_trials = 100000;
  double ai_C_u = 1.0, ai_S = 1.0;
  std::vector<std::size_t> lemma33_N{2, 3, 4};
  std::size_t lemma33_trials = 100000;
  double lemma33_S = 1.0, lemma33_C_u = 1.0;
  double j_lambda = 7.15, j_delta = 1.1, j_step = 1e-3, j_bound = 0.72;
  std::uint64_t seed = 2024;
};

/// One JSON document. Every field has a default except problem.solution for the
/// error-reporting commands.
struct ExperimentConfig {
  ProblemSpec problem;
  FeatureConfig features;
  std::vector<std::uint64_t> seeds{0};
  std::size_t n = 200;
  SolveOptions solver;
  SweepSpec sweep;
  ProbabilitySpec probability;
  int solution_samples = 201;
  json raw;
};

namespace detail {

template <class T>
void read_opt(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("field '") + key + "': " + e.what());
  }
}

inline std::string coefficient_text(const json& j, const char* key, const std::string& def) {
  if (!j.contains(key)) return def;
  const auto& v = j.at(key);
  if (v.is_number()) {
    std::ostringstream os;
    os.precision(17);
    os << v.get<double>();
    return os.str();
  }
  if (v.is_string()) return v.get<std::string>();
  throw ConfigError(std::string("field '") + key + "' must be a number or an expression string");
}

}  // namespace detail

/// Parses "0,3,5-9" into {0, 3, 5, 6, 7, 8, 9}.
inline std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      const auto dash = item.find('-');
      if (dash == std::string::npos) {
        out.push_back(std::stoull(item));
      } else {
        const auto lo = std::stoull(item.substr(0, dash));
        const auto hi = std::stoull(item.substr(dash + 1));
        if (hi < lo) throw ConfigError("bad seed range: " + item);
        for (auto s = lo; s <= hi; ++s) out.push_back(s);
      }
    } catch (const std::logic_error&) {
      throw ConfigError("bad seed list: " + text);
    }
  }
  if (out.empty()) throw ConfigError("empty seed list");
  return out;
}

inline ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig cfg;
  cfg.raw = j;
  if (!j.contains("problem")) throw ConfigError("missing field 'problem'");
  const json& p = j.at("problem");
  if (p.contains("solution")) cfg.problem.solution = p.at("solution").get<std::string>();
  cfg.problem.a = detail::coefficient_text(p, "a", "1");
  cfg.problem.b = detail::coefficient_text(p, "b", "0");
  cfg.problem.c = detail::coefficient_text(p, "c", "0");
  cfg.problem.f = detail::coefficient_text(p, "f", "0");
  detail::read_opt(p, "R", cfg.problem.R);
  detail::read_opt(p, "gamma", cfg.problem.gamma);
  if (p.contains("boundary")) {
    const json& bj = p.at("boundary");
    if (bj.is_string()) {
      if (bj.get<std::string>() != "dirichlet")
        throw ConfigError("boundary must be \"dirichlet\" or an object");
    } else {
      auto& bc = cfg.problem.boundary;
      detail::read_opt(bj, "g1_left", bc.g1_left);
      detail::read_opt(bj, "g1_right", bc.g1_right);
      detail::read_opt(bj, "g2_left", bc.g2_left);
      detail::read_opt(bj, "g2_right", bc.g2_right);
      detail::read_opt(bj, "g_left", bc.g_left);
      detail::read_opt(bj, "g_right", bc.g_right);
    }
  }
  if (!(cfg.problem.R > 0.0)) throw ConfigError("problem.R must be positive");
  if (!(cfg.problem.gamma > 0.0)) throw ConfigError("problem.gamma must be positive");

  if (j.contains("features")) {
    const json& f = j.at("features");
    detail::read_opt(f, "N", cfg.features.N);
    detail::read_opt(f, "S", cfg.features.S);
    if (f.contains("seeds")) {
      const auto& s = f.at("seeds");
      cfg.seeds = s.is_string() ? parse_seed_list(s.get<std::string>())
                                : s.get<std::vector<std::uint64_t>>();
    }
    if (f.contains("pum")) {
      PumConfig pc;
      detail::read_opt(f.at("pum"), "P", pc.P);
      detail::read_opt(f.at("pum"), "Np", pc.Np);
      cfg.features.pum = pc;
    }
  }
  if (!(cfg.features.S > 0.0)) throw ConfigError("features.S must be positive");
  if (cfg.features.N == 0) throw ConfigError("features.N must be >= 1");
  if (cfg.seeds.empty()) throw ConfigError("features.seeds must not be empty");

  if (j.contains("grid")) detail::read_opt(j.at("grid"), "n", cfg.n);
  if (cfg.n < 3) throw ConfigError("grid.n must be >= 3");

  if (j.contains("solver")) {
    const json& s = j.at("solver");
    detail::read_opt(s, "rcond", cfg.solver.rcond);
    detail::read_opt(s, "quadrature_panels", cfg.solver.quadrature_panels);
    detail::read_opt(s, "nodes_per_panel", cfg.solver.nodes_per_panel);
    detail::read_opt(s, "row_weights", cfg.solver.row_weights);
  }
  try {
    cfg.solver.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("solver: ") + e.what());
  }

  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    detail::read_opt(s, "N", cfg.sweep.N);
    detail::read_opt(s, "P", cfg.sweep.P);
    detail::read_opt(s, "saturation_factor", cfg.sweep.saturation_factor);
    if (s.contains("gevrey_s")) cfg.sweep.gevrey_s = s.at("gevrey_s").get<double>();
  }
  if (j.contains("probability")) {
    const json& q = j.at("probability");
    auto& pr = cfg.probability;
    detail::read_opt(q, "rho_N", pr.rho_N);
    detail::read_opt(q, "rho_trials", pr.rho_trials);
    detail::read_opt(q, "rho_S", pr.rho_S);
    detail::read_opt(q, "rho_threshold", pr.rho_threshold);
    detail::read_opt(q, "ai_N", pr.ai_N);
    detail::read_opt(q, "ai_c", pr.ai_c);
    detail::read_opt(q, "ai_trials", pr.ai_trials);
    detail::read_opt(q, "ai_C_u", pr.ai_C_u);
    detail::read_opt(q, "ai_S", pr.ai_S);
    detail::read_opt(q, "lemma33_N", pr.lemma33_N);
    detail::read_opt(q, "lemma33_trials", pr.lemma33_trials);
    detail::read_opt(q, "lemma33_S", pr.lemma33_S);
    detail::read_opt(q, "lemma33_C_u", pr.lemma33_C_u);
    detail::read_opt(q, "j_lambda", pr.j_lambda);
    detail::read_opt(q, "j_delta", pr.j_delta);
    detail::read_opt(q, "j_step", pr.j_step);
    detail::read_opt(q, "j_bound", pr.j_bound);
    detail::read_opt(q, "seed", pr.seed);
  }
  if (j.contains("output")) detail::read_opt(j.at("output"), "solution_samples", cfg.solution_samples);
  return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  try {
    return parse_config(j);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }
}

inline ScalarField parse_field(const std::string& text, const Domain& dom, const char* name) {
  try {
    return ScalarField::from_expression(Expression::parse(text), dom);
  } catch (const ParseError& e) {
    throw ConfigError(std::string("problem.") + name + ": " + e.what());
  }
}

inline PDEProblem build_problem(const ProblemSpec& spec) {
  const Domain dom(spec.R);
  ScalarField a = parse_field(spec.a, dom, "a");
  ScalarField b = parse_field(spec.b, dom, "b");
  ScalarField c = parse_field(spec.c, dom, "c");
  if (spec.solution) {
    Expression u;
    try {
      u = Expression::parse(*spec.solution);
    } catch (const ParseError& e) {
      throw ConfigError(std::string("problem.solution: ") + e.what());
    }
    return make_manufactured(ManufacturedSolution(u), a, b, c, spec.boundary, dom, spec.gamma);
  }
  PDEProblem p;
  p.domain = dom;
  p.a = a;
  p.b = b;
  p.c = c;
  p.f = parse_field(spec.f, dom, "f");
  p.boundary = spec.boundary;
  p.gamma = spec.gamma;
  return p;
}

/// Runs f(i) for i in [0, count) on a small worker pool; results land in slot i.
template <class R, class F>
std::vector<R> parallel_map(std::size_t count, F&& f) {
  std::vector<std::optional<R>> slots(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(count, std::thread::hardware_concurrency()));
  auto work = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        slots[i].emplace(f(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  std::vector<R> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
    out.push_back(std::move(*slots[i]));
  }
  return out;
}

/// Parameter echo plus solve outputs; re-runnable from its own "config" field.
struct RunRecord {
  std::uint64_t seed = 0;
  std::size_t N = 0;
  int P = 0;
  std::size_t Np = 0;
  double S = 0, R = 0;
  std::size_t n = 0;
  double rcond = 0;
  double loss = 0;
  double e0 = std::numeric_limits<double>::quiet_NaN();
  double e1 = std::numeric_limits<double>::quiet_NaN();
  double e2 = std::numeric_limits<double>::quiet_NaN();
  double rel_e0 = std::numeric_limits<double>::quiet_NaN();
  double residual = 0;
  Eigen::Index rank = 0;
  double kappa = 0;
  double sigma_1 = 0, sigma_min = 0, floor = 0;
  Eigen::Index above_floor = 0;
  std::vector<std::string> warnings;
  double wall_seconds = 0;
  json config;
};

inline json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json to_json(const RunRecord& r, bool with_time = true) {
  json j{{"seed", r.seed},
         {"N", r.N},
         {"P", r.P},
         {"N_p", r.Np},
         {"S", r.S},
         {"R", r.R},
         {"n", r.n},
         {"rcond", r.rcond},
         {"loss", finite_or_null(r.loss)},
         {"e0", finite_or_null(r.e0)},
         {"e1", finite_or_null(r.e1)},
         {"e2", finite_or_null(r.e2)},
         {"rel_e0", finite_or_null(r.rel_e0)},
         {"residual", finite_or_null(r.residual)},
         {"rank", r.rank},
         {"kappa", finite_or_null(r.kappa)},
         {"spectrum", {{"sigma_1", r.sigma_1}, {"sigma_min", r.sigma_min}, {"floor", r.floor},
                       {"above_floor", r.above_floor}}},
         {"warnings", r.warnings},
         {"config", r.config}};
  if (with_time) j["wall_seconds"] = r.wall_seconds;
  return j;
}

/// Echo of the configuration narrowed to one seed and one feature setting.
inline json echo_config(const ExperimentConfig& cfg, const FeatureConfig& fc) {
  json j = cfg.raw;
  json f = j.contains("features") ? j["features"] : json::object();
  f["seeds"] = json::array({fc.seed});
  f["N"] = fc.N;
  f["S"] = fc.S;
  if (fc.pum) f["pum"] = {{"P", fc.pum->P}, {"Np", fc.pum->Np}};
  else f.erase("pum");
  j["features"] = f;
  j["grid"] = {{"n", cfg.n}};
  j["solver"] = {{"rcond", cfg.solver.rcond},
                 {"quadrature_panels", cfg.solver.quadrature_panels},
                 {"nodes_per_panel", cfg.solver.nodes_per_panel},
                 {"row_weights", cfg.solver.row_weights}};
  j.erase("sweep");
  return j;
}

inline RunRecord make_record(const ExperimentConfig& cfg, const PDEProblem& problem,
                             const FeatureConfig& fc, const SolveResult& res, double seconds) {
  RunRecord r;
  r.seed = fc.seed;
  r.S = fc.S;
  r.R = problem.R();
  r.n = cfg.n;
  r.rcond = cfg.solver.rcond;
  if (fc.pum) {
    r.P = fc.pum->P;
    r.Np = fc.pum->Np;
    r.N = fc.pum->Np * static_cast<std::size_t>(fc.pum->P + 1);
  } else {
    r.N = fc.N;
  }
  r.loss = res.loss;
  if (res.errors) {
    r.e0 = res.errors->e0;
    r.e1 = res.errors->e1;
    r.e2 = res.errors->e2;
    r.rel_e0 = res.relative_e0();
  }
  r.residual = res.residual_2norm;
  r.rank = res.numerical_rank;
  r.kappa = res.kappa;
  const auto& s = res.singular_values;
  r.sigma_1 = s(0);
  r.sigma_min = s(s.size() - 1);
  r.floor = s(0) * cfg.solver.rcond;
  r.above_floor = (s.array() >= r.floor).count();
  r.warnings = res.warnings;
  r.config = echo_config(cfg, fc);
  r.wall_seconds = seconds;
  return r;
}

inline std::pair<RunRecord, SolveResult> solve_and_record(const ExperimentConfig& cfg,
                                                          const PDEProblem& problem,
                                                          const FeatureConfig& fc) {
  const auto t0 = std::chrono::steady_clock::now();
  const CollocationGrid grid = equidistant_grid(cfg.n, problem.R(), problem.gamma);
  SolveResult res = solve_problem(problem, fc, grid, cfg.solver);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  RunRecord rec = make_record(cfg, problem, fc, res, secs);
  return {std::move(rec), std::move(res)};
}

inline RunRecord run_one(const ExperimentConfig& cfg, const PDEProblem& problem,
                         const FeatureConfig& fc) {
  return solve_and_record(cfg, problem, fc).first;
}

inline std::vector<RunRecord> run_seeds(const ExperimentConfig& cfg, const PDEProblem& problem,
                                        FeatureConfig fc) {
  return parallel_map<RunRecord>(cfg.seeds.size(), [&](std::size_t i) {
    FeatureConfig f = fc;
    f.seed = cfg.seeds[i];
    return run_one(cfg, problem, f);
  });
}

inline double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct SweepPoint {
  double x = 0;  // N, or r = R / P
  std::size_t N = 0;
  int P = 0;
  double median_loss = 0, median_e0 = 0, median_rel_e0 = 0;
  std::vector<RunRecord> runs;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  std::optional<RateFitReport> fit;
  std::size_t fitted_points = 0;
};

inline SweepPoint summarize(double x, std::vector<RunRecord> runs) {
  SweepPoint pt;
  pt.x = x;
  std::vector<double> loss, e0, rel;
  for (const auto& r : runs) {
    loss.push_back(r.loss);
    e0.push_back(r.e0);
    rel.push_back(r.rel_e0);
  }
  pt.median_loss = median(loss);
  pt.median_e0 = median(e0);
  pt.median_rel_e0 = median(rel);
  pt.runs = std::move(runs);
  return pt;
}

/// Median relative L2 error per sweep point; the rate is fitted to the points before
/// the precision floor.
inline void fit_sweep(SweepResult& out, RateVariable var, const SweepSpec& spec) {
  std::vector<RateRecord> recs;
  for (const auto& p : out.points)
    if (p.median_rel_e0 > 0.0 && std::isfinite(p.median_rel_e0)) recs.push_back({p.x, p.median_rel_e0});
  recs = drop_saturated(recs, spec.saturation_factor);
  out.fitted_points = recs.size();
  if (recs.size() >= 4) out.fit = rate_fit(recs, var, spec.gevrey_s);
}

inline SweepResult converge_n(const ExperimentConfig& cfg) {
  if (!cfg.problem.solution) throw ConfigError("converge-n needs problem.solution");
  if (cfg.sweep.N.size() < 4) throw ConfigError("sweep.N needs at least 4 values");
  const PDEProblem problem = build_problem(cfg.problem);
  SweepResult out;
  for (std::size_t N : cfg.sweep.N) {
    FeatureConfig fc = cfg.features;
    fc.N = N;
    fc.pum.reset();
    SweepPoint pt = summarize(static_cast<double>(N), run_seeds(cfg, problem, fc));
    pt.N = N;
    out.points.push_back(std::move(pt));
  }
  fit_sweep(out, RateVariable::features, cfg.sweep);
  return out;
}

inline SweepResult converge_r(const ExperimentConfig& cfg) {
  if (!cfg.problem.solution) throw ConfigError("converge-r needs problem.solution");
  if (cfg.sweep.P.size() < 4) throw ConfigError("sweep.P needs at least 4 values");
  if (!cfg.features.pum) throw ConfigError("converge-r needs features.pum");
  const PDEProblem problem = build_problem(cfg.problem);
  SweepResult out;
  for (int P : cfg.sweep.P) {
    FeatureConfig fc = cfg.features;
    fc.pum->P = P;
    SweepPoint pt = summarize(problem.R() / P, run_seeds(cfg, problem, fc));
    pt.P = P;
    pt.N = fc.pum->Np;
    out.points.push_back(std::move(pt));
  }
  fit_sweep(out, RateVariable::patch_size, cfg.sweep);
  return out;
}

inline void write_sweep_csv(std::ostream& os, const SweepResult& s, bool patches) {
  os << "# rfm converge " << csv_schema_version << "\n";
  os << (patches ? "P,r" : "N") << ",seeds,median_loss,median_e0,median_rel_e0\n";
  os.precision(12);
  for (const auto& p : s.points) {
    if (patches) os << p.P << "," << p.x;
    else os << p.N;
    os << "," << p.runs.size() << "," << p.median_loss << "," << p.median_e0 << ","
       << p.median_rel_e0 << "\n";
  }
  if (s.fit) {
    os << "# fit points=" << s.fitted_points << " model=" << to_string(s.fit->best.kind)
       << " rate=" << s.fit->best.rate << " residual=" << s.fit->best.residual << "\n";
    for (const auto& c : s.fit->candidates)
      os << "# candidate model=" << to_string(c.kind) << " rate=" << c.rate
         << " residual=" << c.residual << "\n";
  } else {
    os << "# fit unavailable: " << s.fitted_points << " points before the precision floor\n";
  }
}

inline json to_json(const RateFit& f) {
  return {{"model", to_string(f.kind)}, {"rate", f.rate}, {"intercept", f.intercept},
          {"residual", f.residual}};
}

/// Spectrum of the assembled matrix with bound overlays; one row per singular value.
struct SpectrumRow {
  Eigen::Index m = 0;
  double sigma = 0;
  std::optional<double> upper_bound;
  std::optional<double> sandwich_lower, sandwich_upper;
  std::optional<double> simplified_lower, simplified_upper;
  double floor = 0;
};

struct SpectrumResult {
  SpectralReport report;
  std::vector<SpectrumRow> rows;
  std::optional<RhoKappa> rho_kappa;
  std::size_t violations = 0;  // bound failures above the comparison floor
  Eigen::MatrixXd matrix;
};

inline SpectrumResult spectrum_for(const PDEProblem& problem, const FeatureConfig& fc,
                                   std::size_t n, double rcond) {
  const CollocationGrid grid = equidistant_grid(n, problem.R(), problem.gamma);
  const TrialModel model = make_trial_model(fc, problem.R());
  const Assembly sys = assemble(problem, model, grid);
  if (!sys.matrix.values.allFinite()) throw NumericalError("non-finite entry in feature matrix");
  SpectrumResult out;
  out.matrix = sys.matrix.values;
  out.report = singular_values(sys.matrix.values, rcond);
  const auto& sig = out.report.sigma;
  const double cmp = out.report.comparison_floor();
  const double slack = out.report.floor;
  std::optional<SandwichCalculator> sandwich;
  std::optional<BoundParams> bp;
  if (sys.matrix.is_pum()) {
    sandwich.emplace(extract_blocks(sys.matrix));
  } else {
    bp = make_bound_params(problem, grid, fc.S, fc.N, sys.matrix.values.norm());
    out.rho_kappa = rho_and_kappa_lower(*bp, std::get<RandomFeatureModel>(model).sample().k);
  }
  for (Eigen::Index i = 0; i < sig.size(); ++i) {
    SpectrumRow row;
    row.m = i + 1;
    row.sigma = sig(i);
    row.floor = out.report.floor;
    if (bp) row.upper_bound = sigma_upper_bound(static_cast<int>(row.m), *bp);
    if (sandwich) {
      const auto b = sandwich->at(row.m);
      row.sandwich_lower = b.lower;
      row.sandwich_upper = b.upper;
      row.simplified_lower = b.lower_simplified;
      row.simplified_upper = b.upper_simplified;
    }
    if (row.sigma >= cmp) {
      if (row.upper_bound && row.sigma > *row.upper_bound) ++out.violations;
      if (row.sandwich_lower && (row.sigma < *row.sandwich_lower - slack ||
                                 row.sigma > *row.sandwich_upper + slack ||
                                 row.sigma < *row.simplified_lower - slack ||
                                 row.sigma > *row.simplified_upper + slack))
        ++out.violations;
    }
    out.rows.push_back(row);
  }
  return out;
}

inline void write_spectrum_csv(std::ostream& os, const SpectrumResult& s) {
  os << "# rfm spectrum " << csv_schema_version << "\n";
  os << "m,sigma,upper_bound,sandwich_lower,sandwich_upper,simplified_lower,simplified_upper,floor\n";
  os.precision(12);
  auto opt = [&](const std::optional<double>& v) {
    if (v) os << *v;
    os << ",";
  };
  for (const auto& r : s.rows) {
    os << r.m << "," << r.sigma << ",";
    opt(r.upper_bound);
    opt(r.sandwich_lower);
    opt(r.sandwich_upper);
    opt(r.simplified_lower);
    opt(r.simplified_upper);
    os << r.floor << "\n";
  }
}

inline void write_solution_csv(std::ostream& os, const SolveResult& res, const PDEProblem& p,
                               int samples) {
  os << "# rfm solution " << csv_schema_version << "\n";
  os << "x,u_N,u_true,error\n";
  os.precision(15);
  const double R = p.R();
  for (int i = 0; i < samples; ++i) {
    const double x = -R + 2.0 * R * i / (samples - 1);
    const double uN = eval_trial(res.model, x, 0);
    os << x << "," << uN << ",";
    if (p.exact) os << p.exact->u(x) << "," << uN - p.exact->u(x);
    else os << ",";
    os << "\n";
  }
}

/// Monte-Carlo suites: rho, A_i, Lemma 3.3 expectation, J(alpha) and Lemma B.1.
struct ProbabilityResult {
  std::vector<MonteCarloRow> rho, events, lemma33, jalpha;
};

inline ProbabilityResult run_probability(const ProbabilitySpec& spec) {
  ProbabilityResult out;
  SplitMix64 seeds(spec.seed);
  {
    const auto est = rho_monte_carlo(spec.rho_N, spec.rho_S, spec.rho_threshold, spec.rho_trials,
                                     seeds.next_u64());
    const double bound = std::pow(0.95, static_cast<double>(spec.rho_N));
    const auto ci = wilson_interval(est.successes, est.trials);
    MonteCarloRow row{"rho_below_threshold",
                      "N=" + std::to_string(spec.rho_N) + " S=" + std::to_string(spec.rho_S) +
                          " threshold=" + std::to_string(spec.rho_threshold),
                      est.frequency(), bound, ci.lo, ci.hi, est.trials,
                      est.frequency() <= bound + 3.0 * binomial_sigma(bound, est.trials)};
    out.rho.push_back(row);
  }
  for (std::size_t N : spec.ai_N) {
    for (double c : spec.ai_c) {
      const auto est = event_Ai_monte_carlo(N, c, spec.ai_C_u, spec.ai_S, spec.ai_trials,
                                            seeds.next_u64());
      const double bound = event_Ai_complement_bound(N, c);
      const auto ci = wilson_interval(est.successes, est.trials);
      out.events.push_back({"event_Ai_complement",
                            "N=" + std::to_string(N) + " c=" + std::to_string(c),
                            est.frequency(), bound, ci.lo, ci.hi, est.trials,
                            est.frequency() <= bound + 3.0 * binomial_sigma(bound, est.trials)});
    }
  }
  for (std::size_t N : spec.lemma33_N) {
    const auto est = lemma33_check(N, spec.lemma33_S, spec.lemma33_C_u, spec.lemma33_trials,
                                   seeds.next_u64());
    const auto ci = est.ci();
    out.lemma33.push_back({"lemma33_expectation", "N=" + std::to_string(N), est.mean, est.bound,
                           ci.lo, ci.hi, est.trials, ci.lo <= est.bound});
  }
  {
    const auto jm = jalpha_max(spec.j_lambda, spec.j_delta, spec.j_step);
    out.jalpha.push_back({"jalpha_max",
                          "lambda=" + std::to_string(spec.j_lambda) +
                              " delta=" + std::to_string(spec.j_delta),
                          jm.value, spec.j_bound, jm.value, jm.value, 0, jm.value <= spec.j_bound});
    for (double lam : {0.5, 2.375, 4.25, 6.125, 8.0}) {
      for (double del : {1.05, 1.1625, 1.275, 1.3875, 1.5}) {
        const auto m = jalpha_max(lam, del, spec.j_step);
        const double b = lemmaB1_bound(lam, del);
        out.jalpha.push_back({"lemmaB1",
                              "lambda=" + std::to_string(lam) + " delta=" + std::to_string(del),
                              m.value, b, m.value, m.value, 0, m.value <= b});
      }
    }
  }
  return out;
}

}  // namespace rfm
