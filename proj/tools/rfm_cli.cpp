#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "rfm/experiment.hpp"

namespace fs = std::filesystem;
using namespace rfm;

namespace {

struct Options {
  std::string config;
  std::string out = "rfm_out";
  std::string seeds;
  double rcond = 0.0;
  bool quiet = false;
};

ExperimentConfig load(const Options& o) {
  ExperimentConfig cfg = load_config(o.config);
  if (!o.seeds.empty()) cfg.seeds = parse_seed_list(o.seeds);
  if (o.rcond != 0.0) {
    cfg.solver.rcond = o.rcond;
    try {
      cfg.solver.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("--rcond: ") + e.what());
    }
  }
  return cfg;
}

std::ofstream open_out(const fs::path& dir, const std::string& name) {
  fs::create_directories(dir);
  std::ofstream os(dir / name);
  if (!os) throw std::runtime_error("cannot write " + (dir / name).string());
  return os;
}

void check_finite(const RunRecord& r) {
  if (!std::isfinite(r.loss)) throw NumericalError("non-finite loss for seed " + std::to_string(r.seed));
}

int cmd_solve(const Options& o) {
  const ExperimentConfig cfg = load(o);
  const PDEProblem problem = build_problem(cfg.problem);
  const fs::path dir(o.out);
  json records = json::array();
  for (std::uint64_t seed : cfg.seeds) {
    FeatureConfig fc = cfg.features;
    fc.seed = seed;
    const auto [rec, res] = solve_and_record(cfg, problem, fc);
    check_finite(rec);
    records.push_back(to_json(rec));
    auto os = open_out(dir, "solution_seed" + std::to_string(seed) + ".csv");
    write_solution_csv(os, res, problem, cfg.solution_samples);
    if (!o.quiet)
      std::cout << "seed " << seed << ": loss " << rec.loss << ", e0 " << rec.e0 << ", rank "
                << rec.rank << ", kappa " << rec.kappa << "\n";
  }
  auto os = open_out(dir, "solve.json");
  os << records.dump(2) << "\n";
  return 0;
}

int cmd_spectrum(const Options& o) {
  const ExperimentConfig cfg = load(o);
  const PDEProblem problem = build_problem(cfg.problem);
  const fs::path dir(o.out);
  json summary = json::array();
  for (std::uint64_t seed : cfg.seeds) {
    FeatureConfig fc = cfg.features;
    fc.seed = seed;
    const SpectrumResult s = spectrum_for(problem, fc, cfg.n, cfg.solver.rcond);
    const std::string tag = "seed" + std::to_string(seed);
    {
      auto os = open_out(dir, "spectrum_" + tag + ".csv");
      write_spectrum_csv(os, s);
    }
    {
      auto os = open_out(dir, "sparsity_" + tag + ".csv");
      os << "# rfm sparsity " << csv_schema_version << "\n";
      write_sparsity_triplets(os, s.matrix);
    }
    json j{{"seed", seed},
           {"rows", s.matrix.rows()},
           {"cols", s.matrix.cols()},
           {"sigma_1", s.report.sigma(0)},
           {"kappa", finite_or_null(s.report.kappa)},
           {"floor", s.report.floor},
           {"above_floor", s.report.above_floor_count},
           {"bound_violations", s.violations},
           {"config", echo_config(cfg, fc)}};
    if (s.rho_kappa) {
      j["rho"] = s.rho_kappa->rho;
      j["rho_bound"] = s.rho_kappa->rho_bound ? json(*s.rho_kappa->rho_bound) : json(nullptr);
      j["kappa_lower"] = finite_or_null(s.rho_kappa->kappa_lower);
    }
    summary.push_back(j);
    if (!o.quiet)
      std::cout << "seed " << seed << ": " << s.matrix.rows() << "x" << s.matrix.cols()
                << ", sigma_1 " << s.report.sigma(0) << ", above floor "
                << s.report.above_floor_count << ", bound violations " << s.violations << "\n";
  }
  auto os = open_out(dir, "spectrum.json");
  os << summary.dump(2) << "\n";
  return 0;
}

int cmd_converge(const Options& o, bool patches) {
  const ExperimentConfig cfg = load(o);
  const SweepResult s = patches ? converge_r(cfg) : converge_n(cfg);
  const fs::path dir(o.out);
  const std::string name = patches ? "converge_r" : "converge_n";
  {
    auto os = open_out(dir, name + ".csv");
    write_sweep_csv(os, s, patches);
  }
  json runs = json::array();
  for (const auto& p : s.points)
    for (const auto& r : p.runs) {
      check_finite(r);
      runs.push_back(to_json(r));
    }
  json j{{"runs", runs}, {"fitted_points", s.fitted_points}};
  if (s.fit) {
    j["fit"] = to_json(s.fit->best);
    j["candidates"] = json::array();
    for (const auto& c : s.fit->candidates) j["candidates"].push_back(to_json(c));
  }
  auto os = open_out(dir, name + ".json");
  os << j.dump(2) << "\n";
  if (!o.quiet) {
    for (const auto& p : s.points)
      std::cout << (patches ? "P " : "N ") << (patches ? p.P : static_cast<int>(p.N))
                << ": median rel e0 " << p.median_rel_e0 << "\n";
    if (s.fit)
      std::cout << "fit: " << to_string(s.fit->best.kind) << ", rate " << s.fit->best.rate << "\n";
    else
      std::cout << "fit: too few points before the precision floor\n";
  }
  return 0;
}

int cmd_probability(const Options& o) {
  const ExperimentConfig cfg = load(o);
  const ProbabilityResult r = run_probability(cfg.probability);
  const fs::path dir(o.out);
  auto write = [&](const std::string& name, const std::vector<MonteCarloRow>& rows) {
    auto os = open_out(dir, name);
    write_monte_carlo_csv(os, rows);
    if (!o.quiet)
      for (const auto& row : rows)
        std::cout << row.claim << " [" << row.params << "]: " << row.empirical << " vs "
                  << row.bound << (row.pass ? "" : "  (exceeds)") << "\n";
  };
  write("rho.csv", r.rho);
  write("events_ai.csv", r.events);
  write("lemma33.csv", r.lemma33);
  write("jalpha.csv", r.jalpha);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random feature method solver and spectral diagnostics"};
  app.require_subcommand(1);
  Options o;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON experiment configuration")->required();
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--seeds", o.seeds, "seed list, e.g. 0,1,5-9");
    sub->add_option("--rcond", o.rcond, "relative SVD cutoff");
    sub->add_flag("--quiet", o.quiet, "no summary on stdout");
  };
  auto* solve = app.add_subcommand("solve", "single solve per seed");
  auto* spectrum = app.add_subcommand("spectrum", "singular values with bound overlays");
  auto* conv_n = app.add_subcommand("converge-n", "error sweep over the feature count");
  auto* conv_r = app.add_subcommand("converge-r", "error sweep over the patch count");
  auto* prob = app.add_subcommand("probability", "Monte-Carlo checks of the probabilistic claims");
  for (auto* s : {solve, spectrum, conv_n, conv_r, prob}) add_common(s);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*solve) return cmd_solve(o);
    if (*spectrum) return cmd_spectrum(o);
    if (*conv_n) return cmd_converge(o, false);
    if (*conv_r) return cmd_converge(o, true);
    if (*prob) return cmd_probability(o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
