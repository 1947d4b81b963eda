// Command-line driver for the stochastic heat-equation laboratory.
//
// Subcommands: kernel-check, kernel-dump, noise-check, homogeneous,
// simulate, picard, verify <suite>.
//
// Exit codes: 0 pass, 1 test failure, 2 configuration error,
// 3 hypothesis violation (the message names the violated hypothesis).

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "shel/analysis.hpp"
#include "shel/csv.hpp"
#include "shel/errors.hpp"
#include "shel/run_config.hpp"

#ifndef SHEL_VERSION_STRING
#define SHEL_VERSION_STRING "0.0.0"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace shel;

namespace {

struct Common {
  std::string config;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string out = "out";
  std::size_t paths = 0;
  bool paths_given = false;
};

void add_common(CLI::App* sub, Common& c, bool config_required) {
  auto* cfg = sub->add_option("--config", c.config, "run configuration file");
  if (config_required) cfg->required();
  sub->add_option("--seed", c.seed, "override the master seed")
      ->each([&c](const std::string&) { c.seed_given = true; });
  sub->add_option("--out", c.out, "output directory (default: out)");
  sub->add_option("--paths", c.paths, "override the ensemble size")
      ->each([&c](const std::string&) { c.paths_given = true; });
}

RunConfig config_for(const Common& c) {
  RunConfig rc = load_run_config(c.config);
  if (c.seed_given) rc.solve.seed.master = c.seed;
  if (c.paths_given) {
    if (c.paths < 1) throw ConfigError("config: paths must be at least 1");
    rc.paths = c.paths;
  }
  refresh_canonical(rc);
  return rc;
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

fs::path ensure_out(const Common& c) {
  fs::path dir(c.out);
  fs::create_directories(dir);
  return dir;
}

// Run record: everything needed to reproduce the run (resolved config,
// seed, code version) plus whatever the command reports. No timestamps, so
// identical runs produce identical records.
void write_metadata(const fs::path& dir, const RunConfig& rc,
                    const json& extras) {
  json j;
  j["code_version"] = SHEL_VERSION_STRING;
  j["config"] = rc.resolved;
  j["config_hash"] = hash_hex(rc.config_hash);
  j["seed"] = rc.solve.seed.master;
  j["paths"] = rc.paths;
  for (const auto& [key, value] : extras.items()) j[key] = value;
  std::ofstream os(dir / "run.json");
  os << j.dump(2) << '\n';
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  os << content;
  if (!os) fail("cannot write '" + path.string() + "'");
}

struct CheckPrinter {
  bool all_passed = true;

  void line(bool ok, const std::string& label, double value, double bound) {
    all_passed = all_passed && ok;
    std::printf("[%s] %-58s %.3e (bound %.1e)\n", ok ? "PASS" : "FAIL",
                label.c_str(), value, bound);
  }
  void note(const std::string& label, double value) {
    std::printf("       %-58s %.6g\n", label.c_str(), value);
  }
};

// ---------------------------------------------------------------------------
// kernel-check: transition-kernel validation at one grid size.

int cmd_kernel_check(const Common& c) {
  std::size_t grid_n = 128;
  if (!c.config.empty()) grid_n = config_for(c).solve.grid_n;
  const Grid grid = Grid::uniform(grid_n);
  CheckPrinter out;
  const BoundaryKind kinds[] = {BoundaryKind::C1, BoundaryKind::C2,
                                BoundaryKind::C3, BoundaryKind::C4};
  for (BoundaryKind kind : kinds) {
    for (double t : {0.01, 0.1, 1.0}) {
      const KernelTable table = build_kernel_table(kind, grid, t);
      double vs_series = 0.0, asym = 0.0, mass = 0.0;
      for (std::size_t i = 0; i < grid_n; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < grid_n; ++j) {
          vs_series = std::max(
              vs_series, std::abs(table.at(i, j) -
                                  spectral_kernel(kind, t, grid.nodes[i],
                                                  grid.nodes[j])));
          asym = std::max(asym, std::abs(table.at(i, j) - table.at(j, i)));
          row += grid.weights[j] * std::abs(table.at(i, j));
        }
        mass = std::max(mass, row);
      }
      const std::string tag =
          std::string(to_string(kind)) + " t=" + format_double(t);
      out.line(vs_series <= 1e-9, tag + " image vs series", vs_series, 1e-9);
      out.line(asym <= 1e-10, tag + " symmetry", asym, 1e-10);
      out.line(mass <= 12.0, tag + " row mass", mass, 12.0);
      if (kind == BoundaryKind::C2) {
        double worst = 0.0;
        for (std::size_t i = 0; i < grid_n; ++i) {
          double row = 0.0;
          for (std::size_t j = 0; j < grid_n; ++j)
            row += grid.weights[j] * table.at(i, j);
          worst = std::max(worst, std::abs(row - 1.0));
        }
        out.line(worst <= 1e-10, tag + " conserved mass", worst, 1e-10);
      }
    }
  }
  std::printf("kernel-check: %s\n", out.all_passed ? "PASS" : "FAIL");
  return out.all_passed ? 0 : 1;
}

// ---------------------------------------------------------------------------
// kernel-dump: write one transition-kernel table as CSV.

int cmd_kernel_dump(const Common& c) {
  BoundaryKind kind = BoundaryKind::C1;
  std::size_t grid_n = 128;
  double t = 0.1;
  RunConfig rc;
  if (!c.config.empty()) {
    rc = config_for(c);
    kind = rc.solve.kind;
    grid_n = rc.solve.grid_n;
    t = rc.solve.time.horizon();
  } else {
    rc.resolved["kind"] = to_string(kind);
    rc.resolved["grid"] = std::to_string(grid_n);
    refresh_canonical(rc);
  }
  const Grid grid = Grid::uniform(grid_n);
  const KernelTable table = build_kernel_table(kind, grid, t);

  std::string csv;
  for (std::size_t j = 0; j < grid_n; ++j) {
    if (j) csv += ',';
    csv += "x_" + std::to_string(j);
  }
  csv += '\n';
  for (std::size_t i = 0; i < grid_n; ++i) {
    for (std::size_t j = 0; j < grid_n; ++j) {
      if (j) csv += ',';
      csv += format_double(table.at(i, j));
    }
    csv += '\n';
  }
  const fs::path dir = ensure_out(c);
  write_file(dir / "kernel.csv", csv);
  write_metadata(dir, rc,
                 {{"command", "kernel-dump"},
                  {"kernel_kind", to_string(kind)},
                  {"kernel_t", t},
                  {"outputs", {"kernel.csv"}}});
  std::printf("wrote %s (%zu x %zu, t = %g)\n",
              (dir / "kernel.csv").string().c_str(), grid_n, grid_n, t);
  return 0;
}

// ---------------------------------------------------------------------------
// noise-check: covariance factorization + sampled functional covariance.

int cmd_noise_check(const Common& c) {
  const Grid grid = Grid::uniform(64);
  CheckPrinter out;

  std::vector<CovKernel> kernels;
  if (!c.config.empty()) {
    kernels.push_back(config_for(c).solve.kappa);
  } else {
    kernels.push_back(constant_kernel(1.0));
    kernels.push_back(exponential_kernel(0.2));
    kernels.push_back(gaussian_kernel(0.1));
    kernels.push_back(brownian_kernel(1.0));
  }

  Field phi(grid.size()), psi(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    phi[j] = std::sin(3.14159265358979323846 * grid.nodes[j]);
    psi[j] = grid.nodes[j] * (1.0 - grid.nodes[j]);
  }

  for (const CovKernel& kernel : kernels) {
    const CovFactor factor = build_cov_factor(kernel, grid);
    const double residual = factor_residual(factor, kernel);
    out.line(residual <= 1e-8, kernel.name + " factor residual", residual,
             1e-8);

    const std::size_t n_draws = 100000;
    NormalStream rng({c.seed_given ? c.seed : 7, 0});
    double mean = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < n_draws; ++i) {
      const NoiseIncrement inc = sample_increment(factor, 1.0, rng);
      double a = 0.0, b = 0.0;
      for (std::size_t j = 0; j < grid.size(); ++j) {
        a += grid.weights[j] * phi[j] * inc.values[j];
        b += grid.weights[j] * psi[j] * inc.values[j];
      }
      const double x = a * b;
      const double d = x - mean;
      mean += d / static_cast<double>(i + 1);
      m2 += d * (x - mean);
    }
    const double se =
        std::sqrt(m2 / static_cast<double>(n_draws - 1) /
                  static_cast<double>(n_draws));
    const double expected = integral_covariance(grid, phi, psi, kernel, 1.0);
    const double gap = std::abs(mean - expected);
    out.line(gap <= 4.0 * se, kernel.name + " sampled covariance (4 SE)", gap,
             4.0 * se);
    out.note(kernel.name + " expected functional covariance", expected);
  }
  std::printf("noise-check: %s\n", out.all_passed ? "PASS" : "FAIL");
  return out.all_passed ? 0 : 1;
}

// ---------------------------------------------------------------------------
// homogeneous: direct noiseless drift-free evaluation on the time grid.

int cmd_homogeneous(const Common& c) {
  RunConfig rc = config_for(c);
  SolveConfig cfg = rc.solve;
  cfg.coeffs = make_coefficients("zero", 0.0, "zero", 0.0, 0.0);
  std::vector<double> times(cfg.time.n_steps + 1);
  for (std::size_t k = 0; k <= cfg.time.n_steps; ++k)
    times[k] = cfg.time.node(k);
  const std::vector<Field> fields = homogeneous_solution(cfg, times);

  Trajectory traj;
  traj.time = cfg.time;
  traj.states = fields;
  const fs::path dir = ensure_out(c);
  write_file(dir / "homogeneous.csv", trajectory_csv(traj));
  write_metadata(dir, rc,
                 {{"command", "homogeneous"},
                  {"clamp_activations", 0},
                  {"outputs", {"homogeneous.csv"}}});
  std::printf("wrote %s (%zu times, grid %zu)\n",
              (dir / "homogeneous.csv").string().c_str(), times.size(),
              cfg.grid_n);
  return 0;
}

// ---------------------------------------------------------------------------
// simulate: ensemble of trajectories, one CSV per path.

std::string path_file_name(std::size_t p) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "path_%04zu.csv", p);
  return buf;
}

int cmd_simulate(const Common& c) {
  RunConfig rc = config_for(c);
  SolveConfig cfg = rc.solve;
  const StepContext ctx = make_step_context(cfg);
  const fs::path dir = ensure_out(c);

  std::size_t clamp_total = 0;
  json outputs = json::array();
  for (std::size_t p = 0; p < rc.paths; ++p) {
    cfg.seed.stream = p;
    const Trajectory traj = simulate(cfg, ctx);
    clamp_total += traj.clamp_activations;
    const std::string name = path_file_name(p);
    write_file(dir / name, trajectory_csv(traj));
    outputs.push_back(name);
  }
  write_metadata(dir, rc,
                 {{"command", "simulate"},
                  {"clamp_activations", clamp_total},
                  {"outputs", outputs}});
  std::printf("wrote %zu path file(s) to %s (clamp activations: %zu)\n",
              rc.paths, dir.string().c_str(), clamp_total);
  return 0;
}

// ---------------------------------------------------------------------------
// picard: fixed-point solve against recorded noise, checked per iteration.

int cmd_picard(const Common& c) {
  RunConfig rc = config_for(c);
  SolveConfig cfg = rc.solve;
  cfg.record_increments = true;
  const StepContext ctx = make_step_context(cfg);
  const Trajectory direct = simulate(cfg, ctx);
  const BoundaryPath path = generate_boundary(
      cfg.boundary, cfg.time, {cfg.seed.master, 2 * cfg.seed.stream + 1});
  auto [limit, report] =
      picard_solve(cfg, ctx, path, direct.increments, 0.0, 60, 1e-10);

  double vs_direct = 0.0;
  for (std::size_t k = 0; k < limit.states.size(); ++k)
    for (std::size_t j = 0; j < limit.states[k].size(); ++j)
      vs_direct = std::max(
          vs_direct, std::abs(limit.states[k][j] - direct.states[k][j]));

  std::printf("iteration distances (sup over time and space):\n");
  for (std::size_t i = 0; i < report.sup_distances.size(); ++i)
    std::printf("  %2zu: %.6e\n", i + 1, report.sup_distances[i]);
  const bool ok = report.converged && vs_direct <= 1e-6;
  std::printf("limit vs direct stepping: %.3e\n", vs_direct);

  const fs::path dir = ensure_out(c);
  write_file(dir / "picard.csv", trajectory_csv(limit));
  write_metadata(dir, rc,
                 {{"command", "picard"},
                  {"iterations", report.iterations},
                  {"converged", report.converged},
                  {"sup_distances", report.sup_distances},
                  {"limit_vs_direct", vs_direct},
                  {"clamp_activations", 0},
                  {"outputs", {"picard.csv"}}});
  std::printf("picard: %s (%zu iterations)\n", ok ? "PASS" : "FAIL",
              report.iterations);
  return ok ? 0 : 1;
}

// ---------------------------------------------------------------------------
// verify suites: canned statistical experiments with pass / fail verdicts.

RunConfig suite_config(const std::string& text, const Common& c) {
  RunConfig rc = parse_run_config(text);
  if (c.seed_given) rc.solve.seed.master = c.seed;
  if (c.paths_given) {
    if (c.paths < 1) throw ConfigError("config: paths must be at least 1");
    rc.paths = c.paths;
  }
  refresh_canonical(rc);
  return rc;
}

int verify_comparison(const Common& c) {
  const RunConfig rc = suite_config(R"(
name = verify-comparison
kind = c2
grid = 128
dt = 0.001
t_end = 0.5
seed = 11
paths = 200
g = { kind = constant, param = -0.25 }
h = { kind = linear, scale = 0.3 }
kappa = { kind = exponential, ell = 0.2 }
initial = { kind = constant, a = 1 }
)",
                                   c);
  SolveConfig lower = rc.solve;
  SolveConfig upper = rc.solve;
  upper.coeffs = make_coefficients("constant", 0.25, "linear", 0.0, 0.3);
  const ComparisonReport report =
      comparison_test(lower, upper, rc.paths, 1e-8);
  CheckPrinter out;
  out.line(report.violation_fraction <= 1e-3,
           "ordering violation fraction (eps = 1e-8)",
           report.violation_fraction, 1e-3);
  out.note("worst gap (lower - upper)", report.worst_gap);
  out.note("samples compared", static_cast<double>(report.samples));
  std::printf("verify comparison: %s\n", out.all_passed ? "PASS" : "FAIL");
  return out.all_passed ? 0 : 1;
}

int verify_positivity(const Common& c) {
  const RunConfig rc = suite_config(R"(
name = verify-positivity
kind = c1
grid = 128
dt = 0.001
t_end = 0.25
seed = 13
paths = 200
h = { kind = sqrt_plus, scale = 1 }
initial = { kind = sine, a = 1 }
)",
                                   c);
  const PositivityReport report = positivity_test(rc.solve, rc.paths);
  CheckPrinter out;
  // Threshold ladder in units of sqrt(dt); the pass line is the 10 sqrt(dt)
  // level, matching the scale of one noise kick on a nearly absorbed state.
  for (std::size_t l = 0; l < report.thresholds.size(); ++l)
    out.note("fraction below -" + format_double(report.thresholds[l]) +
                 " sqrt(dt)",
             report.fractions[l]);
  const double frac10 = report.fractions.size() > 2 ? report.fractions[2] : 1.0;
  out.line(frac10 <= 1e-3, "fraction below -10 sqrt(dt)", frac10, 1e-3);
  out.note("worst excursion", -report.min_value);
  out.note("p99 negative excursion / sqrt(dt)", report.p99_excursion);
  std::printf("verify positivity: %s\n", out.all_passed ? "PASS" : "FAIL");
  return out.all_passed ? 0 : 1;
}

int verify_uniqueness(const Common& c) {
  const RunConfig rc = suite_config(R"(
name = verify-uniqueness
kind = c2
grid = 64
dt = 0.001
t_end = 0.25
seed = 17
paths = 50
g = { kind = linear, param = -1 }
h = { kind = linear, scale = 0.5 }
kappa = { kind = exponential, ell = 0.2 }
initial = { kind = constant, a = 0.5 }
)",
                                   c);
  const UniquenessReport report =
      uniqueness_coupling_test(rc.solve, rc.paths, 0.0, 1.0, 1e-8);
  CheckPrinter out;
  out.line(report.max_distance <= 1e-7, "max limit distance over replays",
           report.max_distance, 1e-7);
  out.line(report.negative_control_distance >= 1e-2,
           "negative control distance (different noise) >= 1e-2 ->",
           report.negative_control_distance, 1e-2);
  out.line(report.all_converged ? 0.0 : 1.0, "all Picard solves converged",
           report.all_converged ? 0.0 : 1.0, 0.5);
  out.note("max iterations used", static_cast<double>(report.max_iterations));
  std::printf("verify uniqueness: %s\n", out.all_passed ? "PASS" : "FAIL");
  return out.all_passed ? 0 : 1;
}

int verify_holder(const Common& c) {
  // Smoke-scale regularity fits: additive noise on a Neumann interval,
  // short-range covariance. Spatial: interior window fits near 1/2;
  // temporal: near 1/4. Lag windows sit above the correlation length and
  // the step resolution, below the saturation scale.
  CheckPrinter out;
  {
    const RunConfig rc = suite_config(R"(
name = verify-holder-space
kind = c2
grid = 501
dt = 0.000005
t_end = 0.04
seed = 19
paths = 100
h = { kind = constant, scale = 1 }
kappa = { kind = gaussian, ell = 0.002 }
)",
                                     c);
    const double snaps[] = {0.03, 0.035, 0.04};
    const std::size_t lags[] = {6, 10, 18, 34, 64};
    const IncrementMoments moments = spatial_increment_moments(
        rc.solve, rc.paths, 2, snaps, 0.2, 0.7, lags);
    const HolderFit fit = holder_fit(moments);
    out.line(fit.implied_exponent >= 0.35 && fit.implied_exponent <= 0.65,
             "spatial implied exponent in [0.35, 0.65]", fit.implied_exponent,
             0.65);
    out.note("spatial fit half-width", fit.ci_halfwidth);
  }
  {
    const RunConfig rc = suite_config(R"(
name = verify-holder-time
kind = c2
grid = 501
dt = 0.000004
t_end = 0.022
seed = 19
paths = 100
h = { kind = constant, scale = 1 }
kappa = { kind = gaussian, ell = 0.001 }
)",
                                     c);
    const double bases[] = {0.0164, 0.0174, 0.0184};
    const double probes[] = {0.3, 0.4, 0.5, 0.6, 0.7};
    const std::size_t lags[] = {90, 160, 280, 500, 900};
    const IncrementMoments moments = temporal_increment_moments(
        rc.solve, rc.paths, 2, bases, probes, lags);
    const HolderFit fit = holder_fit(moments);
    out.line(fit.implied_exponent >= 0.15 && fit.implied_exponent <= 0.35,
             "temporal implied exponent in [0.15, 0.35]", fit.implied_exponent,
             0.35);
    out.note("temporal fit half-width", fit.ci_halfwidth);
  }
  std::printf("verify holder: %s\n", out.all_passed ? "PASS" : "FAIL");
  return out.all_passed ? 0 : 1;
}

int verify_noise(const Common& c) { return cmd_noise_check(c); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stochastic heat-equation laboratory"};
  app.set_version_flag("--version", SHEL_VERSION_STRING);
  app.require_subcommand(1);

  Common common;
  std::function<int()> action;

  auto* kernel_check =
      app.add_subcommand("kernel-check", "validate the transition kernels");
  add_common(kernel_check, common, false);
  kernel_check->callback([&] { action = [&] { return cmd_kernel_check(common); }; });

  auto* kernel_dump =
      app.add_subcommand("kernel-dump", "write one kernel table as CSV");
  add_common(kernel_dump, common, false);
  kernel_dump->callback([&] { action = [&] { return cmd_kernel_dump(common); }; });

  auto* noise_check =
      app.add_subcommand("noise-check", "validate the noise factorization");
  add_common(noise_check, common, false);
  noise_check->callback([&] { action = [&] { return cmd_noise_check(common); }; });

  auto* homogeneous = app.add_subcommand(
      "homogeneous", "noiseless drift-free solution by direct evaluation");
  add_common(homogeneous, common, true);
  homogeneous->callback([&] { action = [&] { return cmd_homogeneous(common); }; });

  auto* simulate_cmd =
      app.add_subcommand("simulate", "run trajectories and write CSV");
  add_common(simulate_cmd, common, true);
  simulate_cmd->callback([&] { action = [&] { return cmd_simulate(common); }; });

  auto* picard = app.add_subcommand(
      "picard", "fixed-point solve against recorded noise");
  add_common(picard, common, true);
  picard->callback([&] { action = [&] { return cmd_picard(common); }; });

  std::string suite;
  auto* verify = app.add_subcommand("verify", "run a canned experiment suite");
  verify->add_option("suite", suite, "one of: comparison, positivity, uniqueness, holder, noise")
      ->required()
      ->check(CLI::IsMember(
          {"comparison", "positivity", "uniqueness", "holder", "noise"}));
  add_common(verify, common, false);
  verify->callback([&] {
    action = [&] {
      if (suite == "comparison") return verify_comparison(common);
      if (suite == "positivity") return verify_positivity(common);
      if (suite == "uniqueness") return verify_uniqueness(common);
      if (suite == "holder") return verify_holder(common);
      return verify_noise(common);
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    return action ? action() : 2;
  } catch (const HypothesisError& e) {
    std::cerr << "hypothesis violated: " << e.what() << '\n';
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
