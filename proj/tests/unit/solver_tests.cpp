#include "doctest.h"

#include "shel/boundary.hpp"
#include "shel/coefficients.hpp"
#include "shel/errors.hpp"
#include "shel/grid.hpp"
#include "shel/noise.hpp"
#include "shel/solver.hpp"

#include <cmath>
#include <numbers>
#include <vector>

using namespace shel;

namespace {
constexpr double kPi = std::numbers::pi;

SolveConfig base_config(BoundaryKind kind, std::size_t grid_n, double dt,
                        std::size_t n_steps) {
  SolveConfig cfg;
  cfg.kind = kind;
  cfg.grid_n = grid_n;
  cfg.time = TimeGrid{0.0, dt, n_steps};
  cfg.seed = SeedSpec{424242u, 0u};
  cfg.kappa = constant_kernel(1.0);
  cfg.coeffs = additive_pair(0.0);  // noiseless, zero drift by default
  cfg.boundary.kind = BoundaryGen::constant;
  cfg.boundary.c0 = 0.0;
  cfg.boundary.c1 = 0.0;
  cfg.initial.kind = "zero";
  return cfg;
}

double sup_diff(const Field& a, const Field& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

BoundaryPath path_for(const SolveConfig& cfg) {
  return generate_boundary(cfg.boundary, cfg.time,
                           SeedSpec{cfg.seed.master, 2u * cfg.seed.stream + 1u});
}
}  // namespace

TEST_CASE("initial state recipes materialize correctly") {
  const Grid g = Grid::uniform(16);
  InitialSpec spec;
  spec.kind = "linear";
  spec.a = 0.5;
  spec.b = -0.25;
  const Field lin = spec.materialize(g);
  for (std::size_t i = 0; i < g.size(); ++i)
    CHECK(lin[i] == doctest::Approx(0.5 - 0.25 * g.nodes[i]).epsilon(1e-15));

  spec.kind = "sine";
  spec.a = 2.0;
  spec.mode = 2;
  const Field sn = spec.materialize(g);
  for (std::size_t i = 0; i < g.size(); ++i)
    CHECK(sn[i] == doctest::Approx(2.0 * std::sin(2.0 * kPi * g.nodes[i])).epsilon(1e-14));

  spec.kind = "cosine";
  spec.mode = 1;
  const Field cs = spec.materialize(g);
  CHECK(cs[0] == doctest::Approx(2.0).epsilon(1e-15));

  spec.kind = "custom";
  spec.custom = Field(g.size(), 1.25);
  const Field cu = spec.materialize(g);
  CHECK(cu == spec.custom);

  spec.kind = "triangle";
  CHECK_THROWS_AS(spec.materialize(g), Error);
}

TEST_CASE("noiseless sine mode decays at the exact heat rate") {
  SolveConfig cfg = base_config(BoundaryKind::C1, 128, 1e-3, 100);
  cfg.initial.kind = "sine";
  cfg.initial.a = 1.0;
  const Trajectory traj = simulate(cfg);
  REQUIRE(traj.states.size() == 101);
  const Grid g = cfg.make_grid();
  double worst = 0.0;
  for (std::size_t k = 0; k <= 100; ++k) {
    const double t = cfg.time.node(k);
    const double amp = std::exp(-kPi * kPi * t / 2.0);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double exact = amp * std::sin(kPi * g.nodes[i]);
      worst = std::max(worst, std::abs(traj.states[k][i] - exact));
    }
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("stepping matches the direct representation for smooth data") {
  // Nonhomogeneous, time-dependent boundary data with a compatible initial
  // state; the stepper and the one-shot evaluation must agree to 1e-6.
  auto run_case = [&](BoundaryKind kind) {
    SolveConfig cfg = base_config(kind, 128, 5e-4, 400);
    cfg.boundary.kind = BoundaryGen::sinusoid;
    if (kind == BoundaryKind::C1) {
      cfg.boundary.c0 = 0.1;
      cfg.boundary.amp0 = 0.2;
      cfg.boundary.omega0 = 3.0;
      cfg.boundary.phase0 = 0.3;
      cfg.boundary.c1 = 0.4;
      cfg.boundary.amp1 = 0.15;
      cfg.boundary.omega1 = 2.0;
      cfg.boundary.phase1 = 1.0;
      const double mu0 = 0.1 + 0.2 * std::sin(0.3);
      const double mu1 = 0.4 + 0.15 * std::sin(1.0);
      cfg.initial.kind = "linear";
      cfg.initial.a = mu0;           // value at x = 0
      cfg.initial.b = mu1 - mu0;     // value at x = 1 matches
    } else {  // C3: left value, right slope
      cfg.boundary.c0 = 0.2;
      cfg.boundary.amp0 = 0.3;
      cfg.boundary.omega0 = 2.0;
      cfg.boundary.phase0 = 0.0;
      cfg.boundary.c1 = 0.5;
      cfg.boundary.amp1 = 0.0;
      cfg.initial.kind = "linear";
      cfg.initial.a = 0.2;  // matches mu0(0)
      cfg.initial.b = 0.5;  // slope matches mu1
    }

    std::vector<Field> at_times(2);
    const StepContext ctx = make_step_context(cfg);
    const BoundaryPath path = path_for(cfg);
    run_path(cfg, ctx, path, SeedSpec{cfg.seed.master, 0u},
             [&](std::size_t k, double, const Field& y) {
               if (k == 200) at_times[0] = y;
               if (k == 400) at_times[1] = y;
             });

    const double times[2] = {0.1, 0.2};
    const std::vector<Field> direct =
        homogeneous_solution(cfg, std::span<const double>(times, 2));
    CAPTURE(to_string(kind));
    CHECK(sup_diff(at_times[0], direct[0]) <= 1e-6);
    CHECK(sup_diff(at_times[1], direct[1]) <= 1e-6);
  };

  run_case(BoundaryKind::C1);
  run_case(BoundaryKind::C3);
}

TEST_CASE("steady boundary data drive the stepper to the steady profile") {
  SolveConfig cfg = base_config(BoundaryKind::C4, 96, 2e-3, 1500);  // T = 3... slow mode
  cfg.time = TimeGrid{0.0, 2e-3, 4000};                             // T = 8
  cfg.boundary.c0 = -0.6;  // slope datum at x = 0
  cfg.boundary.c1 = 0.8;   // value datum at x = 1
  const Trajectory traj = simulate(cfg);
  const Grid g = cfg.make_grid();
  double worst = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double steady = 0.8 - 0.6 * (g.nodes[i] - 1.0);
    worst = std::max(worst, std::abs(traj.states.back()[i] - steady));
  }
  CHECK(worst <= 1e-3);
}

TEST_CASE("value ends are imposed exactly and slope ends to second order") {
  SolveConfig cfg = base_config(BoundaryKind::C1, 64, 1e-3, 50);
  cfg.boundary.kind = BoundaryGen::brownian;
  cfg.boundary.c0 = 0.3;
  cfg.boundary.sigma0 = 0.5;
  cfg.boundary.c1 = -0.2;
  cfg.boundary.sigma1 = 0.25;
  cfg.coeffs = linear_pair(0.0, 0.3);
  cfg.kappa = exponential_kernel(0.2);
  cfg.initial.kind = "zero";  // mild formulation tolerates the corner jump

  const StepContext ctx = make_step_context(cfg);
  const BoundaryPath path = path_for(cfg);
  run_path(cfg, ctx, path, SeedSpec{cfg.seed.master, 2u * cfg.seed.stream},
           [&](std::size_t k, double, const Field& y) {
             if (k == 0) return;
             CHECK(std::abs(y.front() - path.mu0[k]) <= 1e-12);
             CHECK(std::abs(y.back() - path.mu1[k]) <= 1e-12);
           });

  // Slope ends: the one-sided second-order difference reproduces the datum.
  SolveConfig cfg2 = base_config(BoundaryKind::C2, 64, 1e-3, 50);
  cfg2.boundary.c0 = 0.7;
  cfg2.boundary.c1 = -0.4;
  cfg2.initial.kind = "constant";
  cfg2.initial.a = 0.1;
  const Grid g2 = cfg2.make_grid();
  const double h = g2.spacing();
  const StepContext ctx2 = make_step_context(cfg2);
  const BoundaryPath path2 = path_for(cfg2);
  run_path(cfg2, ctx2, path2, SeedSpec{cfg2.seed.master, 0u},
           [&](std::size_t k, double, const Field& y) {
             if (k == 0) return;
             const std::size_t n = y.size();
             const double s0 = (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * h);
             const double s1 = (3.0 * y[n - 1] - 4.0 * y[n - 2] + y[n - 3]) / (2.0 * h);
             CHECK(std::abs(s0 - 0.7) <= 1e-10);
             CHECK(std::abs(s1 - (-0.4)) <= 1e-10);
           });
}

TEST_CASE("zero data with state-proportional noise stay exactly zero") {
  SolveConfig cfg = base_config(BoundaryKind::C1, 64, 1e-3, 60);
  cfg.coeffs = sqrt_plus_pair(1.0);
  cfg.kappa = exponential_kernel(0.2);
  const Trajectory traj = simulate(cfg);
  for (const Field& y : traj.states)
    for (double v : y) CHECK(v == 0.0);
  CHECK(traj.clamp_activations == 0);
}

TEST_CASE("simulation is reproducible per seed") {
  SolveConfig cfg = base_config(BoundaryKind::C2, 48, 2e-3, 25);
  cfg.coeffs = additive_pair(0.3);
  cfg.kappa = gaussian_kernel(0.15);
  cfg.initial.kind = "constant";
  cfg.initial.a = 0.2;
  const Trajectory a = simulate(cfg);
  const Trajectory b = simulate(cfg);
  REQUIRE(a.states.size() == b.states.size());
  for (std::size_t k = 0; k < a.states.size(); ++k) CHECK(a.states[k] == b.states[k]);

  cfg.seed.master = 77u;
  const Trajectory c = simulate(cfg);
  bool differs = false;
  for (std::size_t k = 0; k < a.states.size() && !differs; ++k)
    differs = (a.states[k] != c.states[k]);
  CHECK(differs);
}

TEST_CASE("recorded increments replay to the identical trajectory") {
  SolveConfig cfg = base_config(BoundaryKind::C3, 48, 1e-3, 80);
  cfg.coeffs = logistic_pair(1.0, 0.5);
  cfg.kappa = exponential_kernel(0.3);
  cfg.initial.kind = "sine";
  cfg.initial.a = 0.4;
  cfg.record_increments = true;
  const Trajectory traj = simulate(cfg);
  REQUIRE(traj.increments.size() == 80);

  const StepContext ctx = make_step_context(cfg);
  const BoundaryPath path = path_for(cfg);
  std::vector<Field> replayed;
  run_path(cfg, ctx, path, SeedSpec{999u, 999u},  // seed unused during replay
           [&](std::size_t, double, const Field& y) { replayed.push_back(y); },
           nullptr, &traj.increments);
  REQUIRE(replayed.size() == traj.states.size());
  for (std::size_t k = 0; k < replayed.size(); ++k) CHECK(replayed[k] == traj.states[k]);

  // Replay validates the increment count.
  std::vector<Field> short_record(traj.increments.begin(), traj.increments.end() - 1);
  CHECK_THROWS_AS(
      run_path(cfg, ctx, path, SeedSpec{0u, 0u},
               [](std::size_t, double, const Field&) {}, nullptr, &short_record),
      Error);
}

TEST_CASE("without recording no increments are stored") {
  SolveConfig cfg = base_config(BoundaryKind::C1, 48, 1e-3, 10);
  cfg.coeffs = additive_pair(0.2);
  const Trajectory traj = simulate(cfg);
  CHECK(traj.increments.empty());
}

TEST_CASE("refining the step halves the coupling error at order one half") {
  // Couple a run at dt with a run at dt/2 by replaying the pairwise sums of
  // the fine increments; the gap at the horizon scales like sqrt(dt).
  SolveConfig proto = base_config(BoundaryKind::C1, 48, 0.0, 0);
  proto.coeffs = linear_pair(0.0, 0.5);
  proto.kappa = exponential_kernel(0.2);
  proto.initial.kind = "sine";
  proto.initial.a = 1.0;

  const double horizon = 0.2;
  auto coupling_error = [&](double dt, std::uint64_t path_index) {
    SolveConfig fine = proto;
    fine.time = TimeGrid{0.0, dt / 2.0, static_cast<std::size_t>(std::llround(2.0 * horizon / dt))};
    fine.seed = SeedSpec{20260819u, path_index};
    fine.record_increments = true;
    const Trajectory ft = simulate(fine);

    SolveConfig coarse = proto;
    coarse.time = TimeGrid{0.0, dt, static_cast<std::size_t>(std::llround(horizon / dt))};
    coarse.seed = fine.seed;
    std::vector<Field> summed(coarse.time.n_steps, Field(proto.grid_n, 0.0));
    for (std::size_t k = 0; k < summed.size(); ++k)
      for (std::size_t i = 0; i < proto.grid_n; ++i)
        summed[k][i] = ft.increments[2 * k][i] + ft.increments[2 * k + 1][i];

    const StepContext ctx = make_step_context(coarse);
    const BoundaryPath path = path_for(coarse);
    Field final_state;
    run_path(coarse, ctx, path, SeedSpec{0u, 0u},
             [&](std::size_t k, double, const Field& y) {
               if (k == coarse.time.n_steps) final_state = y;
             },
             nullptr, &summed);
    return sup_diff(final_state, ft.states.back());
  };

  const int n_paths = 8;
  double e_coarse = 0.0, e_fine = 0.0;
  for (int p = 0; p < n_paths; ++p) {
    e_coarse += coupling_error(4e-3, static_cast<std::uint64_t>(p));
    e_fine += coupling_error(1e-3, static_cast<std::uint64_t>(p));
  }
  e_coarse /= n_paths;
  e_fine /= n_paths;
  CHECK(e_fine < e_coarse);
  const double ratio = e_coarse / e_fine;  // dt ratio 4, strong order 1/2 -> ~2
  CHECK(ratio >= 1.3);
  CHECK(ratio <= 3.5);
}

TEST_CASE("positivity clamp raises negative nodes and reports its work") {
  SolveConfig cfg = base_config(BoundaryKind::C1, 64, 1e-3, 100);
  cfg.coeffs = constant_drift_pair(-4.0, 0.0);
  cfg.initial.kind = "sine";
  cfg.initial.a = 0.5;
  cfg.clamp_negative = true;
  const Trajectory traj = simulate(cfg);
  CHECK(traj.clamp_activations > 0);
  double lowest = 0.0;
  for (const Field& y : traj.states)
    for (double v : y) lowest = std::min(lowest, v);
  CHECK(lowest >= 0.0);
}

TEST_CASE("picard iteration reproduces the stepping fixed point") {
  SolveConfig cfg = base_config(BoundaryKind::C2, 48, 1e-3, 100);
  cfg.coeffs = logistic_pair(1.0, 0.4);
  cfg.kappa = exponential_kernel(0.2);
  cfg.initial.kind = "constant";
  cfg.initial.a = 0.5;
  cfg.record_increments = true;
  const Trajectory traj = simulate(cfg);

  const StepContext ctx = make_step_context(cfg);
  const BoundaryPath path = path_for(cfg);
  const auto [fixed, report] =
      picard_solve(cfg, ctx, path, traj.increments, 0.0, 60, 1e-10);
  CHECK(report.converged);
  CHECK(report.iterations < 60);
  REQUIRE(report.sup_distances.size() >= 2);
  CHECK(report.sup_distances.back() < report.sup_distances.front());

  double worst = 0.0;
  for (std::size_t k = 0; k < traj.states.size(); ++k)
    worst = std::max(worst, sup_diff(fixed.states[k], traj.states[k]));
  CHECK(worst <= 1e-9);

  // A different starting trajectory lands on the same limit.
  const auto [fixed2, report2] =
      picard_solve(cfg, ctx, path, traj.increments, 1.0, 60, 1e-10);
  CHECK(report2.converged);
  double gap = 0.0;
  for (std::size_t k = 0; k < fixed.states.size(); ++k)
    gap = std::max(gap, sup_diff(fixed.states[k], fixed2.states[k]));
  CHECK(gap <= 1e-8);
}

TEST_CASE("direct evaluation validates its time arguments") {
  SolveConfig cfg = base_config(BoundaryKind::C1, 48, 1e-3, 10);
  cfg.initial.kind = "sine";
  cfg.initial.a = 1.0;
  const double bad[1] = {1e-9};
  CHECK_THROWS_AS(homogeneous_solution(cfg, std::span<const double>(bad, 1)), Error);
  const double zero[1] = {0.0};
  const std::vector<Field> at0 = homogeneous_solution(cfg, std::span<const double>(zero, 1));
  const Field y0 = cfg.initial.materialize(cfg.make_grid());
  CHECK(sup_diff(at0[0], y0) <= 1e-12);
}

TEST_CASE("runaway drift is detected instead of emitting junk") {
  SolveConfig cfg = base_config(BoundaryKind::C2, 48, 1e-3, 400);
  cfg.coeffs = linear_pair(1e4, 0.0);
  cfg.initial.kind = "constant";
  cfg.initial.a = 1.0;
  CHECK_THROWS_AS(simulate(cfg), Error);
}

TEST_CASE("slope-slope stepping conserves mass for compatible data") {
  SolveConfig cfg = base_config(BoundaryKind::C2, 96, 1e-3, 200);
  cfg.initial.kind = "cosine";
  cfg.initial.a = 1.0;
  const Trajectory traj = simulate(cfg);
  const Grid g = cfg.make_grid();
  for (std::size_t k = 0; k < traj.states.size(); k += 20)
    CHECK(std::abs(integrate(g, traj.states[k])) <= 1e-7);
  // And the profile itself decays at the exact rate.
  const double t_end = cfg.time.horizon();
  const double amp = std::exp(-kPi * kPi * t_end / 2.0);
  double worst = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    worst = std::max(worst,
                     std::abs(traj.states.back()[i] - amp * std::cos(kPi * g.nodes[i])));
  CHECK(worst <= 1e-6);
}

TEST_CASE("transition matrix rows of the step context are stochastic for slope ends") {
  SolveConfig cfg = base_config(BoundaryKind::C2, 64, 1e-3, 1);
  const StepContext ctx = make_step_context(cfg);
  const std::size_t n = ctx.grid.size();
  CHECK(ctx.dt == 1e-3);
  CHECK(ctx.band <= n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    double mass = 0.0;
    for (std::size_t j = 0; j < n; ++j) mass += ctx.B[i * n + j];
    CHECK(std::abs(mass - 1.0) <= 1e-12);
  }
}
