#include "shel/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "shel/errors.hpp"

namespace shel {

namespace {

// Maps a requested time to its step index; the time must sit on the grid.
std::size_t step_index_of(const TimeGrid& time, double t) {
  const double raw = (t - time.t0) / time.dt;
  const double rounded = std::round(raw);
  require(std::abs(raw - rounded) <= 1e-6 &&
              rounded >= 0.0 && rounded <= static_cast<double>(time.n_steps),
          "requested time does not lie on the time grid");
  return static_cast<std::size_t>(rounded);
}

// Maps a probe location to its node index; the location must sit on the grid.
std::size_t node_index_of(const Grid& grid, double x) {
  const double h = grid.spacing();
  const double raw = x / h;
  const double rounded = std::round(raw);
  require(std::abs(raw - rounded) <= 1e-6 * (1.0 + std::abs(raw)) &&
              rounded >= 0.0 && rounded < static_cast<double>(grid.size()),
          "requested location does not lie on the spatial grid");
  return static_cast<std::size_t>(rounded);
}

SolveConfig with_stream(const SolveConfig& cfg, std::uint64_t p) {
  SolveConfig c = cfg;
  c.seed.stream = p;
  return c;
}

BoundaryPath boundary_for(const SolveConfig& cfg) {
  return generate_boundary(cfg.boundary, cfg.time,
                           {cfg.seed.master, 2 * cfg.seed.stream + 1});
}

SeedSpec noise_seed_for(const SolveConfig& cfg) {
  return {cfg.seed.master, 2 * cfg.seed.stream};
}

}  // namespace

EnsembleStats ensemble_stats(const SolveConfig& cfg, std::size_t paths,
                             std::span<const double> snap_times) {
  require(paths >= 1, "ensemble_stats: need at least one path");
  require(!snap_times.empty(), "ensemble_stats: need at least one time");
  const StepContext ctx = make_step_context(cfg);
  const std::size_t n = ctx.grid.size();

  std::vector<std::size_t> steps;
  steps.reserve(snap_times.size());
  for (double t : snap_times) steps.push_back(step_index_of(cfg.time, t));

  EnsembleStats stats;
  stats.paths = paths;
  stats.times.assign(snap_times.begin(), snap_times.end());
  stats.grid = ctx.grid;
  stats.mean.assign(snap_times.size(), Field(n, 0.0));
  stats.variance.assign(snap_times.size(), Field(n, 0.0));
  std::vector<Field> m2(snap_times.size(), Field(n, 0.0));

  for (std::size_t p = 0; p < paths; ++p) {
    const SolveConfig pc = with_stream(cfg, p);
    const BoundaryPath path = boundary_for(pc);
    const double count = static_cast<double>(p + 1);
    run_path(pc, ctx, path, noise_seed_for(pc),
             [&](std::size_t k, double, const Field& y) {
               for (std::size_t s = 0; s < steps.size(); ++s) {
                 if (steps[s] != k) continue;
                 for (std::size_t j = 0; j < n; ++j) {
                   const double d = y[j] - stats.mean[s][j];
                   stats.mean[s][j] += d / count;
                   m2[s][j] += d * (y[j] - stats.mean[s][j]);
                 }
               }
             });
  }
  if (paths >= 2)
    for (std::size_t s = 0; s < steps.size(); ++s)
      for (std::size_t j = 0; j < n; ++j)
        stats.variance[s][j] = m2[s][j] / static_cast<double>(paths - 1);
  return stats;
}

MomentEstimate jackknife_mean(std::span<const double> values) {
  const std::size_t n = values.size();
  require(n >= 2, "jackknife_mean: need at least two values");
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(n);
  // Delete-one means theta_i = (sum - x_i) / (n - 1); the jackknife variance
  // is (n - 1)/n * sum (theta_i - mean(theta))^2.
  double ss = 0.0;
  for (double v : values) {
    const double theta = (sum - v) / static_cast<double>(n - 1);
    const double d = theta - mean;  // mean(theta) equals the sample mean
    ss += d * d;
  }
  MomentEstimate est;
  est.value = mean;
  est.se = std::sqrt(ss * static_cast<double>(n - 1) / static_cast<double>(n));
  return est;
}

std::vector<MomentEstimate> aggregate_moments(
    const std::vector<std::vector<double>>& per_path) {
  require(per_path.size() >= 2, "aggregate_moments: need at least two paths");
  const std::size_t n_lags = per_path.front().size();
  for (const auto& row : per_path)
    require(row.size() == n_lags, "aggregate_moments: ragged per-path table");
  std::vector<MomentEstimate> out(n_lags);
  std::vector<double> column(per_path.size());
  for (std::size_t l = 0; l < n_lags; ++l) {
    for (std::size_t m = 0; m < per_path.size(); ++m) column[m] = per_path[m][l];
    out[l] = jackknife_mean(column);
  }
  return out;
}

IncrementMoments spatial_increment_moments(
    const SolveConfig& cfg, std::size_t paths, int p,
    std::span<const double> snap_times, double x_lo, double x_hi,
    std::span<const std::size_t> lag_nodes) {
  require(paths >= 100, "spatial_increment_moments: need at least 100 paths");
  require(p >= 1, "spatial_increment_moments: moment order p must be >= 1");
  require(!lag_nodes.empty(), "spatial_increment_moments: need at least one lag");
  require(x_lo >= 0.0 && x_hi > x_lo && x_hi <= 1.0,
          "spatial_increment_moments: bad base window");

  const StepContext ctx = make_step_context(cfg);
  const Grid& grid = ctx.grid;
  const std::size_t n = grid.size();
  const double h = grid.spacing();

  std::vector<std::size_t> steps;
  for (double t : snap_times) steps.push_back(step_index_of(cfg.time, t));
  require(!steps.empty(), "spatial_increment_moments: need snapshot times");

  std::size_t i_lo = static_cast<std::size_t>(std::ceil(x_lo / h - 1e-9));
  std::size_t i_hi = static_cast<std::size_t>(std::floor(x_hi / h + 1e-9));
  i_hi = std::min(i_hi, n - 1);
  require(i_hi > i_lo, "spatial_increment_moments: base window holds no nodes");
  const std::size_t max_lag = *std::max_element(lag_nodes.begin(), lag_nodes.end());
  require(max_lag >= 1 && i_hi + max_lag <= n - 1,
          "spatial_increment_moments: largest lag leaves the grid");

  IncrementMoments result;
  result.variable = "space";
  result.p = p;
  for (std::size_t l : lag_nodes)
    result.lags.push_back(static_cast<double>(l) * h);
  result.per_path.assign(paths, std::vector<double>(lag_nodes.size(), 0.0));

  const double order = 2.0 * p;
  const double n_base = static_cast<double>(i_hi - i_lo + 1);
  const double denom = n_base * static_cast<double>(steps.size());

  for (std::size_t m = 0; m < paths; ++m) {
    const SolveConfig pc = with_stream(cfg, m);
    const BoundaryPath path = boundary_for(pc);
    auto& row = result.per_path[m];
    run_path(pc, ctx, path, noise_seed_for(pc),
             [&](std::size_t k, double, const Field& y) {
               if (std::find(steps.begin(), steps.end(), k) == steps.end())
                 return;
               for (std::size_t l = 0; l < lag_nodes.size(); ++l) {
                 const std::size_t lag = lag_nodes[l];
                 double acc = 0.0;
                 for (std::size_t i = i_lo; i <= i_hi; ++i)
                   acc += std::pow(std::abs(y[i + lag] - y[i]), order);
                 row[l] += acc / denom;
               }
             });
  }
  result.moments = aggregate_moments(result.per_path);
  return result;
}

IncrementMoments temporal_increment_moments(
    const SolveConfig& cfg, std::size_t paths, int p,
    std::span<const double> base_times, std::span<const double> probe_xs,
    std::span<const std::size_t> lag_steps) {
  require(paths >= 100, "temporal_increment_moments: need at least 100 paths");
  require(p >= 1, "temporal_increment_moments: moment order p must be >= 1");
  require(!lag_steps.empty() && !base_times.empty() && !probe_xs.empty(),
          "temporal_increment_moments: need lags, base times and probes");

  const StepContext ctx = make_step_context(cfg);
  const Grid& grid = ctx.grid;

  std::vector<std::size_t> bases;
  for (double t : base_times) bases.push_back(step_index_of(cfg.time, t));
  std::vector<std::size_t> probes;
  for (double x : probe_xs) probes.push_back(node_index_of(grid, x));

  std::vector<std::size_t> needed = bases;
  for (std::size_t b : bases)
    for (std::size_t l : lag_steps) {
      require(b + l <= cfg.time.n_steps,
              "temporal_increment_moments: lag leaves the time grid");
      needed.push_back(b + l);
    }
  std::sort(needed.begin(), needed.end());
  needed.erase(std::unique(needed.begin(), needed.end()), needed.end());
  auto slot_of = [&](std::size_t k) {
    return static_cast<std::size_t>(
        std::lower_bound(needed.begin(), needed.end(), k) - needed.begin());
  };

  IncrementMoments result;
  result.variable = "time";
  result.p = p;
  for (std::size_t l : lag_steps)
    result.lags.push_back(static_cast<double>(l) * cfg.time.dt);
  result.per_path.assign(paths, std::vector<double>(lag_steps.size(), 0.0));

  const double order = 2.0 * p;
  const double denom =
      static_cast<double>(bases.size()) * static_cast<double>(probes.size());
  std::vector<std::vector<double>> snap(needed.size(),
                                        std::vector<double>(probes.size()));

  for (std::size_t m = 0; m < paths; ++m) {
    const SolveConfig pc = with_stream(cfg, m);
    const BoundaryPath path = boundary_for(pc);
    run_path(pc, ctx, path, noise_seed_for(pc),
             [&](std::size_t k, double, const Field& y) {
               const auto it =
                   std::lower_bound(needed.begin(), needed.end(), k);
               if (it == needed.end() || *it != k) return;
               auto& row = snap[static_cast<std::size_t>(it - needed.begin())];
               for (std::size_t q = 0; q < probes.size(); ++q)
                 row[q] = y[probes[q]];
             });
    auto& row = result.per_path[m];
    for (std::size_t l = 0; l < lag_steps.size(); ++l) {
      double acc = 0.0;
      for (std::size_t b : bases) {
        const auto& at_base = snap[slot_of(b)];
        const auto& at_lag = snap[slot_of(b + lag_steps[l])];
        for (std::size_t q = 0; q < probes.size(); ++q)
          acc += std::pow(std::abs(at_lag[q] - at_base[q]), order);
      }
      row[l] += acc / denom;
    }
  }
  result.moments = aggregate_moments(result.per_path);
  return result;
}

HolderFit holder_fit(std::span<const double> lags,
                     std::span<const MomentEstimate> moments, int p,
                     const std::string& variable) {
  const std::size_t n = lags.size();
  require(n == moments.size(), "holder_fit: lag / moment size mismatch");
  require(n >= 5, "holder_fit: need at least 5 usable lags");
  const auto [lo_it, hi_it] = std::minmax_element(lags.begin(), lags.end());
  require(*lo_it > 0.0, "holder_fit: lags must be positive");
  require(*hi_it >= 10.0 * *lo_it * (1.0 - 1e-9),
          "holder_fit: lags must span at least one decade");
  for (const MomentEstimate& m : moments)
    require(m.value > 0.0, "holder_fit: moments must be strictly positive");

  bool have_se = true;
  for (const MomentEstimate& m : moments) have_se = have_se && m.se > 0.0;

  // Weighted least squares of ln(moment) on ln(lag); delta-method log
  // standard errors se/value supply the weights when available.
  double sw = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::vector<double> xs(n), ys(n), ws(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = std::log(lags[i]);
    ys[i] = std::log(moments[i].value);
    ws[i] = have_se ? 1.0 / ((moments[i].se / moments[i].value) *
                             (moments[i].se / moments[i].value))
                    : 1.0;
    sw += ws[i];
    sx += ws[i] * xs[i];
    sy += ws[i] * ys[i];
    sxx += ws[i] * xs[i] * xs[i];
    sxy += ws[i] * xs[i] * ys[i];
  }
  const double delta = sw * sxx - sx * sx;
  require(delta > 0.0, "holder_fit: degenerate lag configuration");
  const double slope = (sw * sxy - sx * sy) / delta;
  const double intercept = (sy - slope * sx) / sw;

  // Residual scatter, used directly for unweighted fits and as an inflation
  // factor when the nominal weights understate the spread.
  double chi2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ys[i] - intercept - slope * xs[i];
    chi2 += ws[i] * r * r;
  }
  const double dof = static_cast<double>(n - 2);
  double var_slope = sw / delta;
  if (have_se) {
    var_slope *= std::max(1.0, chi2 / dof);
  } else {
    var_slope *= chi2 / dof;
  }

  HolderFit fit;
  fit.variable = variable;
  fit.p = p;
  fit.slope = slope;
  fit.implied_exponent = slope / (2.0 * p);
  fit.ci_halfwidth = 2.0 * std::sqrt(std::max(var_slope, 0.0)) / (2.0 * p);
  fit.lag_lo = *lo_it;
  fit.lag_hi = *hi_it;
  fit.n_lags = n;
  return fit;
}

HolderFit holder_fit(const IncrementMoments& moments) {
  return holder_fit(moments.lags, moments.moments, moments.p,
                    moments.variable);
}

namespace {

bool boundary_specs_equal(const BoundaryGenSpec& a, const BoundaryGenSpec& b) {
  return a.kind == b.kind && a.c0 == b.c0 && a.c1 == b.c1 && a.amp0 == b.amp0 &&
         a.omega0 == b.omega0 && a.phase0 == b.phase0 && a.amp1 == b.amp1 &&
         a.omega1 == b.omega1 && a.phase1 == b.phase1 && a.sigma0 == b.sigma0 &&
         a.sigma1 == b.sigma1 && a.hurst == b.hurst;
}

void check_comparison_preconditions(const SolveConfig& lower,
                                    const SolveConfig& upper,
                                    const Grid& grid) {
  auto hypo = [](const std::string& msg) { throw HypothesisError(msg); };
  if (lower.seed.master != upper.seed.master)
    hypo("comparison coupling requires a shared master seed");
  // G_lower <= G_upper and identical H, sampled over [-50, 50].
  for (int i = 0; i <= 2000; ++i) {
    const double y = -50.0 + 0.05 * i;
    const double g_lo = lower.coeffs.G(y);
    const double g_hi = upper.coeffs.G(y);
    if (g_lo > g_hi + 1e-12 * (1.0 + std::abs(g_hi)))
      hypo("G_lower <= G_upper violated at y = " + std::to_string(y));
    const double h_lo = lower.coeffs.H(y);
    const double h_hi = upper.coeffs.H(y);
    if (std::abs(h_lo - h_hi) > 1e-12 * (1.0 + std::abs(h_lo)))
      hypo("comparison requires identical H coefficients");
  }
  if (lower.coeffs.h_is_zero != upper.coeffs.h_is_zero)
    hypo("comparison requires identical H coefficients");
  // Ordered initial states on the shared grid.
  const Field y_lo = lower.initial.materialize(grid);
  const Field y_hi = upper.initial.materialize(grid);
  for (std::size_t j = 0; j < grid.size(); ++j)
    if (y_lo[j] > y_hi[j] + 1e-12 * (1.0 + std::abs(y_hi[j])))
      hypo("initial states are not ordered at x = " +
           std::to_string(grid.nodes[j]));
  // Identical dispersion covariance, sampled on a coarse lattice.
  for (int i = 0; i <= 16; ++i)
    for (int j = 0; j <= 16; ++j) {
      const double x = i / 16.0, y = j / 16.0;
      const double ka = lower.kappa(x, y);
      const double kb = upper.kappa(x, y);
      if (std::abs(ka - kb) > 1e-12 * (1.0 + std::abs(ka)))
        hypo("comparison requires identical noise covariances");
    }
  if (!boundary_specs_equal(lower.boundary, upper.boundary))
    hypo("comparison requires identical boundary data");
}

}  // namespace

ComparisonReport comparison_test(const SolveConfig& lower,
                                 const SolveConfig& upper, std::size_t paths,
                                 double eps, bool check_preconditions) {
  require(paths >= 1, "comparison_test: need at least one path");
  require(lower.kind == upper.kind &&
              lower.grid_n == upper.grid_n &&
              lower.time.t0 == upper.time.t0 &&
              lower.time.dt == upper.time.dt &&
              lower.time.n_steps == upper.time.n_steps,
          "comparison_test: discretisations differ");
  require(lower.clamp_negative == upper.clamp_negative,
          "comparison_test: clamp settings differ");

  const StepContext ctx = make_step_context(lower);
  if (check_preconditions)
    check_comparison_preconditions(lower, upper, ctx.grid);

  const std::size_t n = ctx.grid.size();
  const std::size_t m = lower.time.n_steps + 1;

  ComparisonReport report;
  report.paths = paths;
  report.eps = eps;
  report.per_path_worst.assign(paths, -std::numeric_limits<double>::infinity());

  std::vector<Field> lo_states(m, Field(n, 0.0));
  for (std::size_t p = 0; p < paths; ++p) {
    // Couple through the lower config's master seed: same noise stream and
    // the same boundary realisation for both runs.
    SolveConfig clo = with_stream(lower, p);
    SolveConfig chi = with_stream(upper, p);
    chi.seed.master = clo.seed.master;
    const BoundaryPath path = boundary_for(clo);
    run_path(clo, ctx, path, noise_seed_for(clo),
             [&](std::size_t k, double, const Field& y) { lo_states[k] = y; });
    double worst = -std::numeric_limits<double>::infinity();
    run_path(chi, ctx, path, noise_seed_for(clo),
             [&](std::size_t k, double, const Field& y) {
               const Field& lo = lo_states[k];
               for (std::size_t j = 0; j < n; ++j) {
                 const double gap = lo[j] - y[j];
                 worst = std::max(worst, gap);
                 ++report.samples;
                 if (gap > eps) ++report.violations;
               }
             });
    report.per_path_worst[p] = worst;
    report.worst_gap = std::max(report.worst_gap, worst);
  }
  report.violation_fraction =
      static_cast<double>(report.violations) /
      static_cast<double>(std::max<std::size_t>(report.samples, 1));
  return report;
}

PositivityReport positivity_test(const SolveConfig& cfg, std::size_t paths,
                                 std::span<const double> ladder) {
  require(paths >= 1, "positivity_test: need at least one path");
  require(!cfg.clamp_negative,
          "positivity_test: clamping must be off to measure excursions");
  if (!cfg.coeffs.zero_at_zero)
    throw HypothesisError(
        "positivity requires G(0) = 0 and H(0) = 0 (zero preserved at zero)");
  if (cfg.boundary.kind != BoundaryGen::constant || cfg.boundary.c0 != 0.0 ||
      cfg.boundary.c1 != 0.0)
    throw HypothesisError("positivity requires boundary data mu identically 0");
  {
    const Grid grid = cfg.make_grid();
    const Field y0 = cfg.initial.materialize(grid);
    for (double v : y0)
      if (v < 0.0)
        throw HypothesisError("positivity requires a nonnegative initial state");
  }

  static const double default_ladder[] = {1.0, 3.0, 10.0, 30.0};
  std::vector<double> lad(ladder.begin(), ladder.end());
  if (lad.empty()) lad.assign(std::begin(default_ladder), std::end(default_ladder));

  const StepContext ctx = make_step_context(cfg);
  const double root_dt = std::sqrt(cfg.time.dt);

  PositivityReport report;
  report.paths = paths;
  report.dt = cfg.time.dt;
  report.thresholds = lad;
  report.fractions.assign(lad.size(), 0.0);

  std::vector<std::size_t> counts(lad.size(), 0);
  std::vector<double> excursions;
  for (std::size_t p = 0; p < paths; ++p) {
    const SolveConfig pc = with_stream(cfg, p);
    const BoundaryPath path = boundary_for(pc);
    run_path(pc, ctx, path, noise_seed_for(pc),
             [&](std::size_t, double, const Field& y) {
               for (double v : y) {
                 ++report.samples;
                 if (v < 0.0) {
                   excursions.push_back(-v);
                   report.min_value = std::min(report.min_value, v);
                   for (std::size_t l = 0; l < lad.size(); ++l)
                     if (v < -lad[l] * root_dt) ++counts[l];
                 }
               }
             });
  }
  for (std::size_t l = 0; l < lad.size(); ++l)
    report.fractions[l] = static_cast<double>(counts[l]) /
                          static_cast<double>(std::max<std::size_t>(report.samples, 1));
  report.negative_samples = excursions.size();
  if (!excursions.empty()) {
    const std::size_t idx = static_cast<std::size_t>(
        std::ceil(0.99 * static_cast<double>(excursions.size()))) - 1;
    std::nth_element(excursions.begin(),
                     excursions.begin() + static_cast<std::ptrdiff_t>(idx),
                     excursions.end());
    report.p99_excursion = excursions[idx] / root_dt;
  }
  return report;
}

namespace {

// Draws the noise record exactly the way run_path would: per step, a
// standard normal vector through the covariance factor, scaled by sqrt(dt).
std::vector<Field> draw_increments(const StepContext& ctx, const TimeGrid& time,
                                   SeedSpec seed) {
  NormalStream rng(seed);
  const std::size_t n = ctx.grid.size();
  const double root_dt = std::sqrt(time.dt);
  std::vector<Field> inc(time.n_steps, Field(n, 0.0));
  std::vector<double> z(n);
  for (std::size_t k = 0; k < time.n_steps; ++k) {
    rng.normals(z);
    ctx.cov.apply(z, inc[k]);
    for (double& v : inc[k]) v *= root_dt;
  }
  return inc;
}

double sup_trajectory_distance(const Trajectory& a, const Trajectory& b) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.states.size(); ++k)
    for (std::size_t j = 0; j < a.states[k].size(); ++j)
      d = std::max(d, std::abs(a.states[k][j] - b.states[k][j]));
  return d;
}

}  // namespace

UniquenessReport uniqueness_coupling_test(const SolveConfig& cfg,
                                          std::size_t replays, double start_a,
                                          double start_b, double tol,
                                          bool run_negative_control) {
  require(replays >= 1, "uniqueness_coupling_test: need at least one replay");
  require(start_a != start_b,
          "uniqueness_coupling_test: the two starts must differ");
  const StepContext ctx = make_step_context(cfg);

  UniquenessReport report;
  report.replays = replays;
  report.tol = tol;
  report.all_converged = true;

  Trajectory first_limit, second_noise_limit;
  for (std::size_t r = 0; r < replays; ++r) {
    const SolveConfig rc = with_stream(cfg, r);
    const BoundaryPath path = boundary_for(rc);
    const auto inc = draw_increments(ctx, cfg.time, noise_seed_for(rc));
    auto [lim_a, rep_a] = picard_solve(rc, ctx, path, inc, start_a, 60, tol);
    auto [lim_b, rep_b] = picard_solve(rc, ctx, path, inc, start_b, 60, tol);
    report.all_converged =
        report.all_converged && rep_a.converged && rep_b.converged;
    report.max_iterations =
        std::max({report.max_iterations, rep_a.iterations, rep_b.iterations});
    const double d = sup_trajectory_distance(lim_a, lim_b);
    report.distances.push_back(d);
    report.max_distance = std::max(report.max_distance, d);
    if (r == 0) first_limit = std::move(lim_a);
  }

  if (run_negative_control && replays >= 1) {
    // Same problem, same start, a different noise record: the limits should
    // be macroscopically apart, confirming the coupling above is what forces
    // agreement rather than the iteration washing the noise out.
    const SolveConfig rc = with_stream(cfg, 0);
    const BoundaryPath path = boundary_for(rc);
    const SolveConfig other = with_stream(cfg, replays);
    const auto inc = draw_increments(ctx, cfg.time, noise_seed_for(other));
    auto [lim, rep] = picard_solve(rc, ctx, path, inc, start_a, 60, tol);
    second_noise_limit = std::move(lim);
    report.negative_control_distance =
        sup_trajectory_distance(first_limit, second_noise_limit);
  }
  return report;
}

}  // namespace shel
