#include "shel/solver.hpp"

#include <cmath>
#include <numbers>

#include "shel/errors.hpp"

namespace shel {

Field InitialSpec::materialize(const Grid& grid) const {
  const std::size_t n = grid.size();
  Field y(n, 0.0);
  if (kind == "zero") {
    return y;
  } else if (kind == "constant") {
    for (std::size_t j = 0; j < n; ++j) y[j] = a;
  } else if (kind == "linear") {
    for (std::size_t j = 0; j < n; ++j) y[j] = a + b * grid.nodes[j];
  } else if (kind == "sine") {
    for (std::size_t j = 0; j < n; ++j)
      y[j] = a * std::sin(mode * std::numbers::pi * grid.nodes[j]);
  } else if (kind == "cosine") {
    for (std::size_t j = 0; j < n; ++j)
      y[j] = a * std::cos(mode * std::numbers::pi * grid.nodes[j]);
  } else if (kind == "custom") {
    require(custom.size() == n,
            "InitialSpec: custom state size does not match grid");
    y = custom;
  } else {
    fail("InitialSpec: unknown kind '" + kind + "'");
  }
  return y;
}

namespace {

// Second-order one-sided slopes.
double fd_slope_left(const Field& f, double h) {
  return (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
}
double fd_slope_right(const Field& f, double h) {
  const std::size_t n = f.size();
  return (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
}

// Endpoint imposition after an update: pin values at value ends, match the
// slope data by second-order one-sided extrapolation at slope ends.
void impose_endpoints(BoundaryKind kind, Field& y, double h, double mu0,
                      double mu1) {
  const std::size_t n = y.size();
  if (value_at_left(kind)) {
    y[0] = mu0;
  } else {
    y[0] = (4.0 * y[1] - y[2] - 2.0 * h * mu0) / 3.0;
  }
  if (value_at_right(kind)) {
    y[n - 1] = mu1;
  } else {
    y[n - 1] = (4.0 * y[n - 2] - y[n - 3] + 2.0 * h * mu1) / 3.0;
  }
}

// Gauss-Legendre on [-1, 1] (duplicated from the boundary module on
// purpose: this rule is baked into precomputed step weights, the other
// into an adaptive quadrature; neither is public API).
void gauss_legendre8(std::vector<double>& nodes, std::vector<double>& weights) {
  const int n = 8;
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[static_cast<std::size_t>(i)] = -x;
    nodes[static_cast<std::size_t>(n - 1 - i)] = x;
    weights[static_cast<std::size_t>(i)] =
        weights[static_cast<std::size_t>(n - 1 - i)] =
            2.0 / ((1.0 - x * x) * dp * dp);
  }
}

// mu-multipliers of the boundary functional for test function p_u(x_i, .).
void f_multipliers(BoundaryKind kind, const KernelEndpoints& e, double& m0,
                   double& m1) {
  switch (kind) {
    case BoundaryKind::C1: m0 = e.deriv0; m1 = -e.deriv1; return;
    case BoundaryKind::C2: m0 = -e.value0; m1 = e.value1; return;
    case BoundaryKind::C3: m0 = e.deriv0; m1 = e.value1; return;
    case BoundaryKind::C4: m0 = -e.value0; m1 = -e.deriv1; return;
  }
}

}  // namespace

BoundaryStepRule make_boundary_step_rule(BoundaryKind kind, const Grid& grid,
                                         double dt) {
  require(dt > 0.0, "make_boundary_step_rule: dt must be positive");
  const std::size_t n = grid.size();
  std::vector<double> gl_nodes, gl_weights;
  gauss_legendre8(gl_nodes, gl_weights);

  BoundaryStepRule rule;
  // Geometric octaves of (0, dt] plus a closing panel over the final
  // sliver; 12 octaves put the sliver at dt * 2^-12, far below the u ~ x^2
  // scale at which the first interior node still sees boundary mass.
  constexpr int kLevels = 12;
  std::vector<std::pair<double, double>> panels;
  for (int j = 0; j < kLevels; ++j) {
    const double hi = dt * std::ldexp(1.0, -j);
    panels.emplace_back(0.5 * hi, hi);
  }
  panels.emplace_back(0.0, dt * std::ldexp(1.0, -kLevels));

  for (const auto& [lo, hi] : panels) {
    const double mid = 0.5 * (hi + lo);
    const double half = 0.5 * (hi - lo);
    for (std::size_t q = 0; q < gl_nodes.size(); ++q) {
      const double u = mid + half * gl_nodes[q];
      const double gw = 0.5 * half * gl_weights[q];  // includes the mild 1/2
      // Weights decay like exp(-x^2 / 2u): beyond 14 sqrt(u) they are
      // below 1e-42 relatively and the nodes can be dropped.
      const double cutoff = 14.0 * std::sqrt(u) + grid.spacing();
      BoundaryStepRule::UNode un;
      un.u = u;
      std::size_t n0 = 0;
      while (n0 < n && grid.nodes[n0] <= cutoff) ++n0;
      std::size_t n1 = 0;
      while (n1 < n && grid.nodes[n - 1 - n1] >= 1.0 - cutoff) ++n1;
      un.w0.resize(n0);
      un.w1.resize(n1);
      bool any = false;
      for (std::size_t i = 0; i < n0; ++i) {
        const KernelEndpoints e = kernel_endpoints(kind, u, grid.nodes[i]);
        double m0 = 0.0, m1 = 0.0;
        f_multipliers(kind, e, m0, m1);
        un.w0[i] = gw * m0;
        any = any || un.w0[i] != 0.0;
      }
      for (std::size_t r = 0; r < n1; ++r) {
        const std::size_t i = n - n1 + r;
        const KernelEndpoints e = kernel_endpoints(kind, u, grid.nodes[i]);
        double m0 = 0.0, m1 = 0.0;
        f_multipliers(kind, e, m0, m1);
        un.w1[r] = gw * m1;
        any = any || un.w1[r] != 0.0;
      }
      if (any) rule.unodes.push_back(std::move(un));
    }
  }
  return rule;
}

void BoundaryStepRule::add_to(Field& y, double t_next,
                              const BoundaryPath& path) const {
  const std::size_t n = y.size();
  for (const UNode& un : unodes) {
    const double m0 = path.mu0_at(t_next - un.u);
    const double m1 = path.mu1_at(t_next - un.u);
    if (m0 != 0.0)
      for (std::size_t i = 0; i < un.w0.size(); ++i) y[i] += un.w0[i] * m0;
    if (m1 != 0.0) {
      const std::size_t base = n - un.w1.size();
      for (std::size_t r = 0; r < un.w1.size(); ++r)
        y[base + r] += un.w1[r] * m1;
    }
  }
}

StepContext make_step_context(const SolveConfig& cfg) {
  require(cfg.time.dt > 0.0, "make_step_context: dt must be positive");
  require(cfg.time.n_steps >= 1, "make_step_context: need at least one step");
  StepContext ctx;
  ctx.grid = cfg.make_grid();
  ctx.dt = cfg.time.dt;
  // The trapezoid-discretized one-step kernel stops being a contraction
  // once the grid is much coarser than the kernel width sqrt(dt); its top
  // eigenvalue then exceeds 1 and long runs amplify exponentially.
  require(ctx.grid.spacing() <= 1.25 * std::sqrt(ctx.dt) + 1e-15,
          "make_step_context: dt is too small for this grid "
          "(need spacing <= 1.25*sqrt(dt)); refine the grid or enlarge dt");
  ctx.table = build_kernel_table(cfg.kind, ctx.grid, ctx.dt);
  const std::size_t n = ctx.grid.size();
  ctx.B.resize(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      ctx.B[i * n + j] = ctx.grid.weights[j] * ctx.table.at(i, j);
  // Entries beyond 12 sqrt(dt) are below exp(-72) of the peak; skipping
  // them in the apply loops is far below every tolerance in use.
  const double width = 12.0 * std::sqrt(ctx.dt);
  ctx.band = std::min<std::size_t>(
      n - 1, static_cast<std::size_t>(width / ctx.grid.spacing()) + 2);
  ctx.lift0.resize(n);
  ctx.lift1.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    ctx.lift0[i] = lift_basis(cfg.kind, 0, ctx.grid.nodes[i]);
    ctx.lift1[i] = lift_basis(cfg.kind, 1, ctx.grid.nodes[i]);
  }
  ctx.boundary_rule = make_boundary_step_rule(cfg.kind, ctx.grid, ctx.dt);
  ctx.cov = build_cov_factor(cfg.kappa, ctx.grid);
  return ctx;
}

namespace {

struct StepWork {
  Field gf, a, det, dw, ns, ynext;
  std::vector<double> z;
};

// Banded B-apply: out[i] = sum_j B[i, j] src[j] over |i - j| <= band.
void apply_banded(const std::vector<double>& B, std::size_t n, std::size_t band,
                  const Field& src, Field& out) {
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i > band ? i - band : 0;
    const std::size_t hi = std::min(n - 1, i + band);
    const double* row = B.data() + i * n;
    double acc = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) acc += row[j] * src[j];
    out[i] = acc;
  }
}

// Transports the drift-augmented field a = y + dt G(y) through the kernel
// with its boundary part lifted: raw trapezoid quadrature of a field with
// nonzero boundary data carries an O(h^2) endpoint bias that accumulates
// over 1/dt steps; transporting a - c0 l0 - c1 l1 (homogeneous data) and
// adding back the closed-form actions (P_dt l) removes it.
void transport_lifted(const StepContext& ctx, const Field& a, double c0,
                      double c1, Field& scratch, Field& out) {
  const std::size_t n = ctx.grid.size();
  for (std::size_t j = 0; j < n; ++j)
    scratch[j] = a[j] - c0 * ctx.lift0[j] - c1 * ctx.lift1[j];
  apply_banded(ctx.B, n, ctx.band, scratch, out);
  for (std::size_t i = 0; i < n; ++i)
    out[i] += c0 * ctx.table.lift0_action[i] + c1 * ctx.table.lift1_action[i];
}

}  // namespace

std::size_t run_path(
    const SolveConfig& cfg, const StepContext& ctx, const BoundaryPath& path,
    SeedSpec noise_seed,
    const std::function<void(std::size_t, double, const Field&)>& observe,
    std::vector<Field>* increments_out,
    const std::vector<Field>* increments_in) {
  const Grid& grid = ctx.grid;
  const std::size_t n = grid.size();
  const double h = grid.spacing();
  const double dt = ctx.dt;

  if (increments_in)
    require(increments_in->size() == cfg.time.n_steps,
            "run_path: need one replayed increment vector per step");

  Field y = cfg.initial.materialize(grid);

  NormalStream rng(noise_seed);
  std::size_t clamp_count = 0;
  StepWork w;
  w.gf.assign(n, 0.0);
  w.a.assign(n, 0.0);
  w.det.assign(n, 0.0);
  w.dw.assign(n, 0.0);
  w.ns.assign(n, 0.0);
  w.ynext.assign(n, 0.0);
  w.z.assign(n, 0.0);

  if (increments_out) {
    increments_out->clear();
    increments_out->reserve(cfg.time.n_steps);
  }
  observe(0, cfg.time.node(0), y);

  const bool has_g = !cfg.coeffs.g_is_zero;
  const bool has_h = !cfg.coeffs.h_is_zero;
  const double root_dt = std::sqrt(dt);

  for (std::size_t k = 0; k < cfg.time.n_steps; ++k) {
    const double t = cfg.time.node(k);
    const double t1 = cfg.time.node(k + 1);

    if (has_g) {
      for (std::size_t j = 0; j < n; ++j) w.gf[j] = cfg.coeffs.G(y[j]);
      for (std::size_t j = 0; j < n; ++j) w.a[j] = y[j] + dt * w.gf[j];
    } else {
      w.a = y;
    }
    // Boundary data of the transported field: read values off the field at
    // value ends; take mu (plus the drift field's one-sided slope) at slope
    // ends — the state's own finite-difference slope would be noise-rough.
    double c0, c1;
    if (value_at_left(cfg.kind)) {
      c0 = w.a[0];
    } else {
      c0 = path.mu0_at(t);
      if (has_g) c0 += dt * fd_slope_left(w.gf, h);
    }
    if (value_at_right(cfg.kind)) {
      c1 = w.a[n - 1];
    } else {
      c1 = path.mu1_at(t);
      if (has_g) c1 += dt * fd_slope_right(w.gf, h);
    }

    transport_lifted(ctx, w.a, c0, c1, w.z, w.det);

    if (has_h) {
      if (increments_in) {
        w.dw = (*increments_in)[k];
      } else {
        rng.normals(w.z);
        ctx.cov.apply(w.z, w.dw);
        for (std::size_t j = 0; j < n; ++j) w.dw[j] *= root_dt;
      }
      for (std::size_t j = 0; j < n; ++j)
        w.ns[j] = cfg.coeffs.H(y[j]) * w.dw[j];
      apply_banded(ctx.B, n, ctx.band, w.ns, w.ynext);
      for (std::size_t j = 0; j < n; ++j) w.ynext[j] += w.det[j];
    } else {
      std::fill(w.dw.begin(), w.dw.end(), 0.0);
      w.ynext = w.det;
    }

    ctx.boundary_rule.add_to(w.ynext, t1, path);

    if (cfg.clamp_negative)
      for (double& v : w.ynext)
        if (v < 0.0) {
          v = 0.0;
          ++clamp_count;
        }

    impose_endpoints(cfg.kind, w.ynext, h, path.mu0_at(t1), path.mu1_at(t1));

    for (double v : w.ynext)
      if (!std::isfinite(v))
        fail("run_path: state became non-finite at step " + std::to_string(k + 1));

    y.swap(w.ynext);
    if (increments_out) increments_out->push_back(w.dw);
    observe(k + 1, t1, y);
  }
  return clamp_count;
}

Trajectory simulate(const SolveConfig& cfg) {
  const StepContext ctx = make_step_context(cfg);
  return simulate(cfg, ctx);
}

Trajectory simulate(const SolveConfig& cfg, const StepContext& ctx) {
  Trajectory traj;
  traj.time = cfg.time;
  traj.states.reserve(cfg.time.n_steps + 1);
  const BoundaryPath path = generate_boundary(
      cfg.boundary, cfg.time, {cfg.seed.master, 2 * cfg.seed.stream + 1});
  traj.clamp_activations = run_path(
      cfg, ctx, path, {cfg.seed.master, 2 * cfg.seed.stream},
      [&](std::size_t, double, const Field& y) { traj.states.push_back(y); },
      cfg.record_increments ? &traj.increments : nullptr);
  return traj;
}

std::vector<Field> homogeneous_solution(const SolveConfig& cfg,
                                        std::span<const double> times) {
  const Grid grid = cfg.make_grid();
  const std::size_t n = grid.size();
  const double h = grid.spacing();
  const BoundaryPath path = generate_boundary(
      cfg.boundary, cfg.time, {cfg.seed.master, 2 * cfg.seed.stream + 1});
  const Field y0 = cfg.initial.materialize(grid);

  std::vector<Field> out;
  out.reserve(times.size());
  for (double t : times) {
    require(t >= cfg.time.t0 && t <= cfg.time.horizon() + 1e-12,
            "homogeneous_solution: time outside the configured grid");
    const double el = t - cfg.time.t0;
    if (el == 0.0) {
      out.push_back(y0);
      continue;
    }
    const KernelTable table = build_kernel_table(cfg.kind, grid, el);
    // Lift data of the initial state (values off the field, slopes by
    // one-sided differences — Y0 is smooth by hypothesis).
    const double c0 = value_at_left(cfg.kind) ? y0.front() : fd_slope_left(y0, h);
    const double c1 =
        value_at_right(cfg.kind) ? y0.back() : fd_slope_right(y0, h);
    Field z(n), result(n);
    for (std::size_t j = 0; j < n; ++j)
      z[j] = y0[j] - c0 * lift_basis(cfg.kind, 0, grid.nodes[j]) -
             c1 * lift_basis(cfg.kind, 1, grid.nodes[j]);
    for (std::size_t i = 0; i < n; ++i) {
      const double* row = table.matrix.data() + i * n;
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += grid.weights[j] * row[j] * z[j];
      result[i] =
          acc + c0 * table.lift0_action[i] + c1 * table.lift1_action[i];
    }
    const Field bterm = boundary_integral_field(cfg.kind, el, grid, path);
    for (std::size_t i = 0; i < n; ++i) result[i] += bterm[i];
    impose_endpoints(cfg.kind, result, h, path.mu0_at(t), path.mu1_at(t));
    out.push_back(std::move(result));
  }
  return out;
}

std::pair<Trajectory, PicardReport> picard_solve(
    const SolveConfig& cfg, const StepContext& ctx, const BoundaryPath& path,
    const std::vector<Field>& increments, double start_value,
    std::size_t max_iter, double tol) {
  require(increments.size() == cfg.time.n_steps,
          "picard_solve: need one increment vector per step");
  require(!cfg.clamp_negative,
          "picard_solve: clamping is a stepping-only device and has no "
          "fixed-point counterpart");
  const Grid& grid = ctx.grid;
  const std::size_t n = grid.size();
  const double h = grid.spacing();
  const double dt = ctx.dt;
  const std::size_t m = cfg.time.n_steps + 1;

  // Forced part: the noiseless drift-free trajectory, stepped with the same
  // machinery so the fixed point matches the stepping solution exactly.
  std::vector<Field> forced(m);
  {
    Field y = cfg.initial.materialize(grid);
      forced[0] = y;
    Field scratch(n), det(n);
    for (std::size_t k = 0; k + 1 < m; ++k) {
      const double t = cfg.time.node(k);
      const double t1 = cfg.time.node(k + 1);
      const double c0 = value_at_left(cfg.kind) ? y[0] : path.mu0_at(t);
      const double c1 = value_at_right(cfg.kind) ? y[n - 1] : path.mu1_at(t);
      transport_lifted(ctx, y, c0, c1, scratch, det);
      ctx.boundary_rule.add_to(det, t1, path);
      impose_endpoints(cfg.kind, det, h, path.mu0_at(t1), path.mu1_at(t1));
      y = det;
      forced[k + 1] = y;
    }
  }

  // Remainder iterates carry homogeneous boundary data; their endpoint
  // imposition uses mu = 0 and their transport needs no value lift.
  std::vector<Field> bar(m, Field(n, start_value));
  std::vector<Field> next(m, Field(n, 0.0));
  Field total(n), gf(n), hf(n), scratch(n), det(n), noise(n);

  PicardReport report;
  report.tol = tol;
  double prev_dist = -1.0;
  std::size_t rising = 0;

  for (std::size_t it = 0; it < max_iter; ++it) {
    std::fill(next[0].begin(), next[0].end(), 0.0);
    for (std::size_t k = 0; k + 1 < m; ++k) {
      const double t1 = cfg.time.node(k + 1);
      for (std::size_t j = 0; j < n; ++j) total[j] = forced[k][j] + bar[k][j];
      const bool has_g = !cfg.coeffs.g_is_zero;
      const bool has_h = !cfg.coeffs.h_is_zero;
      for (std::size_t j = 0; j < n; ++j) {
        gf[j] = has_g ? cfg.coeffs.G(total[j]) : 0.0;
        hf[j] = has_h ? cfg.coeffs.H(total[j]) * increments[k][j] : 0.0;
      }
      for (std::size_t j = 0; j < n; ++j)
        scratch[j] = next[k][j] + dt * gf[j];
      double c0 = 0.0, c1 = 0.0;
      if (value_at_left(cfg.kind)) {
        c0 = scratch[0];
      } else if (has_g) {
        c0 = dt * fd_slope_left(gf, h);
      }
      if (value_at_right(cfg.kind)) {
        c1 = scratch[n - 1];
      } else if (has_g) {
        c1 = dt * fd_slope_right(gf, h);
      }
      transport_lifted(ctx, scratch, c0, c1, det, noise);
      if (has_h) {
        apply_banded(ctx.B, n, ctx.band, hf, det);
        for (std::size_t j = 0; j < n; ++j) noise[j] += det[j];
      }
      impose_endpoints(cfg.kind, noise, h, 0.0, 0.0);
      next[k + 1] = noise;
    }

    double dist = 0.0;
    for (std::size_t k = 0; k < m; ++k)
      for (std::size_t j = 0; j < n; ++j)
        dist = std::max(dist, std::abs(next[k][j] - bar[k][j]));
    double final_dist = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      final_dist =
          std::max(final_dist, std::abs(next[m - 1][j] - bar[m - 1][j]));
    report.sup_distances.push_back(dist);
    report.final_distances.push_back(final_dist);
    bar.swap(next);
    report.iterations = it + 1;

    if (dist <= tol) {
      report.converged = true;
      break;
    }
    if (prev_dist >= 0.0 && dist > prev_dist) {
      if (++rising >= 3)
        fail("picard_solve: iteration diverged (distances rising)");
    } else {
      rising = 0;
    }
    if (!std::isfinite(dist) || dist > 1e12)
      fail("picard_solve: iteration diverged");
    prev_dist = dist;
  }

  Trajectory traj;
  traj.time = cfg.time;
  traj.states.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    traj.states[k].resize(n);
    for (std::size_t j = 0; j < n; ++j)
      traj.states[k][j] = forced[k][j] + bar[k][j];
  }
  traj.increments = increments;
  return {std::move(traj), report};
}

}  // namespace shel
