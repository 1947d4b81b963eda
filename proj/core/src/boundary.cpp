#include "shel/boundary.hpp"

#include <cmath>
#include <numbers>

#include "shel/errors.hpp"
#include "shel/noise.hpp"

namespace shel {

namespace {

double interp_path(const TimeGrid& tg, const std::vector<double>& v, double t) {
  if (t <= tg.t0) return v.front();
  const double u = (t - tg.t0) / tg.dt;
  const auto k = static_cast<std::size_t>(u);
  if (k + 1 >= v.size()) return v.back();
  const double frac = u - static_cast<double>(k);
  return v[k] * (1.0 - frac) + v[k + 1] * frac;
}

}  // namespace

double BoundaryPath::mu0_at(double t) const { return interp_path(time, mu0, t); }
double BoundaryPath::mu1_at(double t) const { return interp_path(time, mu1, t); }

double BoundaryGenSpec::gamma0() const {
  switch (kind) {
    case BoundaryGen::constant:
    case BoundaryGen::sinusoid:
      return 0.49;  // Lipschitz paths, exponent capped below 1/2
    case BoundaryGen::brownian:
      return 0.49;
    case BoundaryGen::fbm:
      return std::max(0.01, hurst - 0.01);
  }
  return 0.49;
}

BoundaryGen boundary_gen_from_string(const std::string& name) {
  if (name == "constant") return BoundaryGen::constant;
  if (name == "sinusoid") return BoundaryGen::sinusoid;
  if (name == "brownian") return BoundaryGen::brownian;
  if (name == "fbm") return BoundaryGen::fbm;
  fail("unknown boundary generator '" + name + "'");
}

const char* to_string(BoundaryGen g) {
  switch (g) {
    case BoundaryGen::constant: return "constant";
    case BoundaryGen::sinusoid: return "sinusoid";
    case BoundaryGen::brownian: return "brownian";
    case BoundaryGen::fbm: return "fbm";
  }
  return "?";
}

BoundaryPath generate_boundary(const BoundaryGenSpec& spec, const TimeGrid& time,
                               SeedSpec seed) {
  BoundaryPath path;
  path.time = time;
  path.gamma0 = spec.gamma0();
  path.generator = to_string(spec.kind);
  const std::size_t m = time.n_steps + 1;
  path.mu0.resize(m);
  path.mu1.resize(m);

  switch (spec.kind) {
    case BoundaryGen::constant:
      for (std::size_t k = 0; k < m; ++k) {
        path.mu0[k] = spec.c0;
        path.mu1[k] = spec.c1;
      }
      break;
    case BoundaryGen::sinusoid:
      for (std::size_t k = 0; k < m; ++k) {
        const double t = time.node(k);
        path.mu0[k] = spec.c0 + spec.amp0 * std::sin(spec.omega0 * t + spec.phase0);
        path.mu1[k] = spec.c1 + spec.amp1 * std::sin(spec.omega1 * t + spec.phase1);
      }
      break;
    case BoundaryGen::brownian: {
      NormalStream rng(seed);
      const double root_dt = std::sqrt(time.dt);
      path.mu0[0] = spec.c0;
      for (std::size_t k = 1; k < m; ++k)
        path.mu0[k] = path.mu0[k - 1] + spec.sigma0 * root_dt * rng.normal();
      path.mu1[0] = spec.c1;
      for (std::size_t k = 1; k < m; ++k)
        path.mu1[k] = path.mu1[k - 1] + spec.sigma1 * root_dt * rng.normal();
      break;
    }
    case BoundaryGen::fbm: {
      require(spec.hurst > 0.0 && spec.hurst < 0.5,
              "generate_boundary: fbm index must lie in (0, 1/2)");
      require(time.n_steps >= 3 && time.n_steps <= 4096,
              "generate_boundary: fbm needs 3 <= n_steps <= 4096 (dense "
              "covariance factorization)");
      // Exact draw through the path covariance
      //   C(s, t) = (s^{2H} + t^{2H} - |t - s|^{2H}) / 2
      // on relative times mapped onto the unit interval; the t = t0 row is
      // identically zero, which the semidefinite factorization absorbs.
      const double span = time.horizon() - time.t0;
      const double twoH = 2.0 * spec.hurst;
      CovKernel cov{[span, twoH](double u, double v) {
                      const double a = u * span, b = v * span;
                      return 0.5 * (std::pow(a, twoH) + std::pow(b, twoH) -
                                    std::pow(std::abs(a - b), twoH));
                    },
                    std::pow(span, twoH), "fbm"};
      Grid tgrid = Grid::uniform(m);
      const CovFactor factor = build_cov_factor(cov, tgrid);
      NormalStream rng(seed);
      std::vector<double> z(m), corr(m);
      rng.normals(z);
      factor.apply(z, corr);
      for (std::size_t k = 0; k < m; ++k)
        path.mu0[k] = spec.c0 + spec.sigma0 * corr[k];
      rng.normals(z);
      factor.apply(z, corr);
      for (std::size_t k = 0; k < m; ++k)
        path.mu1[k] = spec.c1 + spec.sigma1 * corr[k];
      break;
    }
  }
  return path;
}

BoundaryWeights BoundaryWeights::from(const KernelTable& table) {
  BoundaryWeights w;
  w.kind = table.kind;
  w.value0 = table.value0;
  w.value1 = table.value1;
  w.deriv0 = table.deriv0;
  w.deriv1 = table.deriv1;
  return w;
}

double eval_F(const KernelEndpoints& e, BoundaryKind kind, double mu0,
              double mu1) {
  switch (kind) {
    case BoundaryKind::C1: return e.deriv0 * mu0 - e.deriv1 * mu1;
    case BoundaryKind::C2: return -e.value0 * mu0 + e.value1 * mu1;
    case BoundaryKind::C3: return e.deriv0 * mu0 + e.value1 * mu1;
    case BoundaryKind::C4: return -e.value0 * mu0 - e.deriv1 * mu1;
  }
  return 0.0;
}

double eval_F(const BoundaryWeights& w, std::size_t i, double mu0, double mu1) {
  KernelEndpoints e{w.value0[i], w.value1[i], w.deriv0[i], w.deriv1[i]};
  return eval_F(e, w.kind, mu0, mu1);
}

namespace {

// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on the
// Legendre recurrence; machine-precision for the small orders used here.
void gauss_legendre(int n, std::vector<double>& nodes,
                    std::vector<double>& weights) {
  nodes.assign(static_cast<std::size_t>(n), 0.0);
  weights.assign(static_cast<std::size_t>(n), 0.0);
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
    const std::size_t a = static_cast<std::size_t>(i);
    const std::size_t b = static_cast<std::size_t>(n - 1 - i);
    nodes[a] = -x;
    nodes[b] = x;
    weights[a] = weights[b] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
}

struct GL8 {
  std::vector<double> nodes, weights;
  GL8() { gauss_legendre(8, nodes, weights); }
};

// Integrates the boundary integrand over u in [lo, hi] (u = t - s),
// quadrating in v = sqrt(u).  At a slope endpoint the integrand carries a
// u^{-1/2} singularity as u -> 0; in the v variable it is smooth, so
// Gauss-Legendre panels converge exponentially all the way to the wall.
double panel_value(BoundaryKind kind, double t, double x,
                   const BoundaryPath& path, double lo, double hi) {
  static const GL8 gl;
  const double vlo = std::sqrt(lo);
  const double vhi = std::sqrt(hi);
  const double mid = 0.5 * (vhi + vlo);
  const double half = 0.5 * (vhi - vlo);
  double acc = 0.0;
  for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
    const double v = mid + half * gl.nodes[q];
    const double u = v * v;
    const KernelEndpoints e = kernel_endpoints(kind, u, x);
    const double s = t - u;
    acc += gl.weights[q] * 2.0 * v *
           eval_F(e, kind, path.mu0_at(s), path.mu1_at(s));
  }
  return 0.5 * half * acc;  // the outer 1/2 of the mild-solution term
}

}  // namespace

double boundary_integral(BoundaryKind kind, double t, double x,
                         const BoundaryPath& path, int min_levels,
                         int max_levels, double rel_tol) {
  require(t >= 0.0, "boundary_integral: t must be nonnegative");
  require(min_levels >= 2 && max_levels >= min_levels,
          "boundary_integral: bad level bounds");
  if (t == 0.0) return 0.0;

  double mu_sup = 0.0;
  for (double v : path.mu0) mu_sup = std::max(mu_sup, std::abs(v));
  for (double v : path.mu1) mu_sup = std::max(mu_sup, std::abs(v));
  const double floor = 1e-9 * (1.0 + mu_sup);

  // Geometric levels: level j covers u in [t 2^{-j-1}, t 2^{-j}]; the
  // closing panel spans the remaining [0, t 2^{-levels}] sliver.
  double acc = 0.0;
  double prev_total = 0.0;
  bool have_prev = false;
  for (int j = 0; j < max_levels; ++j) {
    const double hi = t * std::ldexp(1.0, -j);
    const double lo = 0.5 * hi;
    acc += panel_value(kind, t, x, path, lo, hi);
    const int levels = j + 1;
    if (levels < min_levels) continue;
    const double total = acc + panel_value(kind, t, x, path, 0.0, lo);
    if (have_prev) {
      const double scale = std::max(std::abs(total), floor);
      if (std::abs(total - prev_total) <= rel_tol * scale) return total;
    }
    prev_total = total;
    have_prev = true;
  }
  fail("boundary_integral: refinement did not converge within max_levels");
}

Field boundary_integral_field(BoundaryKind kind, double t, const Grid& grid,
                              const BoundaryPath& path, int min_levels,
                              int max_levels, double rel_tol) {
  Field out(grid.size(), 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i)
    out[i] = boundary_integral(kind, t, grid.nodes[i], path, min_levels,
                               max_levels, rel_tol);
  return out;
}

}  // namespace shel
