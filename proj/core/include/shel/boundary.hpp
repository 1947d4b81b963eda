#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "shel/grid.hpp"
#include "shel/kernels.hpp"
#include "shel/rng.hpp"

namespace shel {

/// One realisation of the boundary data pair (mu0, mu1) sampled on a time
/// grid. mu0 prescribes the value (C1, C3) or the slope (C2, C4) at x = 0,
/// mu1 the value (C1, C4) or slope (C2, C3) at x = 1.
struct BoundaryPath {
  TimeGrid time;
  std::vector<double> mu0;  // n_steps + 1 samples
  std::vector<double> mu1;
  double gamma0 = 0.49;     // declared a.s. Hoelder exponent, in (0, 1/2)
  std::string generator;

  /// Linear interpolation between samples, clamped outside [t0, horizon].
  double mu0_at(double t) const;
  double mu1_at(double t) const;
};

enum class BoundaryGen { constant, sinusoid, brownian, fbm };

/// Generator recipe for boundary data; materialised per realisation so
/// stochastic boundaries are resampled path by path.
struct BoundaryGenSpec {
  BoundaryGen kind = BoundaryGen::constant;
  // constant:  mu_i(t) = c_i
  double c0 = 0.0, c1 = 0.0;
  // sinusoid:  mu_i(t) = c_i + amp_i * sin(omega_i * t + phase_i)
  double amp0 = 0.0, omega0 = 1.0, phase0 = 0.0;
  double amp1 = 0.0, omega1 = 1.0, phase1 = 0.0;
  // brownian:  mu_i(t) = c_i + sigma_i * B_i(t), independent B_0, B_1
  // fbm:       same with fractional Brownian motion of index hurst < 1/2
  double sigma0 = 0.0, sigma1 = 0.0;
  double hurst = 0.25;

  bool stochastic() const {
    return kind == BoundaryGen::brownian || kind == BoundaryGen::fbm;
  }
  /// Declared Hoelder exponent for paths from this generator.
  double gamma0() const;
};

BoundaryGen boundary_gen_from_string(const std::string& name);
const char* to_string(BoundaryGen g);

/// Samples one boundary path on `time`. The seed is ignored by the
/// deterministic generators. Fractional paths are drawn exactly via a
/// dense covariance factorization, so n_steps is capped at 4096 for fbm.
BoundaryPath generate_boundary(const BoundaryGenSpec& spec, const TimeGrid& time,
                               SeedSpec seed);

/// Endpoint weight vectors extracted from a KernelTable, viewing row i as
/// the test function f = p_t(x_i, .) of the boundary functional.
struct BoundaryWeights {
  BoundaryKind kind = BoundaryKind::C1;
  std::span<const double> value0, value1, deriv0, deriv1;

  static BoundaryWeights from(const KernelTable& table);
};

/// The boundary functional F(f; mu0, mu1) of the weak formulation:
///   C1:  f'(0) mu0 - f'(1) mu1        C2: -f(0) mu0 + f(1) mu1
///   C3:  f'(0) mu0 + f(1) mu1        C4: -f(0) mu0 - f'(1) mu1
/// (values and derivatives of the test function at the two ends, paired
/// against value data or slope data as the kind dictates).
double eval_F(const KernelEndpoints& e, BoundaryKind kind, double mu0, double mu1);
double eval_F(const BoundaryWeights& w, std::size_t i, double mu0, double mu1);

/// Boundary contribution to the mild solution at (t, x):
///   (1/2) * integral_0^t F(p_{t-s}(x, .); mu0(s), mu1(s)) ds.
/// The integrand blows up like an approximate identity as s -> t near the
/// ends, so the quadrature refines geometrically toward s = t (ratio 1/2)
/// with a Gauss-Legendre panel per level and a closing panel across the
/// remaining sliver; levels are added until successive refinements agree
/// to rel_tol, and exceeding max_levels throws.
double boundary_integral(BoundaryKind kind, double t, double x,
                         const BoundaryPath& path, int min_levels = 20,
                         int max_levels = 48, double rel_tol = 1e-4);

/// boundary_integral at every grid node.
Field boundary_integral_field(BoundaryKind kind, double t, const Grid& grid,
                              const BoundaryPath& path, int min_levels = 20,
                              int max_levels = 48, double rel_tol = 1e-4);

}  // namespace shel
