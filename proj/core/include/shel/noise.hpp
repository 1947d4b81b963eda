#pragma once

#include <functional>
#include <string>
#include <vector>

#include "shel/grid.hpp"
#include "shel/rng.hpp"

namespace shel {

/// Spatial covariance kernel kappa(x, y) of the driving noise, which is
/// white in time and colored in space:
///   E[ W(ds, dx) W(ds', dy) ] = delta(s - s') kappa(x, y) ds dx dy.
/// kappa must be symmetric nonnegative-definite and bounded by kappa0.
struct CovKernel {
  std::function<double(double, double)> k;
  double kappa0 = 1.0;  // sup |kappa|, used by hypothesis checks
  std::string name;

  double operator()(double x, double y) const { return k(x, y); }
};

/// kappa(x, y) = scale (perfectly correlated in space; rank one).
CovKernel constant_kernel(double scale = 1.0);
/// kappa(x, y) = scale * exp(-|x - y| / ell).
CovKernel exponential_kernel(double ell, double scale = 1.0);
/// kappa(x, y) = scale * exp(-(x - y)^2 / (2 ell^2)).
CovKernel gaussian_kernel(double ell, double scale = 1.0);
/// kappa(x, y) = scale * min(x, y) (Brownian-motion covariance; singular
/// but nonnegative-definite, exercises the zero-pivot path).
CovKernel brownian_kernel(double scale = 1.0);

/// Lower-triangular factor L with L L^T = K + jitter I, where
/// K_ij = kappa(x_i, x_j). The factorization tolerates semidefinite K:
/// pivots below 1e-12 * max-diagonal are clamped to zero columns, and
/// genuine indefiniteness escalates a diagonal jitter through
/// 1e-12, 1e-11, ..., 1e-6 before giving up.
struct CovFactor {
  Grid grid;
  std::vector<double> factor;  // row-major n*n, lower triangular
  double jitter = 0.0;
  std::size_t bandwidth = 0;  // max j such that some row i has L[i, i-j] != 0

  std::size_t size() const { return grid.size(); }
  double at(std::size_t i, std::size_t j) const {
    return factor[i * grid.size() + j];
  }

  /// out = L z (band-aware; O(n * bandwidth)).
  void apply(const std::vector<double>& z, std::vector<double>& out) const;
};

CovFactor build_cov_factor(const CovKernel& kernel, const Grid& grid);

/// Max abs entry of L L^T - K (the factorization residual); bounded by
/// jitter plus clamping round-off.
double factor_residual(const CovFactor& f, const CovKernel& kernel);

/// One noise increment over a step of length dt:
///   values = sqrt(dt) * L * z,  z ~ N(0, I).
/// Nodal covariance is then dt * (K + jitter I), the discrete counterpart
/// of white-in-time, kappa-colored-in-space noise.
struct NoiseIncrement {
  Field values;
  double dt = 0.0;
};
NoiseIncrement sample_increment(const CovFactor& f, double dt, NormalStream& rng);

/// Covariance of smoothed noise functionals over [0, T]:
///   E[ (W_T phi) (W_T psi) ] = T * sum_ij w_i w_j phi_i psi_j kappa(x_i, x_j).
double integral_covariance(const Grid& grid, const Field& phi, const Field& psi,
                           const CovKernel& kernel, double T);

}  // namespace shel
