#include "shel/noise.hpp"

#include <cmath>

#include "shel/errors.hpp"

namespace shel {

CovKernel constant_kernel(double scale) {
  require(scale >= 0.0, "constant_kernel: scale must be nonnegative");
  return {[scale](double, double) { return scale; }, scale, "constant"};
}

CovKernel exponential_kernel(double ell, double scale) {
  require(ell > 0.0, "exponential_kernel: ell must be positive");
  require(scale >= 0.0, "exponential_kernel: scale must be nonnegative");
  return {[ell, scale](double x, double y) {
            return scale * std::exp(-std::abs(x - y) / ell);
          },
          scale, "exponential"};
}

CovKernel gaussian_kernel(double ell, double scale) {
  require(ell > 0.0, "gaussian_kernel: ell must be positive");
  require(scale >= 0.0, "gaussian_kernel: scale must be nonnegative");
  return {[ell, scale](double x, double y) {
            const double d = (x - y) / ell;
            return scale * std::exp(-0.5 * d * d);
          },
          scale, "gaussian"};
}

CovKernel brownian_kernel(double scale) {
  require(scale >= 0.0, "brownian_kernel: scale must be nonnegative");
  return {[scale](double x, double y) { return scale * std::min(x, y); },
          scale, "brownian"};
}

namespace {

// Attempts a Cholesky factorization of K + jitter I that tolerates exact
// rank deficiency: pivots within `pivot_tol` of zero produce a zero column
// (valid for a positive semidefinite matrix, where a zero pivot forces the
// whole residual column to vanish). Returns false on a genuinely negative
// pivot or on a zero pivot whose residual column is too large to clamp.
bool try_factor(const std::vector<double>& K, std::size_t n, double jitter,
                double pivot_tol, double clamp_tol, std::vector<double>& L) {
  L.assign(n * n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    double d = K[j * n + j] + jitter;
    for (std::size_t k = 0; k < j; ++k) d -= L[j * n + k] * L[j * n + k];
    if (d > pivot_tol) {
      const double root = std::sqrt(d);
      L[j * n + j] = root;
      for (std::size_t i = j + 1; i < n; ++i) {
        double s = K[i * n + j];
        for (std::size_t k = 0; k < j; ++k) s -= L[i * n + k] * L[j * n + k];
        L[i * n + j] = s / root;
      }
    } else if (d > -pivot_tol) {
      // Semidefinite clamp: accept only if the residual column is itself
      // negligible, otherwise the matrix is not (numerically) PSD.
      double worst = 0.0;
      for (std::size_t i = j + 1; i < n; ++i) {
        double s = K[i * n + j];
        for (std::size_t k = 0; k < j; ++k) s -= L[i * n + k] * L[j * n + k];
        worst = std::max(worst, std::abs(s));
      }
      if (worst > clamp_tol) return false;
      L[j * n + j] = 0.0;
    } else {
      return false;
    }
  }
  return true;
}

}  // namespace

CovFactor build_cov_factor(const CovKernel& kernel, const Grid& grid) {
  const std::size_t n = grid.size();
  std::vector<double> K(n * n);
  double max_diag = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      const double v = kernel(grid.nodes[i], grid.nodes[j]);
      const double vt = kernel(grid.nodes[j], grid.nodes[i]);
      require(std::abs(v - vt) <= 1e-12 * (1.0 + std::abs(v)),
              "build_cov_factor: kernel is not symmetric");
      K[i * n + j] = v;
      K[j * n + i] = v;
    }
    max_diag = std::max(max_diag, K[i * n + i]);
  }
  const double scale = std::max(max_diag, 1e-300);
  const double pivot_tol = 1e-12 * scale;
  const double clamp_tol = 1e-6 * scale;

  CovFactor f;
  f.grid = grid;
  for (double jitter :
       {0.0, 1e-12, 1e-11, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6}) {
    if (try_factor(K, n, jitter, pivot_tol, clamp_tol, f.factor)) {
      f.jitter = jitter;
      std::size_t bw = 0;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
          if (f.factor[i * n + j] != 0.0) {
            bw = std::max(bw, i - j);
            break;
          }
        }
      }
      f.bandwidth = bw;
      return f;
    }
  }
  fail("build_cov_factor: matrix is not positive semidefinite "
       "(jitter escalation up to 1e-6 failed)");
}

double factor_residual(const CovFactor& f, const CovKernel& kernel) {
  const std::size_t n = f.size();
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k <= j; ++k) s += f.at(i, k) * f.at(j, k);
      double target = kernel(f.grid.nodes[i], f.grid.nodes[j]);
      if (i == j) target += f.jitter;
      worst = std::max(worst, std::abs(s - target));
    }
  }
  return worst;
}

void CovFactor::apply(const std::vector<double>& z,
                      std::vector<double>& out) const {
  const std::size_t n = size();
  require(z.size() == n, "CovFactor::apply: vector size does not match grid");
  out.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i > bandwidth ? i - bandwidth : 0;
    const double* row = factor.data() + i * n;
    double acc = 0.0;
    for (std::size_t j = lo; j <= i; ++j) acc += row[j] * z[j];
    out[i] = acc;
  }
}

NoiseIncrement sample_increment(const CovFactor& f, double dt,
                                NormalStream& rng) {
  require(dt > 0.0, "sample_increment: dt must be positive");
  const std::size_t n = f.size();
  std::vector<double> z(n);
  rng.normals(z);
  NoiseIncrement inc;
  inc.dt = dt;
  f.apply(z, inc.values);
  const double root_dt = std::sqrt(dt);
  for (double& v : inc.values) v *= root_dt;
  return inc;
}

double integral_covariance(const Grid& grid, const Field& phi, const Field& psi,
                           const CovKernel& kernel, double T) {
  const std::size_t n = grid.size();
  require(phi.size() == n && psi.size() == n,
          "integral_covariance: field size does not match grid");
  require(T >= 0.0, "integral_covariance: T must be nonnegative");
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double inner = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      inner += grid.weights[j] * psi[j] * kernel(grid.nodes[i], grid.nodes[j]);
    acc += grid.weights[i] * phi[i] * inner;
  }
  return acc * T;
}

}  // namespace shel
