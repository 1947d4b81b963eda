#include "doctest.h"

#include "shel/grid.hpp"
#include "shel/noise.hpp"
#include "shel/rng.hpp"

#include <cmath>
#include <vector>

#include <numbers>

namespace { constexpr double kPi = std::numbers::pi; constexpr double kE = std::numbers::e; }

using namespace shel;

TEST_CASE("named covariance kernels evaluate as documented") {
  const CovKernel c = constant_kernel(2.5);
  CHECK(c(0.3, 0.9) == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(c.kappa0 == doctest::Approx(2.5).epsilon(1e-15));

  const CovKernel e = exponential_kernel(0.2, 1.5);
  CHECK(e(0.3, 0.7) == doctest::Approx(1.5 * std::exp(-0.4 / 0.2)).epsilon(1e-14));
  CHECK(e(0.7, 0.3) == doctest::Approx(e(0.3, 0.7)).epsilon(1e-15));

  const CovKernel g = gaussian_kernel(0.1, 1.0);
  CHECK(g(0.2, 0.5) == doctest::Approx(std::exp(-0.09 / (2.0 * 0.01))).epsilon(1e-14));

  const CovKernel b = brownian_kernel(3.0);
  CHECK(b(0.25, 0.75) == doctest::Approx(3.0 * 0.25).epsilon(1e-15));
  CHECK(b(0.75, 0.25) == doctest::Approx(3.0 * 0.25).epsilon(1e-15));
}

TEST_CASE("factorisation reproduces the covariance matrix") {
  const Grid grid = Grid::uniform(48);
  struct Case {
    CovKernel kernel;
    double tol;
  };
  const Case cases[] = {
      {constant_kernel(1.0), 1e-10},
      {exponential_kernel(0.2), 1e-8},
      {gaussian_kernel(0.1), 1e-8},
      {gaussian_kernel(0.02), 1e-8},  // numerically rank deficient
      {brownian_kernel(1.0), 1e-8},   // zero variance at the left end
  };
  for (const Case& c : cases) {
    const CovFactor f = build_cov_factor(c.kernel, grid);
    CAPTURE(c.kernel.name);
    CHECK(f.size() == grid.size());
    CHECK(f.jitter >= 0.0);
    CHECK(factor_residual(f, c.kernel) <= c.tol);
  }
}

TEST_CASE("banded apply agrees with a dense multiply") {
  const Grid grid = Grid::uniform(40);
  const CovFactor f = build_cov_factor(exponential_kernel(0.15), grid);
  NormalStream rng({2024u, 5u});
  std::vector<double> z(grid.size());
  rng.normals(z);
  std::vector<double> fast(grid.size());
  f.apply(z, fast);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < grid.size(); ++j) acc += f.at(i, j) * z[j];
    CHECK(fast[i] == doctest::Approx(acc).epsilon(1e-12));
  }
}

TEST_CASE("increment sampling is deterministic per seed") {
  const Grid grid = Grid::uniform(24);
  const CovFactor f = build_cov_factor(gaussian_kernel(0.2), grid);
  NormalStream a({7u, 1u});
  NormalStream b({7u, 1u});
  const NoiseIncrement ia = sample_increment(f, 0.01, a);
  const NoiseIncrement ib = sample_increment(f, 0.01, b);
  REQUIRE(ia.values.size() == grid.size());
  CHECK(ia.dt == 0.01);
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(ia.values[i] == ib.values[i]);
}

TEST_CASE("sampled increments have the advertised covariance") {
  const Grid grid = Grid::uniform(32);
  const CovKernel kernel = exponential_kernel(0.3);
  const CovFactor f = build_cov_factor(kernel, grid);
  const double dt = 0.25;

  std::vector<double> phi(grid.size()), psi(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    phi[i] = std::sin(kPi * grid.nodes[i]);
    psi[i] = grid.nodes[i] * (1.0 - grid.nodes[i]);
  }
  const double target = dt * integral_covariance(grid, phi, psi, kernel, 1.0);

  NormalStream rng({424242u, 0u});
  const int n = 30000;
  double s1 = 0.0, s2 = 0.0;
  for (int k = 0; k < n; ++k) {
    const NoiseIncrement inc = sample_increment(f, dt, rng);
    double a = 0.0, b = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      a += grid.weights[i] * phi[i] * inc.values[i];
      b += grid.weights[i] * psi[i] * inc.values[i];
    }
    const double prod = a * b;
    s1 += prod;
    s2 += prod * prod;
  }
  const double mean = s1 / n;
  const double se = std::sqrt(std::max(0.0, s2 / n - mean * mean) / n);
  CHECK(std::abs(mean - target) <= 5.0 * se);
}

TEST_CASE("integral covariance has the exact product form for flat kernels") {
  const Grid grid = Grid::uniform(64);
  std::vector<double> phi(grid.size(), 1.0), psi(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) psi[i] = grid.nodes[i];
  // scale * T * (integral of phi) * (integral of psi) = 2 * 3 * 1 * 1/2
  CHECK(integral_covariance(grid, phi, psi, constant_kernel(2.0), 3.0) ==
        doctest::Approx(3.0).epsilon(1e-13));
}

TEST_CASE("integral covariance matches a closed form for the min kernel") {
  const Grid grid = Grid::uniform(128);
  std::vector<double> one(grid.size(), 1.0);
  // double integral of min(x,y) over the unit square = 1/3
  CHECK(std::abs(integral_covariance(grid, one, one, brownian_kernel(1.0), 1.0) - 1.0 / 3.0) <=
        1e-3);
}
