#include "doctest.h"

#include "shel/errors.hpp"
#include "shel/grid.hpp"

#include <cmath>

#include <numbers>

namespace { constexpr double kPi = std::numbers::pi; constexpr double kE = std::numbers::e; }

using namespace shel;

TEST_CASE("uniform grid nodes and trapezoid weights") {
  const Grid g = Grid::uniform(5);
  REQUIRE(g.size() == 5);
  CHECK(g.nodes[0] == 0.0);
  CHECK(g.nodes[4] == 1.0);
  CHECK(g.nodes[2] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(g.spacing() == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(g.weights[0] == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(g.weights[1] == doctest::Approx(0.25).epsilon(1e-15));
  double total = 0.0;
  for (double w : g.weights) total += w;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("grid rejects fewer than four nodes") {
  CHECK_THROWS_AS(Grid::uniform(3), Error);
}

TEST_CASE("trapezoid rule is exact for affine integrands") {
  const Grid g = Grid::uniform(17);
  Field f(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) f[i] = 2.0 + 3.0 * g.nodes[i];
  CHECK(integrate(g, f) == doctest::Approx(3.5).epsilon(1e-15));
}

TEST_CASE("trapezoid rule converges on smooth integrands") {
  // integral of sin(pi x) over [0,1] = 2/pi; trapezoid error = O(h^2)
  const Grid g = Grid::uniform(201);
  Field f(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) f[i] = std::sin(kPi * g.nodes[i]);
  CHECK(std::abs(integrate(g, f) - 2.0 / kPi) < 1e-4);
}

TEST_CASE("inner product is symmetric and positive") {
  const Grid g = Grid::uniform(33);
  Field f(g.size()), h(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    f[i] = std::cos(2.0 * g.nodes[i]);
    h[i] = g.nodes[i] * g.nodes[i];
  }
  CHECK(inner_product(g, f, h) == doctest::Approx(inner_product(g, h, f)).epsilon(1e-15));
  CHECK(inner_product(g, f, f) > 0.0);
}

TEST_CASE("sup norm picks the largest magnitude") {
  Field f = {0.25, -3.5, 1.0, 2.0};
  CHECK(sup_norm(f) == doctest::Approx(3.5).epsilon(1e-15));
}

TEST_CASE("time grid nodes and horizon") {
  TimeGrid tg{0.5, 0.125, 16};
  CHECK(tg.node(0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(tg.node(4) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(tg.horizon() == doctest::Approx(2.5).epsilon(1e-15));
}
