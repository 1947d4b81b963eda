#include "shel/grid.hpp"

#include <cmath>
#include <cstdlib>

#include "shel/errors.hpp"

namespace shel {

Grid Grid::uniform(std::size_t n) {
  require(n >= 4, "Grid::uniform: need at least 4 nodes");
  Grid g;
  g.nodes.resize(n);
  g.weights.resize(n);
  const double h = 1.0 / static_cast<double>(n - 1);
  for (std::size_t j = 0; j < n; ++j) {
    g.nodes[j] = static_cast<double>(j) * h;
    g.weights[j] = h;
  }
  g.nodes.front() = 0.0;
  g.nodes.back() = 1.0;
  g.weights.front() = 0.5 * h;
  g.weights.back() = 0.5 * h;
  return g;
}

double inner_product(const Grid& grid, const Field& f, const Field& g) {
  require(f.size() == grid.size() && g.size() == grid.size(),
          "inner_product: field size does not match grid");
  double acc = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) acc += grid.weights[j] * f[j] * g[j];
  return acc;
}

double integrate(const Grid& grid, const Field& f) {
  require(f.size() == grid.size(), "integrate: field size does not match grid");
  double acc = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) acc += grid.weights[j] * f[j];
  return acc;
}

double sup_norm(const Field& f) {
  double m = 0.0;
  for (double v : f) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace shel
