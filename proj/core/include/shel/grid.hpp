#pragma once

#include <cstddef>
#include <vector>

namespace shel {

/// Nodal values of a scalar field on a Grid, one entry per node.
using Field = std::vector<double>;

/// Uniform quadrature grid on the unit interval.
///
/// Nodes include both endpoints (nodes.front() == 0, nodes.back() == 1) and
/// weights are the trapezoid weights h/2, h, ..., h, h/2, which sum to 1.
struct Grid {
  std::vector<double> nodes;
  std::vector<double> weights;

  /// n equally spaced nodes, n >= 4.
  static Grid uniform(std::size_t n);

  std::size_t size() const { return nodes.size(); }
  double spacing() const { return nodes[1] - nodes[0]; }
};

/// Uniform time grid t_k = t0 + k * dt, k = 0 .. n_steps.
struct TimeGrid {
  double t0 = 0.0;
  double dt = 1e-3;
  std::size_t n_steps = 0;

  double node(std::size_t k) const { return t0 + static_cast<double>(k) * dt; }
  double horizon() const { return node(n_steps); }
};

/// Trapezoid inner product sum_j w_j f_j g_j (the L2 pairing on the grid).
double inner_product(const Grid& grid, const Field& f, const Field& g);

/// Trapezoid integral sum_j w_j f_j.
double integrate(const Grid& grid, const Field& f);

/// max_j |f_j|.
double sup_norm(const Field& f);

/// Time-indexed states of one realisation, plus the per-step noise
/// increment vectors actually consumed (empty when recording is off).
struct Trajectory {
  TimeGrid time;
  std::vector<Field> states;      // n_steps + 1 entries
  std::vector<Field> increments;  // n_steps entries when recorded
  std::size_t clamp_activations = 0;  // nodes clipped by the positivity clamp
};

}  // namespace shel
