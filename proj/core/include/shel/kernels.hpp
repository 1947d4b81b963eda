#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "shel/grid.hpp"

namespace shel {

/// Boundary condition families on the unit interval:
///   C1: Y(0)  = mu0, Y(1)  = mu1   (value / value)
///   C2: Y'(0) = mu0, Y'(1) = mu1   (slope / slope)
///   C3: Y(0)  = mu0, Y'(1) = mu1   (value / slope)
///   C4: Y'(0) = mu0, Y(1)  = mu1   (slope / value)
enum class BoundaryKind { C1 = 1, C2 = 2, C3 = 3, C4 = 4 };

/// Does the kind pin the field VALUE (as opposed to the slope) at x = 0?
bool value_at_left(BoundaryKind kind);
/// Same question at x = 1.
bool value_at_right(BoundaryKind kind);

const char* to_string(BoundaryKind kind);
BoundaryKind boundary_kind_from_string(const std::string& name);

/// Free-space heat kernel for the generator (1/2) d^2/dx^2:
///   q_t(x) = exp(-x^2 / (2t)) / sqrt(2 pi t).
double gaussian_q(double t, double x);

/// Image-sum truncation choice: smallest half-width k such that every
/// dropped reflection lies at distance > (k+1)*period - 2 from the
/// evaluation point, together with an analytic bound on the dropped tail.
/// The bound is kept below 1e-14 by construction.
struct ImageTruncation {
  int k = 0;
  double tail_bound = 0.0;

  /// period is 2 for value/value and slope/slope kinds, 4 for the mixed
  /// kinds (their reflection group has twice the fundamental cell).
  static ImageTruncation choose(double t, double period);
};

/// Transition density p_t(x, y) of Brownian motion (generator Delta/2) on
/// [0,1] with the homogeneous version of the given boundary kind, evaluated
/// by the method of images.
double image_kernel(BoundaryKind kind, double t, double x, double y);

/// d/dy of image_kernel.
double image_kernel_dy(BoundaryKind kind, double t, double x, double y);

/// Eigenfunction-series evaluation of the same density. Independent of the
/// image representation; kept as a cross-check oracle and never used on the
/// production solve path.
double spectral_kernel(BoundaryKind kind, double t, double x, double y,
                       double term_tol = 1e-17);

/// Endpoint data of y -> p_t(x, y): values and y-derivatives at y=0, y=1.
struct KernelEndpoints {
  double value0 = 0.0;   // p_t(x, 0)
  double value1 = 0.0;   // p_t(x, 1)
  double deriv0 = 0.0;   // d/dy p_t(x, y) at y = 0
  double deriv1 = 0.0;   // d/dy p_t(x, y) at y = 1
};
KernelEndpoints kernel_endpoints(BoundaryKind kind, double t, double x);

/// Kind-specific boundary lift basis {l0, l1} evaluated at x:
///   C1: {1 - x, x}          C2: {x - x^2/2, x^2/2}
///   C3: {1, x}              C4: {x - 1, 1}
/// A field f with boundary data (d0, d1) — values at value ends, slopes at
/// slope ends — decomposes as f = d0*l0 + d1*l1 + z where z carries
/// homogeneous data, so trapezoid quadrature of z against the kernel keeps
/// spectral accuracy instead of the O(h^2) boundary error of raw trapezoid.
double lift_basis(BoundaryKind kind, int which, double x);

/// Exact semigroup action (P_t l)(x) on a lift basis element, computed from
/// closed-form Gaussian moments of the image sum (no quadrature involved).
double lift_action(BoundaryKind kind, int which, double t, double x);

/// Dense transition matrix for one kind and one duration on one grid, with
/// the endpoint vectors needed by boundary functionals and the analytic
/// actions of the semigroup on the kind's lift basis.
struct KernelTable {
  BoundaryKind kind = BoundaryKind::C1;
  double t = 0.0;
  Grid grid;
  std::vector<double> matrix;  // row-major n*n, matrix[i*n + j] = p_t(x_i, x_j)
  std::vector<double> value0, value1, deriv0, deriv1;  // endpoint data per row
  std::vector<double> lift0_action, lift1_action;      // (P_t l)(x_i)
  ImageTruncation truncation;

  std::size_t size() const { return grid.size(); }
  double at(std::size_t i, std::size_t j) const {
    return matrix[i * grid.size() + j];
  }
};

/// Builds the table. Durations below 1e-6 are refused: the kernel is then
/// narrower than any reasonable grid resolves and quadrature against it is
/// meaningless.
KernelTable build_kernel_table(BoundaryKind kind, const Grid& grid, double t);

/// (P_t f)(x_i) = sum_j w_j p_t(x_i, x_j) f_j — trapezoid transport of a
/// nodal field by the table. Exact for the kernel's invariant states up to
/// quadrature error; see lift_basis for how the solver removes the boundary
/// part of that error.
Field apply_semigroup(const KernelTable& table, const Field& f);

/// sup |(P_t f) - f| over nodes at distance > 3*sqrt(t) from both ends.
/// For smooth f this decays with t and is the table's delta-recovery
/// diagnostic.
double delta_recovery_check(const KernelTable& table, const Field& f);

}  // namespace shel
