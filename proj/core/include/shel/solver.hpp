#pragma once

#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "shel/boundary.hpp"
#include "shel/coefficients.hpp"
#include "shel/grid.hpp"
#include "shel/kernels.hpp"
#include "shel/noise.hpp"
#include "shel/rng.hpp"

namespace shel {

/// Initial state recipe.
///   zero | constant (a) | linear (a + b x) | sine (a sin(mode pi x)) |
///   cosine (a cos(mode pi x)) | custom (explicit nodal values)
struct InitialSpec {
  std::string kind = "zero";
  double a = 0.0;
  double b = 0.0;
  int mode = 1;
  Field custom;

  Field materialize(const Grid& grid) const;
};

/// Complete description of one solve. The seed's stream field is the path
/// index: path p consumes noise stream 2p and (for stochastic generators)
/// boundary stream 2p + 1, so ensembles are reproducible path by path in
/// any execution order.
struct SolveConfig {
  BoundaryKind kind = BoundaryKind::C1;
  std::size_t grid_n = 128;
  TimeGrid time;
  SeedSpec seed;
  CovKernel kappa = constant_kernel(1.0);
  CoefficientPair coeffs = additive_pair(0.0);
  BoundaryGenSpec boundary;
  InitialSpec initial;
  bool clamp_negative = false;
  bool record_increments = false;

  Grid make_grid() const { return Grid::uniform(grid_n); }
};

/// Within-step boundary-data contribution
///   (1/2) int_0^dt F(p_u(x_i, .); mu0(t1 - u), mu1(t1 - u)) du,
/// precomputed as per-node weights on a geometric Gauss-Legendre
/// subdivision of (0, dt]. A plain one-point rule would miss the
/// approximate-identity mass the functional deposits within
/// O(sqrt(dt)) of the ends, so the rule resolves the u -> 0 layer once and
/// replays it cheaply: the weights are nonzero only near the two ends.
struct BoundaryStepRule {
  struct UNode {
    double u;                // duration offset in (0, dt]
    std::vector<double> w0;  // weights for nodes 0 .. w0.size()-1
    std::vector<double> w1;  // weights for nodes n - w1.size() .. n-1
  };
  std::vector<UNode> unodes;

  /// y[i] += sum_q w_q(i) mu(t_next - u_q).
  void add_to(Field& y, double t_next, const BoundaryPath& path) const;
};

BoundaryStepRule make_boundary_step_rule(BoundaryKind kind, const Grid& grid,
                                         double dt);

/// Everything reusable across realisations of one (kind, grid, dt, kappa)
/// configuration: the one-step kernel table, the weighted transition
/// matrix with its apply bandwidth, lift node values, the within-step
/// boundary rule and the noise factor.
struct StepContext {
  Grid grid;
  double dt = 0.0;
  KernelTable table;
  std::vector<double> B;  // row-major, B[i*n+j] = w_j p_dt(x_i, x_j)
  std::size_t band = 0;   // |i - j| > band contributes below 1e-18 relatively
  Field lift0, lift1;
  BoundaryStepRule boundary_rule;
  CovFactor cov;
};

StepContext make_step_context(const SolveConfig& cfg);

/// Drives one realisation: y_{k+1} = transport of (y_k + dt G(y_k)) by the
/// one-step kernel (boundary-lifted), plus the kernel-weighted noise term
/// sum_j w_j p_dt(x_i, x_j) H(y_j) dW_j, plus the within-step boundary
/// contribution; endpoint nodes are then imposed from mu (value ends) or by
/// second-order one-sided extrapolation matching the slope data.
/// `observe` fires at every time node including k = 0.
/// When `increments_in` is non-null it must hold n_steps vectors and the
/// noise stream is not touched (coupled / refined-step experiments replay
/// recorded increments this way). Returns the number of node values raised
/// by the positivity clamp.
std::size_t run_path(
    const SolveConfig& cfg, const StepContext& ctx, const BoundaryPath& path,
    SeedSpec noise_seed,
    const std::function<void(std::size_t, double, const Field&)>& observe,
    std::vector<Field>* increments_out = nullptr,
    const std::vector<Field>* increments_in = nullptr);

/// One full trajectory (allocates the context itself; use the overload to
/// share a context across paths).
Trajectory simulate(const SolveConfig& cfg);
Trajectory simulate(const SolveConfig& cfg, const StepContext& ctx);

/// Direct (non-stepping) evaluation of the noiseless drift-free solution
///   <Y0, p_t(x, .)> + (1/2) int_0^t F(p_{t-s}(x, .); mu(s)) ds
/// at the requested times. Shares no code with the stepping loop beyond
/// the kernel itself; used to cross-check the stepper. Times must be 0 or
/// >= 1e-6. The same endpoint imposition as the stepper is applied.
std::vector<Field> homogeneous_solution(const SolveConfig& cfg,
                                        std::span<const double> times);

/// Contraction record of a Picard solve.
struct PicardReport {
  std::vector<double> sup_distances;    // sup over (k, x), per iteration
  std::vector<double> final_distances;  // sup over x at the horizon
  std::size_t iterations = 0;
  bool converged = false;
  double tol = 0.0;
};

/// Solves the discrete fixed-point formulation by Picard iteration against
/// a FIXED noise record (increments[k] = the dW vector consumed by step k),
/// starting from the constant trajectory `start_value`. The fixed point
/// reproduces the stepping trajectory for the same increments to round-off;
/// distinct starts converging to the same limit witness uniqueness.
std::pair<Trajectory, PicardReport> picard_solve(
    const SolveConfig& cfg, const StepContext& ctx, const BoundaryPath& path,
    const std::vector<Field>& increments, double start_value = 0.0,
    std::size_t max_iter = 60, double tol = 1e-8);

}  // namespace shel
