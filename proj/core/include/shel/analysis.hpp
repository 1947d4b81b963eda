#pragma once

#include <span>
#include <string>
#include <vector>

#include "shel/solver.hpp"

namespace shel {

/// Pointwise ensemble summary at tracked times: per-(time, node) running
/// mean and (unbiased) variance over paths, with the standard error of the
/// mean available as sqrt(variance / paths).
struct EnsembleStats {
  std::size_t paths = 0;
  std::vector<double> times;
  Grid grid;
  std::vector<Field> mean;      // [time][node]
  std::vector<Field> variance;  // [time][node]
};

/// Runs `paths` independent realisations of `cfg` (path p uses noise
/// stream 2p and boundary stream 2p + 1) and accumulates mean / variance
/// at the snapshot times, which must lie on the time grid.
EnsembleStats ensemble_stats(const SolveConfig& cfg, std::size_t paths,
                             std::span<const double> snap_times);

/// One estimated quantity with its standard error.
struct MomentEstimate {
  double value = 0.0;
  double se = 0.0;
};

/// Delete-one jackknife mean and standard error of a sample (>= 2 values).
MomentEstimate jackknife_mean(std::span<const double> values);

/// Per-lag absolute-increment moments of an ensemble. `per_path[m][l]` is
/// path m's average of |increment|^(2p) at lag l; `moments[l]` aggregates
/// the per-path reductions with a delete-one-path jackknife (so the
/// standard errors respect within-path correlation). Requires >= 100 paths
/// when produced by the ensemble drivers below.
struct IncrementMoments {
  std::string variable;  // "space" or "time"
  int p = 2;
  std::vector<double> lags;
  std::vector<MomentEstimate> moments;
  std::vector<std::vector<double>> per_path;
};

/// Aggregates per-path reductions into jackknife estimates, one per lag.
std::vector<MomentEstimate> aggregate_moments(
    const std::vector<std::vector<double>>& per_path);

/// Spatial increment moments: for each path, |Y_t(x_i + lag) - Y_t(x_i)|^(2p)
/// averaged over the snapshot times and all base nodes x_i in
/// [x_lo, x_hi] (the partner node may leave the window). Lags are given in
/// grid nodes. Requires paths >= 100.
IncrementMoments spatial_increment_moments(
    const SolveConfig& cfg, std::size_t paths, int p,
    std::span<const double> snap_times, double x_lo, double x_hi,
    std::span<const std::size_t> lag_nodes);

/// Temporal increment moments: for each path,
/// |Y_{t_b + lag}(x) - Y_{t_b}(x)|^(2p) averaged over the base times and
/// probe locations. Lags are given in time steps; base times must lie on
/// the time grid. Requires paths >= 100.
IncrementMoments temporal_increment_moments(
    const SolveConfig& cfg, std::size_t paths, int p,
    std::span<const double> base_times, std::span<const double> probe_xs,
    std::span<const std::size_t> lag_steps);

/// Log-log regression summary of moment against lag. For moments of order
/// 2p of a field that is Holder-gamma in the fitted variable, the expected
/// slope is 2 p gamma, so `implied_exponent` = slope / (2p) estimates
/// gamma. `ci_halfwidth` is a ~95% half-width on the implied exponent.
struct HolderFit {
  std::string variable;
  int p = 2;
  double slope = 0.0;
  double implied_exponent = 0.0;
  double ci_halfwidth = 0.0;
  double lag_lo = 0.0;
  double lag_hi = 0.0;
  std::size_t n_lags = 0;
};

/// Weighted least squares of log(moment) on log(lag). Requires at least 5
/// lags spanning at least one decade and strictly positive moments; when
/// standard errors are available the weights are the inverse delta-method
/// log-variances, otherwise the fit is unweighted with residual-based
/// uncertainty.
HolderFit holder_fit(std::span<const double> lags,
                     std::span<const MomentEstimate> moments, int p,
                     const std::string& variable);
HolderFit holder_fit(const IncrementMoments& moments);

/// Outcome of the pathwise ordering experiment between a `lower` and an
/// `upper` configuration coupled through identical noise, boundary data
/// and dispersion coefficient.
struct ComparisonReport {
  std::size_t paths = 0;
  std::size_t samples = 0;     // (path, time, node) triples compared
  std::size_t violations = 0;  // lower - upper > eps among them
  double violation_fraction = 0.0;
  double worst_gap = 0.0;  // max over samples of (lower - upper)
  double eps = 0.0;
  std::vector<double> per_path_worst;  // max (lower - upper) per path
};

/// Couples `paths` realisations of the two configurations through the same
/// noise record and boundary path and counts order violations beyond eps.
/// Preconditions (G_lower <= G_upper sampled on [-50, 50], ordered initial
/// states, identical H / kappa / boundary / discretisation) are verified
/// and violations throw HypothesisError; `check_preconditions = false`
/// bypasses the verification for negative controls.
ComparisonReport comparison_test(const SolveConfig& lower,
                                 const SolveConfig& upper, std::size_t paths,
                                 double eps = 1e-8,
                                 bool check_preconditions = true);

/// Outcome of the positivity-preservation experiment.
struct PositivityReport {
  std::size_t paths = 0;
  std::size_t samples = 0;  // (path, time, node) triples
  double dt = 0.0;
  double min_value = 0.0;               // most negative value observed
  std::vector<double> thresholds;       // multiples of sqrt(dt)
  std::vector<double> fractions;        // fraction of samples below -threshold
  // 99th percentile of negative excursion depths, measured on the threshold
  // scale (multiples of sqrt(dt)); stays O(1) across a dt ladder when the
  // scheme crosses zero by O(sqrt(dt)).
  double p99_excursion = 0.0;
  std::size_t negative_samples = 0;
};

/// Runs `paths` realisations (clamping must be off) and tabulates the
/// negative excursions against a ladder of sqrt(dt) multiples
/// (default {1, 3, 10, 30}). Preconditions of the preservation statement
/// (G(0) = H(0) = 0, mu identically 0, Y0 >= 0) are enforced and throw
/// HypothesisError when violated.
PositivityReport positivity_test(const SolveConfig& cfg, std::size_t paths,
                                 std::span<const double> ladder = {});

/// Outcome of the repeated-coupling uniqueness experiment.
struct UniquenessReport {
  std::size_t replays = 0;
  std::vector<double> distances;  // per replay: sup |limit_a - limit_b|
  double max_distance = 0.0;
  double negative_control_distance = 0.0;  // different noise, same start
  std::size_t max_iterations = 0;
  bool all_converged = false;
  double tol = 0.0;
};

/// For each replay r, draws a fresh noise record (stream 2r, boundary
/// stream 2r + 1), solves the fixed-point formulation by Picard iteration
/// from two different constant starts and records the sup distance between
/// the limits. The negative control re-solves replay 0's problem under
/// replay 1's noise and reports the distance between the limits, which
/// should be macroscopic.
UniquenessReport uniqueness_coupling_test(const SolveConfig& cfg,
                                          std::size_t replays,
                                          double start_a = 0.0,
                                          double start_b = 1.0,
                                          double tol = 1e-8,
                                          bool run_negative_control = true);

}  // namespace shel
