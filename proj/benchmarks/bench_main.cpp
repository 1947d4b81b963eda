// Microbenchmarks for the hot paths: kernel table construction, pointwise
// kernel evaluation, covariance factorization, noise sampling, and one
// full solver step (via a single-step run_path call).

#include <benchmark/benchmark.h>

#include "shel/analysis.hpp"
#include "shel/csv.hpp"

using namespace shel;

namespace {

void BM_KernelTableBuild(benchmark::State& state) {
  const Grid grid = Grid::uniform(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    KernelTable table = build_kernel_table(BoundaryKind::C1, grid, 1e-3);
    benchmark::DoNotOptimize(table.matrix.data());
  }
}
BENCHMARK(BM_KernelTableBuild)->Arg(64)->Arg(128)->Arg(256);

void BM_ImageKernelEval(benchmark::State& state) {
  double x = 0.3, y = 0.7, acc = 0.0;
  for (auto _ : state) {
    acc += image_kernel(BoundaryKind::C3, 0.01, x, y);
    benchmark::DoNotOptimize(acc);
  }
}
BENCHMARK(BM_ImageKernelEval);

void BM_CovFactorBuild(benchmark::State& state) {
  const Grid grid = Grid::uniform(static_cast<std::size_t>(state.range(0)));
  const CovKernel kernel = exponential_kernel(0.2);
  for (auto _ : state) {
    CovFactor factor = build_cov_factor(kernel, grid);
    benchmark::DoNotOptimize(factor.factor.data());
  }
}
BENCHMARK(BM_CovFactorBuild)->Arg(64)->Arg(128)->Arg(256);

void BM_NoiseSample(benchmark::State& state) {
  const Grid grid = Grid::uniform(static_cast<std::size_t>(state.range(0)));
  const CovFactor factor = build_cov_factor(exponential_kernel(0.2), grid);
  NormalStream rng({1234, 0});
  for (auto _ : state) {
    NoiseIncrement inc = sample_increment(factor, 1e-3, rng);
    benchmark::DoNotOptimize(inc.values.data());
  }
}
BENCHMARK(BM_NoiseSample)->Arg(64)->Arg(256);

SolveConfig step_config(std::size_t grid_n, std::size_t n_steps) {
  SolveConfig cfg;
  cfg.kind = BoundaryKind::C2;
  cfg.grid_n = grid_n;
  cfg.time = TimeGrid{0.0, 1e-3, n_steps};
  cfg.seed = SeedSpec{99, 0};
  cfg.kappa = exponential_kernel(0.2);
  cfg.coeffs = make_coefficients("linear", -1.0, "linear", 0.0, 0.5);
  cfg.initial.kind = "constant";
  cfg.initial.a = 0.5;
  return cfg;
}

void BM_SolverStep(benchmark::State& state) {
  const SolveConfig cfg = step_config(static_cast<std::size_t>(state.range(0)), 1);
  const StepContext ctx = make_step_context(cfg);
  const BoundaryPath path =
      generate_boundary(cfg.boundary, cfg.time, {cfg.seed.master, 1});
  std::uint64_t stream = 0;
  for (auto _ : state) {
    run_path(cfg, ctx, path, {cfg.seed.master, 2 * stream++},
             [](std::size_t, double, const Field&) {});
  }
}
BENCHMARK(BM_SolverStep)->Arg(64)->Arg(128)->Arg(256);

void BM_TrajectoryCsv(benchmark::State& state) {
  const SolveConfig cfg = step_config(128, 100);
  const Trajectory traj = simulate(cfg);
  for (auto _ : state) {
    std::string csv = trajectory_csv(traj);
    benchmark::DoNotOptimize(csv.data());
  }
}
BENCHMARK(BM_TrajectoryCsv);

}  // namespace

BENCHMARK_MAIN();
