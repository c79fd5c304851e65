// Microbenchmarks for the pairwise cost terms and the spline primitives.

#include <benchmark/benchmark.h>

#include <random>

#include "l2ot/cost.hpp"
#include "l2ot/rng.hpp"
#include "l2ot/tps.hpp"

namespace {

Eigen::MatrixXd random_points(std::mt19937_64& rng, Eigen::Index n, int d) {
  Eigen::MatrixXd pts(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int c = 0; c < d; ++c) pts(i, c) = l2ot::uniform_unit(rng);
  }
  return pts;
}

l2ot::TpsTransform grid_transform(int d, int per_axis) {
  l2ot::TpsTransform t = l2ot::TpsTransform::identity(d);
  t.controls = l2ot::grid_controls(d, per_axis);
  t.weights = Eigen::MatrixXd::Zero(t.controls.rows(), d);
  return t;
}

void BM_TermT2(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const l2ot::PointCloud target{random_points(rng, n, 3)};
  const l2ot::PointCloud moved{random_points(rng, n, 3)};
  l2ot::CostConfig cfg;
  cfg.mode = l2ot::CostMode::LegacyWeights;
  for (auto _ : state) {
    benchmark::DoNotOptimize(l2ot::term_T2(target, moved, cfg));
  }
  state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(BM_TermT2)->Arg(100)->Arg(500)->Arg(2000);

void BM_FullCostGradient(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const l2ot::PointCloud target{random_points(rng, n, 3)};
  const l2ot::PointCloud source{random_points(rng, n, 3)};
  const l2ot::TpsTransform t = grid_transform(3, 5);
  l2ot::CostConfig cfg;
  l2ot::PenaltyParams pen;
  for (auto _ : state) {
    benchmark::DoNotOptimize(l2ot::full_cost(target, source, nullptr, t, cfg, pen, true));
  }
  state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(BM_FullCostGradient)->Arg(100)->Arg(500)->Arg(1000);

void BM_TpsApply(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const Eigen::MatrixXd pts = random_points(rng, n, 3);
  const l2ot::TpsTransform t = grid_transform(3, 5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(t.apply_rows(pts));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_TpsApply)->Arg(1000)->Arg(10000);

void BM_TpsFitLandmarks(benchmark::State& state) {
  std::mt19937_64 rng(4);
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const Eigen::MatrixXd sources = random_points(rng, n, 3);
  const Eigen::MatrixXd targets = sources + 0.1 * random_points(rng, n, 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(l2ot::tps_fit_landmarks(sources, targets));
  }
}
BENCHMARK(BM_TpsFitLandmarks)->Arg(50)->Arg(200);

}  // namespace

BENCHMARK_MAIN();
