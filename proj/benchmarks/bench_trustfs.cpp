#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "trustfs/dataset.hpp"
#include "trustfs/graph.hpp"
#include "trustfs/solver.hpp"
#include "trustfs/tensor.hpp"

namespace {

using namespace trustfs;

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = dist(rng);
  return m;
}

MultiViewDataset bench_data(Eigen::Index n) {
  SyntheticSpec spec{{20, 20, 20}, n, 3, 5, 0.05, 7};
  return inject_missing(normalize_views(synth_generate(spec).dataset), 0.3, 7);
}

void BM_KhatriRao(benchmark::State& state) {
  const auto rows = state.range(0);
  const Matrix a = random_matrix(rows, 8, 1), b = random_matrix(rows, 8, 2);
  for (auto _ : state) benchmark::DoNotOptimize(khatri_rao(a, b));
}
BENCHMARK(BM_KhatriRao)->Arg(16)->Arg(64)->Arg(256);

void BM_ProjectSimplex(benchmark::State& state) {
  const Matrix q = random_matrix(state.range(0), 1, 3);
  const Vector col = q.col(0);
  for (auto _ : state) benchmark::DoNotOptimize(project_simplex_zero(col, 0));
}
BENCHMARK(BM_ProjectSimplex)->Arg(60)->Arg(200)->Arg(800);

void BM_Objective(benchmark::State& state) {
  const MultiViewDataset data = bench_data(state.range(0));
  Hyperparams hp;
  hp.c = 3;
  const ModelState s = initialize(data, hp);
  for (auto _ : state) benchmark::DoNotOptimize(objective(s, hp));
}
BENCHMARK(BM_Objective)->Arg(60)->Arg(200);

// Ten alternating iterations per pass, initialization included.
void BM_FitIterations(benchmark::State& state) {
  const MultiViewDataset data = bench_data(state.range(0));
  Hyperparams hp;
  hp.c = 3;
  hp.max_iter = 10;
  hp.tol = 0.0;
  for (auto _ : state) benchmark::DoNotOptimize(fit(data, hp));
  state.SetItemsProcessed(state.iterations() * hp.max_iter);
}
BENCHMARK(BM_FitIterations)->Arg(60)->Arg(200)->Arg(400)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
