#include <benchmark/benchmark.h>

#include <random>

#include <omp.h>

#include "pkf/kernels.hpp"
#include "pkf/simulation.hpp"

namespace {

pkf::Matrix random_matrix(pkf::Index n, pkf::Index p) {
  std::mt19937_64 eng(42);
  std::normal_distribution<double> nd;
  pkf::Matrix a(n, p);
  for (pkf::Index j = 0; j < p; ++j)
    for (pkf::Index i = 0; i < n; ++i) a(i, j) = nd(eng);
  return a;
}

void args(benchmark::internal::Benchmark* b) {
  for (long n : {10'000L, 100'000L}) b->Args({n, 100});
  b->Unit(benchmark::kMillisecond);
}

void BM_GramSerial(benchmark::State& state) {
  const pkf::Matrix a = random_matrix(state.range(0), state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(pkf::kernels::serial::gram(a));
}
BENCHMARK(BM_GramSerial)->Apply(args);

void BM_GramParallel(benchmark::State& state) {
  const pkf::Matrix a = random_matrix(state.range(0), state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(pkf::kernels::parallel::gram(a));
}
BENCHMARK(BM_GramParallel)->Apply(args);

void BM_MaxRowNormSerial(benchmark::State& state) {
  const pkf::Matrix a = random_matrix(state.range(0), state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(pkf::kernels::serial::max_row_norm(a));
}
BENCHMARK(BM_MaxRowNormSerial)->Apply(args);

void BM_MaxRowNormParallel(benchmark::State& state) {
  const pkf::Matrix a = random_matrix(state.range(0), state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(pkf::kernels::parallel::max_row_norm(a));
}
BENCHMARK(BM_MaxRowNormParallel)->Apply(args);

pkf::SimConfig sweep_config() {
  pkf::SimConfig cfg;
  cfg.method = pkf::Method::PerturbedEstimate;
  cfg.n_grid = {5000};
  cfg.p = 20;
  cfg.k = 5;
  cfg.trials = 16;
  return cfg;
}

void BM_SweepSerial(benchmark::State& state) {
  const auto cfg = sweep_config();
  for (auto _ : state) benchmark::DoNotOptimize(pkf::run_sweep(cfg, pkf::Execution::Serial));
}
BENCHMARK(BM_SweepSerial)->Unit(benchmark::kMillisecond);

void BM_SweepParallel(benchmark::State& state) {
  auto cfg = sweep_config();
  cfg.threads = omp_get_num_procs();
  for (auto _ : state) benchmark::DoNotOptimize(pkf::run_sweep(cfg, pkf::Execution::Parallel));
}
BENCHMARK(BM_SweepParallel)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
