#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "irtgrid/analysis.hpp"
#include "irtgrid/grid.hpp"
#include "irtgrid/rng.hpp"

using namespace irtgrid;

static void BM_spearman(benchmark::State& state) {
  std::mt19937_64 eng(5);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<double> x(n), y(n);
  for (auto& v : x) v = normal(eng);
  for (auto& v : y) v = normal(eng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(spearman(x, y));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(n));
}
BENCHMARK(BM_spearman)->Arg(1000)->Arg(10000)->Arg(100000);

static void BM_bin_by_difficulty(benchmark::State& state) {
  Rng rng(6);
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<std::pair<std::string, double>> difficulties;
  difficulties.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    difficulties.emplace_back("q" + std::to_string(i), rng.normal());
  }
  for (auto _ : state) {
    auto binning = bin_by_difficulty(difficulties, 10);
    benchmark::DoNotOptimize(binning.bin_sizes.size());
  }
}
BENCHMARK(BM_bin_by_difficulty)->Arg(1319)->Arg(12032);

static void BM_simulate_cell_grid(benchmark::State& state) {
  Rng rng(7);
  std::vector<double> pool(100);
  for (auto& theta : pool) theta = rng.normal();
  std::vector<std::pair<std::string, double>> betas;
  for (std::size_t i = 0; i < 100; ++i) {
    betas.emplace_back("q" + std::to_string(i), rng.normal());
  }
  const auto binning = bin_by_difficulty(betas, 10);
  const EffectModel effect{EffectModel::Kind::Locality, 0.5, 1.0};
  for (auto _ : state) {
    auto grid = simulate_experiment(pool, betas, binning, effect, 100, 11);
    benchmark::DoNotOptimize(grid.acc[0][0]);
  }
}
BENCHMARK(BM_simulate_cell_grid)->Unit(benchmark::kMillisecond);
