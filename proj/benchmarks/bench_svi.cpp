#include <benchmark/benchmark.h>

#include "irtgrid/response.hpp"
#include "irtgrid/svi.hpp"
#include "irtgrid/synthetic.hpp"

using namespace irtgrid;

namespace {

ResponseMatrix dense_matrix(std::size_t n_models, std::size_t n_items) {
  const auto data = generate_synthetic(n_models, n_items, CurveVariant::OnePL, {}, 1.0, 99);
  return build_matrix(data.records).matrix;
}

}  // namespace

static void BM_fit_1pl_dense(benchmark::State& state) {
  const auto matrix = dense_matrix(static_cast<std::size_t>(state.range(0)),
                                   static_cast<std::size_t>(state.range(1)));
  FitConfig config;
  config.epochs = 50;
  config.patience = 50;
  config.seed = 1;
  for (auto _ : state) {
    auto result = fit(matrix, {}, config);
    benchmark::DoNotOptimize(result.final_elbo());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * 50 *
                          static_cast<std::int64_t>(matrix.observations.size()));
}
BENCHMARK(BM_fit_1pl_dense)
    ->Unit(benchmark::kMillisecond)
    ->Args({50, 100})
    ->Args({100, 200})
    ->Args({200, 400});

static void BM_elbo_eval(benchmark::State& state) {
  const auto matrix = dense_matrix(100, 200);
  VariationalState var;
  var.theta.assign(matrix.model_count(), {0.0, 1.0});
  var.beta.assign(matrix.item_count(), {0.0, 1.0});
  for (auto _ : state) {
    benchmark::DoNotOptimize(elbo(var, {}, matrix, 4, 7));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * 4 *
                          static_cast<std::int64_t>(matrix.observations.size()));
}
BENCHMARK(BM_elbo_eval)->Unit(benchmark::kMillisecond);

static void BM_generate_synthetic(benchmark::State& state) {
  for (auto _ : state) {
    auto data = generate_synthetic(200, 400, CurveVariant::OnePL, {}, 0.5, 3);
    benchmark::DoNotOptimize(data.records.size());
  }
}
BENCHMARK(BM_generate_synthetic)->Unit(benchmark::kMillisecond);
