#include <benchmark/benchmark.h>

#include <vector>

#include "gbpf/field.hpp"
#include "gbpf/presets.hpp"
#include "gbpf/stats.hpp"

namespace {

void BM_SimulateField(benchmark::State& state) {
  const std::int64_t side = state.range(0);
  const auto spec = gbpf::preset("gauss-field-6.3").field->with_extents({side, side});
  const auto tables = gbpf::field_gap_tables(spec);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(gbpf::simulate_field(spec, tables, ++seed, {1}));
  state.SetItemsProcessed(state.iterations() * side * side);
}
BENCHMARK(BM_SimulateField)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_FieldCorrelogram(benchmark::State& state) {
  const auto spec = gbpf::preset("gauss-field-6.3").field->with_extents({200, 200});
  const auto sample = gbpf::simulate_field(spec, 5, {1});
  const std::vector<std::int64_t> window{state.range(0), state.range(0)};
  for (auto _ : state) benchmark::DoNotOptimize(gbpf::field_correlogram(sample, window));
}
BENCHMARK(BM_FieldCorrelogram)->Arg(5)->Arg(25)->Unit(benchmark::kMillisecond);

void BM_FieldCovariance(benchmark::State& state) {
  const auto spec = gbpf::preset("gauss-field-6.3").field;
  const std::vector<std::int64_t> lag{2, 3};
  for (auto _ : state) benchmark::DoNotOptimize(gbpf::theoretical_field_cov(*spec, lag));
}
BENCHMARK(BM_FieldCovariance);

void BM_FieldCovOracle(benchmark::State& state) {
  const auto spec = gbpf::preset("gauss-field-6.3").field;
  const std::vector<std::int64_t> lag{2, 3};
  for (auto _ : state) benchmark::DoNotOptimize(gbpf::field_cov_oracle(*spec, lag));
}
BENCHMARK(BM_FieldCovOracle);

}  // namespace
