#include <benchmark/benchmark.h>

#include "gbpf/covariance.hpp"
#include "gbpf/gbp.hpp"
#include "gbpf/random.hpp"

namespace {

using gbpf::CovarianceFunction;
using gbpf::GbpModel;

GbpModel lrd_model() { return GbpModel::checked(0.3, CovarianceFunction::power_law(0.12, 0.7)); }

// The recursion is quadratic in the table length.
void BM_BuildGapTables(benchmark::State& state) {
  const auto model = lrd_model();
  for (auto _ : state) benchmark::DoNotOptimize(gbpf::build_gap_tables(model, state.range(0)));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_BuildGapTables)->RangeMultiplier(4)->Range(1 << 8, 1 << 14)->Complexity(benchmark::oNSquared)
    ->Unit(benchmark::kMillisecond);

void BM_SamplePath(benchmark::State& state) {
  const auto tables = gbpf::build_gap_tables(lrd_model(), state.range(0));
  gbpf::RandomStream rng(1);
  for (auto _ : state) benchmark::DoNotOptimize(gbpf::sample_path(tables, state.range(0), rng));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SamplePath)->Arg(1 << 12)->Arg(1 << 15)->Unit(benchmark::kMicrosecond);

void BM_VerifyWellDefined(benchmark::State& state) {
  const auto model = lrd_model();
  for (auto _ : state) benchmark::DoNotOptimize(gbpf::verify_well_defined(model, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_VerifyWellDefined)->DenseRange(6, 10, 2)->Unit(benchmark::kMillisecond);

void BM_CheckAssumption(benchmark::State& state) {
  const auto cov = CovarianceFunction::power_law(0.12, 0.7);
  for (auto _ : state) benchmark::DoNotOptimize(gbpf::check_assumption(cov, 0.3));
}
BENCHMARK(BM_CheckAssumption);

}  // namespace
