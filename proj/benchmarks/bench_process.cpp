#include <benchmark/benchmark.h>

#include <vector>

#include "gbpf/marginal.hpp"
#include "gbpf/presets.hpp"
#include "gbpf/process.hpp"
#include "gbpf/random.hpp"
#include "gbpf/stats.hpp"

namespace {

void BM_SimulateProcess(benchmark::State& state) {
  const auto spec = gbpf::preset("gauss-lrd-6.1").process->with_length(state.range(0));
  const auto tables = gbpf::build_gap_tables(spec.gbp(), state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(gbpf::simulate_process(spec, tables, ++seed, {1}));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulateProcess)->Arg(1 << 12)->Arg(1 << 15)->Unit(benchmark::kMillisecond);

// Inversion for intervals against rejection for a Gaussian predicate set.
void BM_RestrictedDraw(benchmark::State& state) {
  const auto spec = gbpf::preset(state.range(0) == 0 ? "exp-lrd-6.1" : "bivariate-gauss-6.2").process;
  const gbpf::RestrictedSampler sampler(spec->marginal(), spec->a());
  gbpf::RandomStream rng(3);
  std::vector<double> out(spec->dimension());
  for (auto _ : state) {
    sampler.draw(rng, out);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_RestrictedDraw)->Arg(0)->Arg(1);

void BM_Autocovariance(benchmark::State& state) {
  const auto spec = gbpf::preset("exp-lrd-6.1").process->with_length(1 << 16);
  const auto path = gbpf::simulate_process(spec, 9, {1});
  for (auto _ : state) benchmark::DoNotOptimize(gbpf::autocovariance(path.values, static_cast<std::size_t>(state.range(0))));
}
BENCHMARK(BM_Autocovariance)->Arg(50)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_JointCf(benchmark::State& state) {
  const auto spec = gbpf::preset("exp-lrd-6.1").process->with_length(64);
  std::vector<std::int64_t> idx;
  std::vector<std::vector<double>> thetas;
  for (std::int64_t i = 0; i < state.range(0); ++i) {
    idx.push_back(2 * i + 1);
    thetas.push_back({0.3});
  }
  for (auto _ : state) benchmark::DoNotOptimize(gbpf::joint_cf(spec, thetas, idx));
}
BENCHMARK(BM_JointCf)->DenseRange(4, 12, 4);

}  // namespace
