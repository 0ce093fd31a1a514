#include <benchmark/benchmark.h>

#include "usp/dynsys.hpp"
#include "usp/learners.hpp"
#include "usp/spectral.hpp"

using namespace usp;

static void BM_BuildZ(benchmark::State& state) {
  const auto T = static_cast<std::size_t>(state.range(0));
  const ComplexSector sector(0.1);
  for (auto _ : state) benchmark::DoNotOptimize(build_Z(T, sector));
}
BENCHMARK(BM_BuildZ)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

static void BM_FilterBank(benchmark::State& state) {
  const auto T = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(make_filter_bank(T, ComplexSector(0.1), 24));
}
BENCHMARK(BM_FilterBank)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

namespace {

Trajectory bench_data(Eigen::Index T) {
  SystemConfig cfg;
  cfg.d_hidden = 20;
  const auto sys = sample_system(cfg, 1);
  return simulate_lds(sys, gaussian_inputs(T, 1, 2), 3);
}

}  // namespace

static void BM_RegressionStream(benchmark::State& state) {
  const auto traj = bench_data(2000);
  RegressionConfig cfg;
  cfg.taps = 10;
  for (auto _ : state) {
    auto pred = make_regression_predictor(chebyshev_monic(5), 1, 1, cfg);
    benchmark::DoNotOptimize(run_online(*pred, traj));
  }
  state.SetItemsProcessed(state.iterations() * traj.length());
}
BENCHMARK(BM_RegressionStream)->Unit(benchmark::kMillisecond);

static void BM_SpectralStream(benchmark::State& state) {
  const auto traj = bench_data(1000);
  const auto c = chebyshev_monic(5);
  SpectralConfig cfg;
  cfg.horizon = 1000;
  auto bank = std::make_shared<const FilterBank>(
      make_filter_bank(spectral_filter_horizon(1000, 5), ComplexSector(cfg.beta), cfg.k));
  for (auto _ : state) {
    auto pred = make_spectral_predictor(c, 1, 1, cfg, bank);
    benchmark::DoNotOptimize(run_online(*pred, traj));
  }
  state.SetItemsProcessed(state.iterations() * traj.length());
}
BENCHMARK(BM_SpectralStream)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
