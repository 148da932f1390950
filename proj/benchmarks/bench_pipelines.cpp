// End-to-end pipeline benchmarks.
#include <benchmark/benchmark.h>

#include "sawlab/cli/pipelines.hpp"
#include "sawlab/config.hpp"

using namespace sawlab;

namespace {

void BM_BiasMap(benchmark::State& state) {
  const auto cfg = default_config();
  const auto drive = cli::drive_at(cfg, std::nullopt);
  for (auto _ : state) benchmark::DoNotOptimize(cli::run_bias_map(cfg, drive, cfg.seed, 30.0, true));
}
BENCHMARK(BM_BiasMap)->Unit(benchmark::kMillisecond);

void BM_CompareSubstrates(benchmark::State& state) {
  const auto cfg = default_config();
  const double loss = cli::doped_layer_loss_hz(cfg);
  const auto trials = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(cli::compare_substrates(cfg, loss, trials, cfg.seed, 30.0));
}
BENCHMARK(BM_CompareSubstrates)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_DriveSweep(benchmark::State& state) {
  const auto cfg = default_config();
  const double bias = cli::default_sweep_bias(cfg);
  for (auto _ : state) benchmark::DoNotOptimize(cli::run_drive_sweep(cfg, bias, cfg.seed, 30.0));
}
BENCHMARK(BM_DriveSweep)->Unit(benchmark::kMillisecond);

}  // namespace
