// Micro benchmarks for the numerical kernels.
#include <benchmark/benchmark.h>

#include "sawlab/acoustic.hpp"
#include "sawlab/bessel.hpp"
#include "sawlab/estimate.hpp"
#include "sawlab/layer.hpp"
#include "sawlab/qd.hpp"

using namespace sawlab;

namespace {

void BM_BesselAll(benchmark::State& state) {
  const double x = static_cast<double>(state.range(0)) / 10.0;
  for (auto _ : state) benchmark::DoNotOptimize(qd::bessel_j_all(qd::kBesselMaxOrder, x));
}
BENCHMARK(BM_BesselAll)->Arg(1)->Arg(10)->Arg(50);

void BM_K2Effective(benchmark::State& state) {
  const auto cal = layer::default_k2_calibration(7e-4);
  double d = 60e-9;
  for (auto _ : state) {
    benchmark::DoNotOptimize(layer::k2_effective(d, cal));
    d = d > 490e-9 ? 60e-9 : d + 1e-9;
  }
}
BENCHMARK(BM_K2Effective);

void BM_FitS11(benchmark::State& state) {
  const acoustic::ResonatorParams p{3.5e9, 125e3, 105e3, {0.0, 0.0}};
  const auto f = linspace(3.5e9 - 2e6, 3.5e9 + 2e6, static_cast<std::size_t>(state.range(0)));
  const auto clean = acoustic::s11_resonator_trace(f, p);
  const auto noisy = estimate::synthesize(clean, estimate::NoiseSpec{estimate::NoiseKind::gaussian_additive,
                                                                     0.03, estimate::derive_seed(1, 0)});
  for (auto _ : state) benchmark::DoNotOptimize(estimate::fit_s11(noisy));
}
BENCHMARK(BM_FitS11)->Arg(401)->Arg(2001)->Unit(benchmark::kMillisecond);

void BM_ExtractModulationIndex(benchmark::State& state) {
  const double omega = 3.53388e9, lw = 643.6e6;
  const qd::FilterSpec filt{600e6, -12e9, 12e9, 401};
  const auto comb = qd::sideband_comb(0.0, lw, 1.0, omega, 10, 1.0);
  const auto spectrum = qd::filtered_spectrum(comb, filt).trace;
  for (auto _ : state) benchmark::DoNotOptimize(estimate::extract_modulation_index(spectrum, omega, filt, lw));
}
BENCHMARK(BM_ExtractModulationIndex)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
