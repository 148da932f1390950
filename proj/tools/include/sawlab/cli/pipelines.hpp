#pragma once
// Simulation pipelines behind the command-line front end. Each function is
// pure given (config, seed) and returns data; writing files is left to the
// caller.
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sawlab/acoustic.hpp"
#include "sawlab/config.hpp"
#include "sawlab/estimate.hpp"
#include "sawlab/layer.hpp"
#include "sawlab/qd.hpp"
#include "sawlab/trace.hpp"

namespace sawlab::cli {

// nullopt disables synthetic noise.
using Snr = std::optional<double>;

// ------------------------------------------------------------------- layer
struct LayerSweepRow {
  double sigma;         // S/m
  double dv_over_v;
  double kappa_over_q;
  double loss_hz;
  layer::Regime regime;
};

struct DepthSweepRow {
  double depth_nm;
  double k2;
};

layer::RelaxationCoeffs layer_coeffs(const DeviceConfig& cfg);
std::vector<LayerSweepRow> layer_sweep(const DeviceConfig& cfg);
std::vector<DepthSweepRow> depth_sweep(const DeviceConfig& cfg);
// Loss rate (Hz) the configured doped layer adds at the transducer frequency.
double doped_layer_loss_hz(const DeviceConfig& cfg);

std::string layer_sweep_csv(const std::vector<LayerSweepRow>& rows);
std::string depth_sweep_csv(const std::vector<DepthSweepRow>& rows);

// -------------------------------------------------------------- delay line
// Amplitude loss per length (1/m) for a linewidth-like loss rate in Hz:
// energy decays at 2*pi*rate, amplitude at half that.
double loss_rate_to_per_length(double rate_hz, const MaterialParams& material);

struct DelayLineOptions {
  double layer_loss_hz = 0.0;
  // Draw an independent crosstalk phase per gap (device-to-device spread);
  // otherwise the configured phasor is used as is.
  bool random_crosstalk_phase = false;
  bool with_traces = true;
  // Transducer coupling; nullopt keeps the configured value.
  std::optional<double> k2;
};

struct DelayLineRun {
  std::vector<double> gaps;         // m
  std::vector<SParamTrace> s21;     // empty unless with_traces
  std::vector<double> peak_db;      // 10 log10 max |S21|^2
  std::vector<double> err_db;       // crosstalk beating plus noise
};

acoustic::DelayLineSpec delay_line_spec(const DeviceConfig& cfg, double gap, double layer_loss_hz,
                                        acoustic::cplx crosstalk, std::optional<double> k2 = std::nullopt);
std::vector<double> delay_line_grid(const DeviceConfig& cfg);
DelayLineRun run_delay_line(const DeviceConfig& cfg, const DelayLineOptions& opt, std::uint64_t seed,
                            Snr snr);
std::string peak_table_csv(const DelayLineRun& run);

struct SlopeComparisonRun {
  std::size_t trials = 0;
  std::size_t agree = 0;
  double k = 2.0;
  double layer_loss_hz = 0.0;
  // Trial 0, kept for the written report.
  DelayLineRun bulk;
  DelayLineRun doped;
  estimate::FitResult bulk_fit;
  estimate::FitResult doped_fit;
  estimate::SlopeComparison first;
  double agree_fraction() const { return trials ? static_cast<double>(agree) / trials : 0.0; }
};

// Monte-Carlo comparison of loss slopes with and without the doped layer.
// Each trial draws fresh crosstalk phases and noise for both substrates.
SlopeComparisonRun compare_substrates(const DeviceConfig& cfg, double layer_loss_hz, std::size_t trials,
                                      std::uint64_t seed, Snr snr, double k = 2.0);
std::string comparison_json(const SlopeComparisonRun& run);

// --------------------------------------------------------------- resonator
struct ResonatorRun {
  SParamTrace s11;
  estimate::FitResult fit;
};

std::vector<double> resonator_grid(const DeviceConfig& cfg);
// Noise std per quadrature is 10^(-snr/20) of the off-resonance level 1.
SParamTrace resonator_trace(const DeviceConfig& cfg, std::uint64_t seed, Snr snr);
ResonatorRun run_resonator(const DeviceConfig& cfg, std::uint64_t seed, Snr snr);

// ---------------------------------------------------------------- emitter
qd::FilterSpec spectrometer_filter(const DeviceConfig& cfg);
std::vector<double> bias_grid(const DeviceConfig& cfg);
std::optional<qd::ModulationDrive> drive_at(const DeviceConfig& cfg, std::optional<double> drive_frequency);

struct BiasMapRun {
  qd::BiasMap map;
  estimate::StarkSlopeFit stark;
  bool stark_fitted = false;
  std::string stark_error;
};

// Map with Gaussian noise at `snr` against the brightest pixel.
BiasMapRun run_bias_map(const DeviceConfig& cfg, const std::optional<qd::ModulationDrive>& drive,
                        std::uint64_t seed, Snr snr, bool fit);

struct SpectrumRun {
  Trace spectrum;
  bool dark = false;
  bool padding_warning = false;
  std::optional<estimate::FitResult> fit;
  std::string fit_error;
};

// Filtered spectrum at one bias. With the drive off a Lorentzian is fitted;
// with it on the modulation index is extracted.
SpectrumRun run_spectrum(const DeviceConfig& cfg, double bias, const std::optional<qd::ModulationDrive>& drive,
                         std::uint64_t seed, Snr snr);

struct DriveSweepRun {
  double bias = 0.0;
  std::vector<double> drive_hz;
  std::vector<double> delta;
  std::vector<double> delta_sigma;
  Trace delta_sq;           // delta^2 against drive frequency
  estimate::FitResult fit;  // lorentzian plus q_acoustic
  double q() const { return fit.value("q_acoustic"); }
};

// Bias used by the drive sweep when none is given: centre of the first plateau.
double default_sweep_bias(const DeviceConfig& cfg);
DriveSweepRun run_drive_sweep(const DeviceConfig& cfg, double bias, std::uint64_t seed, Snr snr);
std::string drive_sweep_csv(const DriveSweepRun& run);

}  // namespace sawlab::cli
