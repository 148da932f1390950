#pragma once

// Optical forward models for a gated quantum dot: charge plateaus, Stark
// tuning, Lorentzian emission, SAW phase-modulation sidebands and the
// Fabry-Perot filter the spectra are recorded through.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sawlab/acoustic.hpp"
#include "sawlab/trace.hpp"

namespace sawlab::qd {

// Half-open bias interval [v_min, v_max) with a fixed net charge.
struct Plateau {
  double v_min;             // V
  double v_max;             // V
  double frequency_offset;  // Hz, added to the base frequency

  bool contains(double bias) const noexcept { return bias >= v_min && bias < v_max; }
};

struct EmitterState {
  double base_frequency = 326.0e12;  // Hz, optical
  double linewidth_fwhm = 643.6e6;   // Hz
  double stark_slope = 0.13e12;      // Hz/V  (0.13 GHz/mV)
  std::vector<Plateau> plateaus;
  double brightness = 1.0;           // integrated counts scale

  void validate() const;
};

struct ModulationDrive {
  double drive_frequency = 3.53388e9;  // Hz
  acoustic::ResonatorParams mode;
  double delta_max = 1.0;

  void validate() const;
};

struct FilterSpec {
  double fwhm = 600e6;  // Hz
  double scan_min = 0;  // Hz
  double scan_max = 0;  // Hz
  std::size_t n_points = 2;

  void validate() const;
  std::vector<double> grid() const;
};

// Unit-area Lorentzian with full width `fwhm`; fwhm == 0 is not allowed here.
double lorentzian_density(double x, double center, double fwhm);

// Index of the plateau containing `bias`, or nullopt when the dot is dark.
std::optional<std::size_t> charge_state(double bias, const EmitterState& e);

// base + offset + slope * (bias - v_min); nullopt when the dot is dark.
std::optional<double> emission_frequency(double bias, const EmitterState& e);

// delta(f) = delta_max / sqrt(1 + (2 (f - f0) / kappa_total)^2), evaluated at
// drive.drive_frequency, so delta^2 traces a Lorentzian of FWHM kappa_total.
double modulation_index(const ModulationDrive& drive);

// Uncalibrated linear-in-amplitude hook: delta = coefficient * sqrt(P).
double delta_for_drive_power(double power_w, double delta_per_sqrt_watt);

struct SpectralLine {
  double center;  // Hz
  double weight;  // J_n(delta)^2
  int order;
};

// Phase-modulated emission line: Lorentzians of equal width on a comb.
struct LineSpectrum {
  std::vector<SpectralLine> lines;
  double linewidth = 0.0;   // Hz FWHM; 0 means delta-like lines
  double brightness = 1.0;
  int n_max = 0;            // truncation actually used
  bool n_max_expanded = false;
  double total_weight = 0.0;

  // Counts density at x (requires linewidth > 0).
  double density(double x) const;
  // brightness * total_weight.
  double integrated_intensity() const noexcept { return brightness * total_weight; }
  Trace sample(std::span<const double> x) const;
};

// Residual sideband weight above which the truncation order is widened.
inline constexpr double kSidebandResidualTolerance = 1e-6;

// Comb of lines at center + n * omega_m, n in [-N, N], weights J_n(delta)^2.
// N starts at n_max and grows until 1 - sum < 1e-6.
LineSpectrum sideband_comb(double center, double linewidth, double delta, double omega_m, int n_max,
                           double brightness = 1.0);

// sideband_comb sampled on `grid`; the provenance string records N and the
// total weight.
Trace sideband_spectrum(double center, double linewidth, double delta, double omega_m, int n_max,
                        std::span<const double> grid, double brightness = 1.0);

struct FilteredSpectrum {
  Trace trace;
  bool padding_warning = false;  // ideal support closer than 5 FWHM to a scan edge
  double counts_in = 0.0;        // integral of the ideal spectrum
  double counts_out = 0.0;       // integral over the scan plus kernel mass outside it
};

// Numerical convolution of a sampled spectrum with the filter. The ideal
// trace is treated as piecewise linear and integrated exactly against the
// Lorentzian kernel, so narrow filters reproduce the input.
FilteredSpectrum filtered_spectrum(const Trace& ideal, const FilterSpec& filt);

// Closed form for Lorentzian lines: widths add under convolution.
FilteredSpectrum filtered_spectrum(const LineSpectrum& ideal, const FilterSpec& filt);

// Filtered comb density at detuned frequency x: lines broadened to
// linewidth + filter fwhm.
double filtered_comb_density(const LineSpectrum& ideal, double filter_fwhm, double x);

struct BiasMap {
  std::vector<double> bias;                  // V, one row per bias
  std::vector<double> frequency;             // Hz, filter positions
  std::vector<std::vector<double>> counts;   // counts[row][column]
  std::vector<std::optional<std::size_t>> row_plateau;
  std::vector<Plateau> plateaus;
  double stark_slope = 0.0;                  // Hz/V used to build the map
};

// One filtered spectrum per bias; rows outside every plateau are zero. The
// whole comb shifts rigidly with the Stark-tuned emission frequency.
BiasMap pl_bias_map(std::span<const double> bias_grid, const EmitterState& e,
                    const std::optional<ModulationDrive>& drive, const FilterSpec& filt);

}  // namespace sawlab::qd
