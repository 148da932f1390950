#pragma once

// Device description loaded from a YAML file. Every key is optional and
// falls back to the defaults below; unknown keys are rejected so typos do
// not silently revert to a default. Units are SI unless the key name says
// otherwise (`_nm`, `_um`).

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sawlab/acoustic.hpp"
#include "sawlab/core.hpp"
#include "sawlab/layer.hpp"
#include "sawlab/qd.hpp"

namespace sawlab {

struct LayerSweepConfig {
  double sigma_min = 1e-2;       // S/m
  double sigma_max = 1e8;        // S/m
  std::size_t sigma_points = 201;
  double frequency = 3.5e9;      // Hz, rate evaluation frequency
  double depth_min = 20e-9;      // m
  double depth_max = 700e-9;     // m
  std::size_t depth_points = 69;
};

struct ResonatorConfig {
  acoustic::ResonatorParams params{3.5e9, 125e3, 110e3, {0.0, 0.0}};
  double span_factor = 5.0;      // scan f0 +- span_factor * kappa_total
  std::size_t n_points = 801;
};

struct DelayLineConfig {
  acoustic::IdtSpec idt;
  std::vector<double> gaps{200e-6, 400e-6, 600e-6, 800e-6, 1000e-6};  // m
  double bulk_loss_hz = 100e3;   // energy decay rate of the undoped substrate
  double layer_loss_hz = 0.0;    // extra rate from a conducting layer
  acoustic::cplx crosstalk{0.02, 0.0};
  double span = 40e6;            // Hz, scan width around the IDT centre
  std::size_t n_points = 401;
  std::size_t trials = 1000;     // Monte-Carlo trials for slope comparison
};

struct SweepConfig {
  double half_width_factor = 3.0;  // drive f0 +- factor * kappa_total
  std::size_t n_points = 41;
};

struct SpectrometerConfig {
  double half_span = 14e9;       // Hz, filter scan around the base frequency
  std::size_t n_points = 561;
};

struct BiasSweepConfig {
  double v_min = -0.02;          // V
  double v_max = 0.05;           // V
  std::size_t n_points = 141;
};

struct DeviceConfig {
  std::filesystem::path source;  // empty for built-in defaults
  std::uint64_t seed = 20240601;
  double snr_db = 30.0;
  MaterialParams material;
  LayerStack layer;
  layer::K2Calibration k2_calibration = layer::default_k2_calibration(7.0e-4);
  LayerSweepConfig layer_sweep;
  acoustic::MirrorSpec mirror;
  ResonatorConfig resonator;
  DelayLineConfig delay_line;
  qd::EmitterState emitter;
  qd::ModulationDrive drive;
  SweepConfig drive_sweep;
  double filter_fwhm = 600e6;    // Hz
  SpectrometerConfig spectrometer;
  BiasSweepConfig bias_sweep;

  // Calls every section's validate(); throws ConfigError.
  void validate() const;
};

// Built-in defaults (three-plateau emitter, critical-ish resonator).
DeviceConfig default_config();

// Throws ConfigError("path:line:col: section.key: message") on malformed
// YAML, unknown keys, wrong types or values failing validation.
DeviceConfig load_config(const std::filesystem::path& path);
DeviceConfig parse_config(const std::string& yaml_text, const std::string& source_name = "<string>");

}  // namespace sawlab
