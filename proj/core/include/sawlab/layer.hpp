#pragma once

// Effects of the buried conductive layer on the SAW.
//
// The relaxation model couples a conducting sheet to the piezoelectric
// potential of the wave. With x = sigma_xx / sigma_m:
//
//   dv/v  = (alpha2 / 2) / (1 + x^2)
//   kappa / q = (alpha2 / 2) * x / (1 + x^2)
//
// Both are dimensionless: a fractional velocity shift and the spatial
// attenuation per unit wavevector. Loss peaks at x = 1 with kappa/q = alpha2/4
// and vanishes in both the dielectric (x -> 0) and metallic (x -> inf) limits.

#include <string_view>
#include <utility>
#include <vector>

#include "sawlab/core.hpp"

namespace sawlab::layer {

struct RelaxationCoeffs {
  double alpha2 = 5.5e-4;  // effective coupling seen by the layer
  double sigma_m = 10.0;   // S/m

  void validate() const;
};

enum class Regime { dielectric, crossover, metallic };

std::string_view to_string(Regime r) noexcept;

// k^2 versus depth of the conductive layer, given as anchor points.
struct K2Anchor {
  double depth;  // m
  double k2;
};

struct K2Calibration {
  std::vector<K2Anchor> anchors;
  double k2_bulk = 7.0e-4;

  // Throws ConfigError: empty list, non-increasing depths, k2 outside
  // (0, k2_bulk], or k2 decreasing with depth.
  void validate() const;
};

// Default curve: 360 nm and >= 500 nm are quantitative; the two shallow points
// only encode that a layer within ~100 nm screens the transducer.
K2Calibration default_k2_calibration(double k2_bulk = 7.0e-4);

double velocity_shift_fraction(double sigma_xx, const RelaxationCoeffs& c);
double attenuation_per_wavevector(double sigma_xx, const RelaxationCoeffs& c);

// Energy decay rate in Hz: (kappa/q) * f.
double attenuation_rate_hz(double sigma_xx, const RelaxationCoeffs& c, double frequency_hz);

// Advisory label: dielectric below sigma_m/10, metallic above 10*sigma_m.
Regime regime_classify(double sigma_xx, const RelaxationCoeffs& c);

// Shape-preserving cubic through the anchors in log-depth; clamps to the
// first anchor above the surface side and to k2_bulk past the last anchor.
double k2_effective(double depth, const K2Calibration& cal);

// Relaxation coefficients for a stack: alpha2 = k2_effective(depth).
RelaxationCoeffs coeffs_for_stack(const LayerStack& stack, const MaterialParams& material,
                                  const K2Calibration& cal);

// Fraction of incident power reflected at a line impedance step.
double cpw_mismatch_reflected_fraction(double z_line, double z_ref);

}  // namespace sawlab::layer
