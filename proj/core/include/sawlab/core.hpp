#pragma once

// Device description types and SAW kinematics shared by every module.
//
// All frequencies are plain cycles/s (Hz). Angular quantities are computed
// where they are needed and never stored.

namespace sawlab {

inline constexpr double kPi = 3.14159265358979323846;

// Substrate constants.
struct MaterialParams {
  double saw_velocity = 2864.0;  // m/s, GaAs [110] on (001)
  double k2_bulk = 7.0e-4;       // electromechanical coupling of insulating GaAs
  double sigma_m = 10.0;         // S/m, crossover conductivity of the relaxation model

  // Throws DomainError when an invariant is violated.
  void validate() const;
};

// The buried n-doped layer that serves as the back gate.
struct LayerStack {
  double depth = 360e-9;      // m, top of the layer below the surface
  double thickness = 47e-9;   // m
  double sigma_xx = 1.0e5;    // S/m, sheet conductivity measured at 1.7 K

  void validate() const;
};

// SAW wavelength v/f in metres.
double saw_wavelength(double frequency_hz, const MaterialParams& material);

// SAW wavevector 2*pi*f/v in rad/m.
double wavevector(double frequency_hz, const MaterialParams& material);

}  // namespace sawlab
