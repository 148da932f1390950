#pragma once

// Frequency-domain models of SAW transducers, Bragg mirrors, delay lines and
// one-port resonators.
//
// Conventions:
//   * kappa_* are linewidth contributions in Hz (full width), so the loaded
//     resonance has FWHM kappa_int + kappa_ext and Q = f0 / kappa.
//   * Reflection is normalised to S11 -> 1 far from resonance; the resonance
//     appears as a dip.
//   * Electrical crosstalk is a frequency-independent complex phasor added to
//     the S-parameter.

#include <complex>
#include <limits>
#include <span>
#include <vector>

#include "sawlab/core.hpp"
#include "sawlab/trace.hpp"

namespace sawlab::acoustic {

using cplx = std::complex<double>;

struct IdtSpec {
  double center_frequency = 3.5e9;  // Hz
  int n_pairs = 100;
  double peak_conversion = 0.5;     // amplitude, <= 1
  double k2 = 7.0e-4;               // coupling at which peak_conversion was specified

  void validate() const;
};

struct MirrorSpec {
  int n_lines = 400;
  double reflectivity_per_line = 0.01;
  double stopband_center = 3.5e9;  // Hz
  double stopband_width = 60e6;    // Hz

  void validate() const;
};

struct ResonatorParams {
  double f0 = 3.5e9;         // Hz
  double kappa_int = 125e3;  // Hz
  double kappa_ext = 125e3;  // Hz
  cplx crosstalk{0.0, 0.0};

  double kappa_total() const noexcept { return kappa_int + kappa_ext; }
  void validate() const;
};

struct DelayLineSpec {
  IdtSpec idt_a;
  IdtSpec idt_b;
  double gap = 400e-6;            // m
  double loss_per_length = 0.0;   // 1/m, amplitude
  cplx crosstalk{0.0, 0.0};

  void validate() const;
};

struct QFactors {
  double q_int;
  double q_ext;  // +inf when kappa_ext == 0
  double q_loaded;
};

// Maximum |f - f0| / f0 accepted by the single-mode resonator model.
inline constexpr double kResonatorBandFraction = 0.1;

// sinc-envelope transducer: peak * sinc(N*pi*(f-f0)/f0) * exp(-i*pi*N*f/f0).
// The phase term is the delay to the transducer centre.
cplx idt_response(double f_hz, const IdtSpec& s);

// Same transducer with its coupling rescaled: amplitude goes as sqrt(k2).
IdtSpec with_coupling(const IdtSpec& s, double k2_new);

// Grating reflection: tanh(N*r) inside the stopband, raised-cosine rolloff over
// a further half stopband width on each side, zero beyond. Real-valued.
cplx mirror_reflectivity(double f_hz, const MirrorSpec& s);

// One-port resonator reflection:
//   S11 = 1 - kappa_ext / (i (f - f0) + kappa_total / 2) + crosstalk.
cplx s11_resonator(double f_hz, const ResonatorParams& p);

// Two-transducer cascade plus crosstalk. v is the SAW phase velocity.
cplx s21_delay_line(double f_hz, const DelayLineSpec& d, const MaterialParams& material);

// Input reflection of a delay line: the power converted by transducer A
// leaves the electrical port, |S11|^2 = 1 - |H_a|^2.
cplx s11_delay_line(double f_hz, const DelayLineSpec& d);

QFactors q_factors(const ResonatorParams& p);

// Sum of per-length amplitude loss terms (1/m). Each term must be >= 0.
double total_propagation_loss(std::span<const double> contributions);

// Temporal loss rate (Hz) to a per-length term (1/m): rate / v.
double rate_to_per_length(double rate_hz, const MaterialParams& material);

// Trace builders over caller-supplied grids.
SParamTrace s11_resonator_trace(std::span<const double> f_hz, const ResonatorParams& p);
SParamTrace s21_delay_line_trace(std::span<const double> f_hz, const DelayLineSpec& d,
                                 const MaterialParams& material);
SParamTrace s11_delay_line_trace(std::span<const double> f_hz, const DelayLineSpec& d);

}  // namespace sawlab::acoustic
