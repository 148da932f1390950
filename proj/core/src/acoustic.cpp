#include "sawlab/acoustic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sawlab/errors.hpp"

namespace sawlab::acoustic {

namespace {

void require_positive_frequency(double f) {
  if (!(f > 0.0) || !std::isfinite(f)) throw DomainError("frequency must be positive and finite");
}

double sinc(double x) {
  if (std::abs(x) < 1e-8) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

AxisMeta sparam_meta(const char* name, const char* provenance) {
  return AxisMeta{"frequency", "Hz", name, "", provenance};
}

}  // namespace

void IdtSpec::validate() const {
  if (n_pairs < 1) throw DomainError("IDT n_pairs must be >= 1");
  if (!(peak_conversion > 0.0 && peak_conversion <= 1.0)) {
    throw DomainError("IDT peak_conversion must lie in (0, 1]");
  }
  if (!(center_frequency > 0.0)) throw DomainError("IDT center_frequency must be > 0");
  if (!(k2 > 0.0 && k2 < 1.0)) throw DomainError("IDT k2 must lie in (0, 1)");
}

void MirrorSpec::validate() const {
  if (n_lines < 1) throw DomainError("mirror n_lines must be >= 1");
  if (!(reflectivity_per_line > 0.0 && reflectivity_per_line < 1.0)) {
    throw DomainError("mirror reflectivity_per_line must lie in (0, 1)");
  }
  if (!(stopband_width > 0.0)) throw DomainError("mirror stopband_width must be > 0");
  if (!(stopband_center > 0.0)) throw DomainError("mirror stopband_center must be > 0");
}

void ResonatorParams::validate() const {
  if (!(f0 > 0.0)) throw DomainError("resonator f0 must be > 0");
  if (!(kappa_int > 0.0)) throw DomainError("resonator kappa_int must be > 0");
  if (!(kappa_ext >= 0.0)) throw DomainError("resonator kappa_ext must be >= 0");
}

void DelayLineSpec::validate() const {
  idt_a.validate();
  idt_b.validate();
  if (!(gap > 0.0)) throw DomainError("delay line gap must be > 0");
  if (!(loss_per_length >= 0.0)) throw DomainError("delay line loss_per_length must be >= 0");
}

cplx idt_response(double f_hz, const IdtSpec& s) {
  require_positive_frequency(f_hz);
  s.validate();
  const double n = static_cast<double>(s.n_pairs);
  const double detuning = (f_hz - s.center_frequency) / s.center_frequency;
  const double amplitude = s.peak_conversion * sinc(n * kPi * detuning);
  const double phase = -kPi * n * f_hz / s.center_frequency;
  return std::polar(1.0, phase) * amplitude;
}

IdtSpec with_coupling(const IdtSpec& s, double k2_new) {
  if (!(k2_new > 0.0 && k2_new < 1.0)) throw DomainError("k2 must lie in (0, 1)");
  IdtSpec out = s;
  out.peak_conversion = std::min(1.0, s.peak_conversion * std::sqrt(k2_new / s.k2));
  out.k2 = k2_new;
  return out;
}

cplx mirror_reflectivity(double f_hz, const MirrorSpec& s) {
  require_positive_frequency(f_hz);
  s.validate();
  const double peak = std::min(std::tanh(s.n_lines * s.reflectivity_per_line),
                               std::nextafter(1.0, 0.0));
  const double half = 0.5 * s.stopband_width;
  const double d = std::abs(f_hz - s.stopband_center);
  if (d <= half) return {peak, 0.0};
  if (d >= 2.0 * half) return {0.0, 0.0};
  const double u = (d - half) / half;  // 0 at band edge, 1 at cutoff
  return {peak * 0.5 * (1.0 + std::cos(kPi * u)), 0.0};
}

cplx s11_resonator(double f_hz, const ResonatorParams& p) {
  p.validate();
  if (!(std::abs(f_hz - p.f0) <= kResonatorBandFraction * p.f0)) {
    throw DomainError("frequency " + std::to_string(f_hz) +
                      " Hz lies outside the single-mode simulation band around f0");
  }
  const cplx denom{0.5 * p.kappa_total(), f_hz - p.f0};
  return 1.0 - p.kappa_ext / denom + p.crosstalk;
}

cplx s21_delay_line(double f_hz, const DelayLineSpec& d, const MaterialParams& material) {
  require_positive_frequency(f_hz);
  d.validate();
  const cplx acoustic = idt_response(f_hz, d.idt_a) * idt_response(f_hz, d.idt_b) *
                        std::exp(-d.loss_per_length * d.gap) *
                        std::polar(1.0, 2.0 * kPi * f_hz * d.gap / material.saw_velocity);
  return acoustic + d.crosstalk;
}

cplx s11_delay_line(double f_hz, const DelayLineSpec& d) {
  const double converted = std::norm(idt_response(f_hz, d.idt_a));
  return {std::sqrt(std::max(0.0, 1.0 - converted)), 0.0};
}

QFactors q_factors(const ResonatorParams& p) {
  p.validate();
  return QFactors{
      p.f0 / p.kappa_int,
      p.kappa_ext > 0.0 ? p.f0 / p.kappa_ext : std::numeric_limits<double>::infinity(),
      p.f0 / p.kappa_total(),
  };
}

double total_propagation_loss(std::span<const double> contributions) {
  double total = 0.0;
  for (std::size_t i = 0; i < contributions.size(); ++i) {
    if (!(contributions[i] >= 0.0)) {
      throw DomainError("loss contribution " + std::to_string(i) + " is negative");
    }
    total += contributions[i];
  }
  return total;
}

double rate_to_per_length(double rate_hz, const MaterialParams& material) {
  if (!(rate_hz >= 0.0)) throw DomainError("loss rate must be >= 0");
  material.validate();
  return rate_hz / material.saw_velocity;
}

SParamTrace s11_resonator_trace(std::span<const double> f_hz, const ResonatorParams& p) {
  std::vector<cplx> s(f_hz.size());
  for (std::size_t i = 0; i < f_hz.size(); ++i) s[i] = s11_resonator(f_hz[i], p);
  return SParamTrace({f_hz.begin(), f_hz.end()}, std::move(s), sparam_meta("S11", "model:s11_resonator"));
}

SParamTrace s21_delay_line_trace(std::span<const double> f_hz, const DelayLineSpec& d,
                                 const MaterialParams& material) {
  std::vector<cplx> s(f_hz.size());
  for (std::size_t i = 0; i < f_hz.size(); ++i) s[i] = s21_delay_line(f_hz[i], d, material);
  return SParamTrace({f_hz.begin(), f_hz.end()}, std::move(s), sparam_meta("S21", "model:s21_delay_line"));
}

SParamTrace s11_delay_line_trace(std::span<const double> f_hz, const DelayLineSpec& d) {
  std::vector<cplx> s(f_hz.size());
  for (std::size_t i = 0; i < f_hz.size(); ++i) s[i] = s11_delay_line(f_hz[i], d);
  return SParamTrace({f_hz.begin(), f_hz.end()}, std::move(s), sparam_meta("S11", "model:s11_delay_line"));
}

}  // namespace sawlab::acoustic
