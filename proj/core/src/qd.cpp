#include "sawlab/qd.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "sawlab/bessel.hpp"
#include "sawlab/errors.hpp"
#include "sawlab/parallel.hpp"

namespace sawlab::qd {

namespace {

// Probability mass of a unit-area Lorentzian (center c, FWHM w) inside [a, b].
double lorentzian_mass(double a, double b, double c, double w) {
  return (std::atan(2.0 * (b - c) / w) - std::atan(2.0 * (a - c) / w)) / kPi;
}

std::string format_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

AxisMeta spectrum_meta(std::string provenance) {
  return AxisMeta{"frequency", "Hz", "counts", "arb.", std::move(provenance)};
}

bool support_inside(double lo, double hi, const FilterSpec& filt) {
  return lo >= filt.scan_min + 5.0 * filt.fwhm && hi <= filt.scan_max - 5.0 * filt.fwhm;
}

}  // namespace

void EmitterState::validate() const {
  if (!(linewidth_fwhm > 0.0)) throw DomainError("emitter linewidth_fwhm must be > 0");
  if (!(brightness >= 0.0)) throw DomainError("emitter brightness must be >= 0");
  for (std::size_t i = 0; i < plateaus.size(); ++i) {
    const auto& p = plateaus[i];
    if (!(p.v_max > p.v_min)) {
      throw DomainError("plateau " + std::to_string(i) + " must have v_max > v_min");
    }
    if (i > 0 && p.v_min < plateaus[i - 1].v_max) {
      throw DomainError("plateaus must be sorted by v_min and non-overlapping (plateau " +
                        std::to_string(i) + ")");
    }
  }
}

void ModulationDrive::validate() const {
  if (!(delta_max >= 0.0)) throw DomainError("delta_max must be >= 0");
  if (!(drive_frequency > 0.0)) throw DomainError("drive_frequency must be > 0");
  mode.validate();
}

void FilterSpec::validate() const {
  if (!(fwhm > 0.0)) throw DomainError("filter fwhm must be > 0");
  if (!(scan_max > scan_min)) throw DomainError("filter scan range is degenerate");
  if (n_points < 2) throw DomainError("filter n_points must be >= 2");
}

std::vector<double> FilterSpec::grid() const {
  validate();
  return linspace(scan_min, scan_max, n_points);
}

double lorentzian_density(double x, double center, double fwhm) {
  const double hw = 0.5 * fwhm;
  const double d = x - center;
  return hw / (kPi * (d * d + hw * hw));
}

std::optional<std::size_t> charge_state(double bias, const EmitterState& e) {
  for (std::size_t i = 0; i < e.plateaus.size(); ++i) {
    if (e.plateaus[i].contains(bias)) return i;
  }
  return std::nullopt;
}

std::optional<double> emission_frequency(double bias, const EmitterState& e) {
  const auto idx = charge_state(bias, e);
  if (!idx) return std::nullopt;
  const auto& p = e.plateaus[*idx];
  return e.base_frequency + p.frequency_offset + e.stark_slope * (bias - p.v_min);
}

double modulation_index(const ModulationDrive& drive) {
  drive.validate();
  const double u = 2.0 * (drive.drive_frequency - drive.mode.f0) / drive.mode.kappa_total();
  return drive.delta_max / std::sqrt(1.0 + u * u);
}

double delta_for_drive_power(double power_w, double delta_per_sqrt_watt) {
  if (!(power_w >= 0.0)) throw DomainError("drive power must be >= 0");
  return delta_per_sqrt_watt * std::sqrt(power_w);
}

double LineSpectrum::density(double x) const {
  if (!(linewidth > 0.0)) throw DomainError("density of delta-like lines is undefined");
  double acc = 0.0;
  for (const auto& l : lines) acc += l.weight * lorentzian_density(x, l.center, linewidth);
  return brightness * acc;
}

Trace LineSpectrum::sample(std::span<const double> x) const {
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = density(x[i]);
  return Trace({x.begin(), x.end()}, std::move(y),
               spectrum_meta("sideband_spectrum n_max=" + std::to_string(n_max) +
                             " total_weight=" + format_g(total_weight)));
}

LineSpectrum sideband_comb(double center, double linewidth, double delta, double omega_m, int n_max,
                           double brightness) {
  if (n_max < 1) throw DomainError("n_max must be >= 1");
  if (!(delta >= 0.0)) throw DomainError("modulation index must be >= 0");
  if (!(linewidth >= 0.0)) throw DomainError("linewidth must be >= 0");
  if (!(omega_m > 0.0)) throw DomainError("modulation frequency must be > 0");

  const auto j = bessel_j_all(kBesselMaxOrder, delta);
  int n = std::min(n_max, kBesselMaxOrder);
  auto captured = [&](int order) {
    double s = j[0] * j[0];
    for (int k = 1; k <= order; ++k) s += 2.0 * j[static_cast<std::size_t>(k)] * j[static_cast<std::size_t>(k)];
    return s;
  };
  bool expanded = false;
  while (1.0 - captured(n) > kSidebandResidualTolerance && n < kBesselMaxOrder) {
    ++n;
    expanded = true;
  }

  LineSpectrum out;
  out.linewidth = linewidth;
  out.brightness = brightness;
  out.n_max = n;
  out.n_max_expanded = expanded;
  out.lines.reserve(static_cast<std::size_t>(2 * n + 1));
  for (int k = -n; k <= n; ++k) {
    const double jk = j[static_cast<std::size_t>(std::abs(k))];
    out.lines.push_back({center + k * omega_m, jk * jk, k});
  }
  out.total_weight = captured(n);
  return out;
}

Trace sideband_spectrum(double center, double linewidth, double delta, double omega_m, int n_max,
                        std::span<const double> grid, double brightness) {
  return sideband_comb(center, linewidth, delta, omega_m, n_max, brightness).sample(grid);
}

FilteredSpectrum filtered_spectrum(const Trace& ideal, const FilterSpec& filt) {
  filt.validate();
  if (ideal.size() < 2) throw DomainError("ideal spectrum needs at least 2 samples");
  const auto x = ideal.x();
  const auto s = ideal.y();
  const double w = filt.fwhm;
  const double hw = 0.5 * w;
  const auto grid = filt.grid();

  std::vector<double> out(grid.size(), 0.0);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double yj = grid[j];
    double acc = 0.0;
    double t0 = x[0] - yj;
    double a0 = std::atan(t0 / hw);
    double l0 = std::log(t0 * t0 + hw * hw);
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
      const double t1 = x[i + 1] - yj;
      const double a1 = std::atan(t1 / hw);
      const double l1 = std::log(t1 * t1 + hw * hw);
      const double slope = (s[i + 1] - s[i]) / (x[i + 1] - x[i]);
      acc += (s[i] - slope * t0) * (a1 - a0) / kPi + slope * (w / (4.0 * kPi)) * (l1 - l0);
      t0 = t1;
      a0 = a1;
      l0 = l1;
    }
    out[j] = acc;
  }

  FilteredSpectrum r;
  r.counts_in = trapezoid(x, s);
  double outside = 0.0;
  {
    std::vector<double> tail(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      tail[i] = s[i] * (1.0 - lorentzian_mass(filt.scan_min, filt.scan_max, x[i], w));
    }
    outside = trapezoid(x, tail);
  }
  r.counts_out = trapezoid(grid, out) + outside;

  double peak = 0.0;
  for (double v : s) peak = std::max(peak, std::abs(v));
  double lo = x.back(), hi = x.front();
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (std::abs(s[i]) > 1e-3 * peak) {
      lo = std::min(lo, x[i]);
      hi = std::max(hi, x[i]);
    }
  }
  r.padding_warning = peak > 0.0 && !support_inside(lo, hi, filt);

  std::string prov = "filtered_spectrum fwhm=" + format_g(w);
  if (r.padding_warning) prov += " warning=insufficient_padding";
  r.trace = Trace(grid, std::move(out), spectrum_meta(std::move(prov)));
  return r;
}

double filtered_comb_density(const LineSpectrum& ideal, double filter_fwhm, double x) {
  const double width = ideal.linewidth + filter_fwhm;
  double acc = 0.0;
  for (const auto& l : ideal.lines) acc += l.weight * lorentzian_density(x, l.center, width);
  return ideal.brightness * acc;
}

FilteredSpectrum filtered_spectrum(const LineSpectrum& ideal, const FilterSpec& filt) {
  filt.validate();
  const auto grid = filt.grid();
  const double width = ideal.linewidth + filt.fwhm;
  std::vector<double> out(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) out[j] = filtered_comb_density(ideal, filt.fwhm, grid[j]);

  FilteredSpectrum r;
  r.counts_in = ideal.integrated_intensity();
  double outside = 0.0;
  double lo = filt.scan_max, hi = filt.scan_min;
  for (const auto& l : ideal.lines) {
    outside += ideal.brightness * l.weight * (1.0 - lorentzian_mass(filt.scan_min, filt.scan_max, l.center, width));
    if (l.weight > kSidebandResidualTolerance) {
      lo = std::min(lo, l.center - ideal.linewidth);
      hi = std::max(hi, l.center + ideal.linewidth);
    }
  }
  r.counts_out = trapezoid(grid, out) + outside;
  r.padding_warning = !ideal.lines.empty() && !support_inside(lo, hi, filt);

  std::string prov = "filtered_spectrum fwhm=" + format_g(filt.fwhm) + " n_max=" +
                     std::to_string(ideal.n_max) + " total_weight=" + format_g(ideal.total_weight);
  if (r.padding_warning) prov += " warning=insufficient_padding";
  r.trace = Trace(grid, std::move(out), spectrum_meta(std::move(prov)));
  return r;
}

BiasMap pl_bias_map(std::span<const double> bias_grid, const EmitterState& e,
                    const std::optional<ModulationDrive>& drive, const FilterSpec& filt) {
  e.validate();
  filt.validate();
  require_strictly_increasing(bias_grid);

  double delta = 0.0;
  double omega_m = 1.0;
  if (drive) {
    delta = modulation_index(*drive);
    omega_m = drive->drive_frequency;
  }

  BiasMap map;
  map.bias.assign(bias_grid.begin(), bias_grid.end());
  map.frequency = filt.grid();
  map.plateaus = e.plateaus;
  map.stark_slope = e.stark_slope;
  map.counts.assign(bias_grid.size(), std::vector<double>(map.frequency.size(), 0.0));
  map.row_plateau.resize(bias_grid.size());

  parallel_for(bias_grid.size(), [&](std::size_t row) {
    map.row_plateau[row] = charge_state(bias_grid[row], e);
    const auto center = emission_frequency(bias_grid[row], e);
    if (!center) return;
    const auto comb = sideband_comb(*center, e.linewidth_fwhm, delta, omega_m, 1, e.brightness);
    auto& dst = map.counts[row];
    for (std::size_t j = 0; j < dst.size(); ++j) {
      dst[j] = filtered_comb_density(comb, filt.fwhm, map.frequency[j]);
    }
  });
  return map;
}

}  // namespace sawlab::qd
