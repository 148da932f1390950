#include "sawlab/cli/pipelines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/uniform_real_distribution.hpp>
#include <nlohmann/json.hpp>

#include "sawlab/errors.hpp"
#include "sawlab/io.hpp"

namespace sawlab::cli {

namespace {

using estimate::NoiseKind;
using estimate::NoiseSpec;
using json = nlohmann::ordered_json;

double noise_scale(double peak, Snr snr) { return snr ? estimate::noise_scale_for_snr(peak, *snr) : 0.0; }

// Trims binary noise from values derived from decimal config entries.
double round_nm(double metres) { return std::round(metres * 1e15) / 1e6; }

double max_abs(std::span<const double> y) {
  double m = 0.0;
  for (double v : y) m = std::max(m, std::abs(v));
  return m;
}

json fit_object(const estimate::FitResult& r) { return json::parse(r.to_json()); }

}  // namespace

// ------------------------------------------------------------------- layer

layer::RelaxationCoeffs layer_coeffs(const DeviceConfig& cfg) {
  return layer::coeffs_for_stack(cfg.layer, cfg.material, cfg.k2_calibration);
}

std::vector<LayerSweepRow> layer_sweep(const DeviceConfig& cfg) {
  const auto& s = cfg.layer_sweep;
  if (!(s.sigma_min > 0.0 && s.sigma_max > s.sigma_min)) {
    throw ConfigError("layer_sweep: need 0 < sigma_min < sigma_max");
  }
  if (s.sigma_points < 2) throw ConfigError("layer_sweep: sigma_points must be >= 2");
  const auto c = layer_coeffs(cfg);
  std::vector<LayerSweepRow> rows;
  for (double sigma : logspace(s.sigma_min, s.sigma_max, s.sigma_points)) {
    rows.push_back({sigma, layer::velocity_shift_fraction(sigma, c), layer::attenuation_per_wavevector(sigma, c),
                    layer::attenuation_rate_hz(sigma, c, s.frequency), layer::regime_classify(sigma, c)});
  }
  return rows;
}

std::vector<DepthSweepRow> depth_sweep(const DeviceConfig& cfg) {
  const auto& s = cfg.layer_sweep;
  if (!(s.depth_min > 0.0 && s.depth_max > s.depth_min)) {
    throw ConfigError("layer_sweep: need 0 < depth_min_nm < depth_max_nm");
  }
  if (s.depth_points < 2) throw ConfigError("layer_sweep: depth_points must be >= 2");
  std::vector<DepthSweepRow> rows;
  for (double nm : linspace(round_nm(s.depth_min), round_nm(s.depth_max), s.depth_points)) {
    rows.push_back({nm, layer::k2_effective(nm / 1e9, cfg.k2_calibration)});
  }
  return rows;
}

double doped_layer_loss_hz(const DeviceConfig& cfg) {
  return layer::attenuation_rate_hz(cfg.layer.sigma_xx, layer_coeffs(cfg), cfg.delay_line.idt.center_frequency);
}

std::string layer_sweep_csv(const std::vector<LayerSweepRow>& rows) {
  std::string out = "sigma_S_per_m,dv_over_v,kappa_over_q,loss_hz,regime\n";
  for (const auto& r : rows) {
    out += io::format_number(r.sigma) + ',' + io::format_number(r.dv_over_v) + ',' +
           io::format_number(r.kappa_over_q) + ',' + io::format_number(r.loss_hz) + ',' +
           std::string(layer::to_string(r.regime)) + '\n';
  }
  return out;
}

std::string depth_sweep_csv(const std::vector<DepthSweepRow>& rows) {
  std::string out = "depth_nm,k2\n";
  for (const auto& r : rows) out += io::format_number(r.depth_nm) + ',' + io::format_number(r.k2) + '\n';
  return out;
}

// -------------------------------------------------------------- delay line

double loss_rate_to_per_length(double rate_hz, const MaterialParams& material) {
  return acoustic::rate_to_per_length(kPi * rate_hz, material);
}

acoustic::DelayLineSpec delay_line_spec(const DeviceConfig& cfg, double gap, double layer_loss_hz,
                                        acoustic::cplx crosstalk, std::optional<double> k2) {
  acoustic::DelayLineSpec d;
  d.idt_a = k2 ? acoustic::with_coupling(cfg.delay_line.idt, *k2) : cfg.delay_line.idt;
  d.idt_b = d.idt_a;
  d.gap = gap;
  const double rates[] = {cfg.delay_line.bulk_loss_hz, layer_loss_hz};
  d.loss_per_length = loss_rate_to_per_length(acoustic::total_propagation_loss(rates), cfg.material);
  d.crosstalk = crosstalk;
  d.validate();
  return d;
}

std::vector<double> delay_line_grid(const DeviceConfig& cfg) {
  const auto& dl = cfg.delay_line;
  const double fc = dl.idt.center_frequency;
  return linspace(fc - 0.5 * dl.span, fc + 0.5 * dl.span, dl.n_points);
}

DelayLineRun run_delay_line(const DeviceConfig& cfg, const DelayLineOptions& opt, std::uint64_t seed, Snr snr) {
  const auto& dl = cfg.delay_line;
  if (dl.gaps.empty()) throw ConfigError("delay_line: at least one gap is required");
  const auto grid = delay_line_grid(cfg);
  const double c_mag = std::abs(dl.crosstalk);
  boost::random::mt19937_64 rng(estimate::derive_seed(seed, 0));
  boost::random::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);

  DelayLineRun run;
  run.gaps = dl.gaps;
  for (std::size_t i = 0; i < dl.gaps.size(); ++i) {
    const acoustic::cplx xt = opt.random_crosstalk_phase ? std::polar(c_mag, phase(rng)) : dl.crosstalk;
    const auto spec = delay_line_spec(cfg, dl.gaps[i], opt.layer_loss_hz, xt, opt.k2);
    auto trace = acoustic::s21_delay_line_trace(grid, spec, cfg.material);
    double peak_amp = 0.0;
    for (auto s : trace.s()) peak_amp = std::max(peak_amp, std::abs(s));
    const double scale = noise_scale(peak_amp, snr);
    trace = estimate::synthesize(trace, NoiseSpec{NoiseKind::gaussian_additive, scale, estimate::derive_seed(seed, i + 1)});

    double peak_power = 0.0;
    for (auto s : trace.s()) peak_power = std::max(peak_power, std::norm(s));
    const double a = std::sqrt(peak_power);
    // The maximum sits where crosstalk adds in phase: a = |H| + |c|.
    const double h = a - c_mag;
    if (!(h > c_mag) && c_mag > 0.0) {
      throw FitError("crosstalk is comparable to the acoustic transmission at gap index " + std::to_string(i));
    }
    const double beat_db = c_mag > 0.0 ? 10.0 * std::log10((h + c_mag) / (h - c_mag)) : 0.0;
    const double noise_db = a > 0.0 ? 20.0 / std::log(10.0) * scale / a : 0.0;
    // Floor keeps noiseless, crosstalk-free runs fittable.
    const double err = std::max(std::hypot(beat_db, noise_db), 1e-9);

    run.peak_db.push_back(10.0 * std::log10(peak_power));
    run.err_db.push_back(err);
    if (opt.with_traces) run.s21.push_back(std::move(trace));
  }
  return run;
}

std::string peak_table_csv(const DelayLineRun& run) {
  std::string out = "gap_um,peak_db,err_db\n";
  for (std::size_t i = 0; i < run.gaps.size(); ++i) {
    out += io::format_number(std::round(run.gaps[i] * 1e12) / 1e6) + ',' + io::format_number(run.peak_db[i]) +
           ',' + io::format_number(run.err_db[i]) + '\n';
  }
  return out;
}

SlopeComparisonRun compare_substrates(const DeviceConfig& cfg, double layer_loss_hz, std::size_t trials,
                                      std::uint64_t seed, Snr snr, double k) {
  if (trials == 0) throw ConfigError("delay_line: trials must be >= 1");
  SlopeComparisonRun out;
  out.trials = trials;
  out.k = k;
  out.layer_loss_hz = layer_loss_hz;
  DelayLineOptions bulk_opt;
  bulk_opt.random_crosstalk_phase = true;
  DelayLineOptions doped_opt = bulk_opt;
  doped_opt.layer_loss_hz = layer_loss_hz;
  for (std::size_t t = 0; t < trials; ++t) {
    bulk_opt.with_traces = doped_opt.with_traces = (t == 0);
    auto bulk = run_delay_line(cfg, bulk_opt, estimate::derive_seed(seed, 2 * t), snr);
    auto doped = run_delay_line(cfg, doped_opt, estimate::derive_seed(seed, 2 * t + 1), snr);
    auto fa = estimate::fit_loss_per_length(bulk.gaps, bulk.peak_db, bulk.err_db);
    auto fb = estimate::fit_loss_per_length(doped.gaps, doped.peak_db, doped.err_db);
    const auto cmp = estimate::compare_slopes(fa, fb, k);
    out.agree += cmp.agree ? 1 : 0;
    if (t == 0) {
      out.bulk = std::move(bulk);
      out.doped = std::move(doped);
      out.bulk_fit = std::move(fa);
      out.doped_fit = std::move(fb);
      out.first = cmp;
    }
  }
  return out;
}

std::string comparison_json(const SlopeComparisonRun& run) {
  json j;
  j["trials"] = run.trials;
  j["k_sigma"] = run.k;
  j["layer_loss_hz"] = run.layer_loss_hz;
  j["agree"] = run.agree;
  j["agree_fraction"] = run.agree_fraction();
  j["verdict"] = run.agree_fraction() >= 0.95 ? "similar slope" : "slopes differ";
  j["first_trial"] = {{"difference_db_per_mm", run.first.difference},
                      {"sigma_db_per_mm", run.first.sigma},
                      {"z", run.first.z},
                      {"agree", run.first.agree},
                      {"bulk", fit_object(run.bulk_fit)},
                      {"doped", fit_object(run.doped_fit)}};
  return j.dump(2) + "\n";
}

// --------------------------------------------------------------- resonator

std::vector<double> resonator_grid(const DeviceConfig& cfg) {
  const auto& r = cfg.resonator;
  const double half = r.span_factor * r.params.kappa_total();
  if (!(half > 0.0)) throw ConfigError("resonator: span_factor must be > 0");
  return linspace(r.params.f0 - half, r.params.f0 + half, r.n_points);
}

SParamTrace resonator_trace(const DeviceConfig& cfg, std::uint64_t seed, Snr snr) {
  const auto model = acoustic::s11_resonator_trace(resonator_grid(cfg), cfg.resonator.params);
  return estimate::synthesize(model, NoiseSpec{NoiseKind::gaussian_additive, noise_scale(1.0, snr), seed});
}

ResonatorRun run_resonator(const DeviceConfig& cfg, std::uint64_t seed, Snr snr) {
  ResonatorRun run;
  run.s11 = resonator_trace(cfg, seed, snr);
  run.fit = estimate::fit_s11(run.s11);
  return run;
}

// ---------------------------------------------------------------- emitter

qd::FilterSpec spectrometer_filter(const DeviceConfig& cfg) {
  const double c = cfg.emitter.base_frequency;
  const double h = cfg.spectrometer.half_span;
  qd::FilterSpec f{cfg.filter_fwhm, c - h, c + h, cfg.spectrometer.n_points};
  f.validate();
  return f;
}

std::vector<double> bias_grid(const DeviceConfig& cfg) {
  const auto& b = cfg.bias_sweep;
  return linspace(b.v_min, b.v_max, b.n_points);
}

std::optional<qd::ModulationDrive> drive_at(const DeviceConfig& cfg, std::optional<double> drive_frequency) {
  qd::ModulationDrive d = cfg.drive;
  if (drive_frequency) d.drive_frequency = *drive_frequency;
  d.validate();
  return d;
}

BiasMapRun run_bias_map(const DeviceConfig& cfg, const std::optional<qd::ModulationDrive>& drive,
                        std::uint64_t seed, Snr snr, bool fit) {
  BiasMapRun run;
  run.map = qd::pl_bias_map(bias_grid(cfg), cfg.emitter, drive, spectrometer_filter(cfg));
  double peak = 0.0;
  for (const auto& row : run.map.counts) peak = std::max(peak, max_abs(row));
  const double scale = noise_scale(peak, snr);
  if (scale > 0.0) {
    for (std::size_t r = 0; r < run.map.counts.size(); ++r) {
      const Trace clean(run.map.frequency, run.map.counts[r]);
      const auto noisy =
          estimate::synthesize(clean, NoiseSpec{NoiseKind::gaussian_additive, scale, estimate::derive_seed(seed, r)});
      run.map.counts[r].assign(noisy.y().begin(), noisy.y().end());
    }
  }
  if (fit) {
    try {
      run.stark = estimate::fit_stark_slope(run.map);
      run.stark_fitted = true;
    } catch (const FitError& e) {
      run.stark_error = e.what();
    }
  }
  return run;
}

SpectrumRun run_spectrum(const DeviceConfig& cfg, double bias, const std::optional<qd::ModulationDrive>& drive,
                         std::uint64_t seed, Snr snr) {
  const auto filt = spectrometer_filter(cfg);
  const auto& e = cfg.emitter;
  e.validate();
  SpectrumRun run;
  const auto center = qd::emission_frequency(bias, e);
  if (!center) {
    const auto grid = filt.grid();
    run.dark = true;
    run.spectrum = Trace(grid, std::vector<double>(grid.size(), 0.0),
                         AxisMeta{"frequency", "Hz", "counts", "", "dark: bias outside every plateau"});
    return run;
  }
  const double delta = drive ? qd::modulation_index(*drive) : 0.0;
  const double omega_m = drive ? drive->drive_frequency : 1.0;
  const auto comb = qd::sideband_comb(*center, e.linewidth_fwhm, delta, omega_m, 1, e.brightness);
  auto filtered = qd::filtered_spectrum(comb, filt);
  run.padding_warning = filtered.padding_warning;
  const double scale = noise_scale(max_abs(filtered.trace.y()), snr);
  run.spectrum = estimate::synthesize(filtered.trace, NoiseSpec{NoiseKind::gaussian_additive, scale, seed});
  try {
    run.fit = drive ? estimate::extract_modulation_index(run.spectrum, omega_m, filt, e.linewidth_fwhm)
                    : estimate::fit_lorentzian(run.spectrum);
  } catch (const FitError& err) {
    run.fit_error = err.what();
  }
  return run;
}

double default_sweep_bias(const DeviceConfig& cfg) {
  if (cfg.emitter.plateaus.empty()) throw ConfigError("emitter: no plateaus configured");
  const auto& p = cfg.emitter.plateaus.front();
  return 0.5 * (p.v_min + p.v_max);
}

DriveSweepRun run_drive_sweep(const DeviceConfig& cfg, double bias, std::uint64_t seed, Snr snr) {
  const auto filt = spectrometer_filter(cfg);
  const auto& e = cfg.emitter;
  const auto center = qd::emission_frequency(bias, e);
  if (!center) throw ConfigError("drive sweep bias lies outside every plateau (dot is dark)");
  const auto& mode = cfg.drive.mode;
  const double half = cfg.drive_sweep.half_width_factor * mode.kappa_total();
  if (!(half > 0.0)) throw ConfigError("drive: sweep_half_width_factor must be > 0");

  DriveSweepRun run;
  run.bias = bias;
  run.drive_hz = linspace(mode.f0 - half, mode.f0 + half, cfg.drive_sweep.n_points);
  std::vector<double> dsq, dsq_err;
  for (std::size_t i = 0; i < run.drive_hz.size(); ++i) {
    auto drive = *drive_at(cfg, run.drive_hz[i]);
    const double delta = qd::modulation_index(drive);
    const auto comb = qd::sideband_comb(*center, e.linewidth_fwhm, delta, drive.drive_frequency, 1, e.brightness);
    const auto filtered = qd::filtered_spectrum(comb, filt);
    const double scale = noise_scale(max_abs(filtered.trace.y()), snr);
    const auto noisy = estimate::synthesize(
        filtered.trace, NoiseSpec{NoiseKind::gaussian_additive, scale, estimate::derive_seed(seed, i)});
    const auto fit = estimate::extract_modulation_index(noisy, drive.drive_frequency, filt, e.linewidth_fwhm);
    run.delta.push_back(fit.value("delta"));
    run.delta_sigma.push_back(fit.sigma("delta"));
    dsq.push_back(fit.value("delta_sq"));
    dsq_err.push_back(fit.sigma("delta_sq"));
  }
  const bool weighted = std::all_of(dsq_err.begin(), dsq_err.end(), [](double s) { return s > 0.0; });
  const AxisMeta meta{"drive frequency", "Hz", "delta^2", "", "drive sweep"};
  run.delta_sq = weighted ? Trace(run.drive_hz, dsq, dsq_err, meta) : Trace(run.drive_hz, dsq, meta);
  run.fit = estimate::fit_lorentzian(run.delta_sq);
  const double f0 = run.fit.value("center"), w = run.fit.value("fwhm");
  const double q = f0 / w;
  const double rel = std::hypot(run.fit.sigma("center") / f0, run.fit.sigma("fwhm") / w);
  run.fit.add("q_acoustic", q, q * rel);
  return run;
}

std::string drive_sweep_csv(const DriveSweepRun& run) {
  std::string out = "drive_hz,delta,delta_err,delta_sq\n";
  for (std::size_t i = 0; i < run.drive_hz.size(); ++i) {
    out += io::format_number(run.drive_hz[i]) + ',' + io::format_number(run.delta[i]) + ',' +
           io::format_number(run.delta_sigma[i]) + ',' + io::format_number(run.delta_sq.y()[i]) + '\n';
  }
  return out;
}

}  // namespace sawlab::cli
