#pragma once

// Parameter recovery from traces.

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sawlab/acoustic.hpp"
#include "sawlab/qd.hpp"
#include "sawlab/trace.hpp"

namespace sawlab::estimate {

struct FitParam {
  std::string name;
  double value;
  double sigma;  // 1-sigma, >= 0 (may be +inf when unconstrained)
};

struct FitResult {
  std::string model;
  std::vector<FitParam> params;
  double residual_norm = 0.0;
  bool converged = false;
  int n_iter = 0;
  std::vector<std::string> flags;  // e.g. "two_solution", "non_authoritative"
  std::vector<std::string> notes;

  bool has(std::string_view name) const;
  double value(std::string_view name) const;  // throws std::out_of_range
  double sigma(std::string_view name) const;
  bool has_flag(std::string_view flag) const;
  // Params of a non-converged fit are best-so-far only.
  bool authoritative() const noexcept { return converged; }

  void add(std::string name, double value, double sigma);

  // {model, params:{...}, sigma:{...}, residual_norm, converged, n_iter,
  //  flags:[...], notes:[...]} with keys in insertion order.
  std::string to_json(int indent = 2) const;
  static FitResult from_json(std::string_view text);
};

// ---------------------------------------------------------------- lorentzian

struct LorentzianGuess {
  double center;
  double fwhm;
  double amplitude;
  double offset;
};

// y = offset + amplitude / (1 + (2 (x - center) / fwhm)^2). Peaks and dips.
// Throws FitError for < 8 samples, a flat trace ("no peak detected") or a
// trace narrower than two estimated FWHM.
FitResult fit_lorentzian(const Trace& t, const std::optional<LorentzianGuess>& init = std::nullopt);

// Auto-initialisation used when no guess is supplied (peak pick plus
// half-maximum crossings).
LorentzianGuess guess_lorentzian(const Trace& t);

// ----------------------------------------------------------------------- s11

struct S11Guess {
  double f0;
  double kappa_int;
  double kappa_ext;
  std::complex<double> crosstalk;
};

// Complex one-port fit over (f0, kappa_int, kappa_ext, crosstalk). Reports
// q_int, q_ext and q_loaded with propagated uncertainty.
FitResult fit_s11(const SParamTrace& t, const std::optional<S11Guess>& init = std::nullopt);

// |S11|^2-only fit. kappa_int and kappa_ext enter symmetrically, so both the
// under-coupled (reported as primary) and over-coupled solutions are
// returned; the result carries the "two_solution" flag unless they coincide.
FitResult fit_s11_power(const Trace& power, const std::optional<S11Guess>& init = std::nullopt);

// -------------------------------------------------------- modulation index

// Least-squares fit of a filtered sideband comb (emitter linewidth and filter
// fwhm known) over (delta, center, amplitude, offset). delta >= 0. Also reports
// delta_sq with a sigma from the covariance taken in delta^2.
// Throws FitError("insufficient sideband resolution") if omega_m <= fwhm/2.
FitResult extract_modulation_index(const Trace& spectrum, double omega_m, const qd::FilterSpec& filt,
                                   double linewidth);

// -------------------------------------------------------- linear regressions

// Weighted straight line through (gap, peak_db) with errors in dB. Slope is
// reported in dB/mm; uncertainties follow from the supplied error bars.
FitResult fit_loss_per_length(std::span<const double> gaps_m, std::span<const double> peak_db,
                              std::span<const double> errs_db);

struct SlopeComparison {
  double difference;  // a - b
  double sigma;       // sqrt(sa^2 + sb^2)
  double z;           // |difference| / sigma
  bool agree;         // z <= k
};

SlopeComparison compare_slopes(const FitResult& a, const FitResult& b, double k = 2.0);

struct PlateauSlope {
  std::size_t plateau;
  std::size_t rows_used;
  double slope_hz_per_v;
  double slope_sigma;
  double intercept_hz;  // emission frequency extrapolated to 0 V
};

struct StarkSlopeFit {
  FitResult fit;  // params slope_hz_per_v_p<k> per fitted plateau
  std::vector<PlateauSlope> plateaus;
  std::vector<double> tracked_peak;    // Hz per row, NaN for dark rows
  std::vector<double> discontinuities; // V, midpoints where the tracked peak jumps or turns on/off
};

// Peak-tracks every bright row, then regresses peak frequency against bias
// separately inside each plateau. Plateaus with fewer than 3 bright rows are
// skipped with a note.
StarkSlopeFit fit_stark_slope(const qd::BiasMap& map);

// Centre of the strongest peak in one row: centroid of the above-half-maximum
// region refined by a local Lorentzian fit.
double track_peak(std::span<const double> x, std::span<const double> y);

// --------------------------------------------------------------- synthesis

enum class NoiseKind { gaussian_additive, poisson_counts };

struct NoiseSpec {
  NoiseKind kind = NoiseKind::gaussian_additive;
  double scale = 0.0;
  std::uint64_t seed = 0;
};

// Deterministic given the seed. gaussian_additive adds N(0, scale^2) and sets
// y_err = scale; poisson_counts returns counts drawn with mean scale * y and
// y_err = sqrt(counts). scale == 0 returns the input unchanged.
Trace synthesize(const Trace& model, const NoiseSpec& noise);

// Independent Gaussian noise on real and imaginary parts.
SParamTrace synthesize(const SParamTrace& model, const NoiseSpec& noise);

// Independent stream seed for (seed, stream) pairs (splitmix64 mix).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

// Noise standard deviation giving `snr_db` (amplitude ratio, 20 log10)
// against a signal level `peak`.
double noise_scale_for_snr(double peak, double snr_db);

}  // namespace sawlab::estimate
