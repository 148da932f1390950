#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "sawlab/bessel.hpp"
#include "sawlab/errors.hpp"
#include "sawlab/estimate.hpp"
#include "sawlab/qd.hpp"

using namespace sawlab;
using namespace sawlab::estimate;

namespace {

constexpr double kOmega = 3.53388e9;
constexpr double kLinewidth = 643.6e6;

qd::FilterSpec filter(double center = 0.0) { return qd::FilterSpec{600e6, center - 12e9, center + 12e9, 401}; }

Trace spectrum(double delta, double center = 0.0, double brightness = 1.0) {
  const auto comb = qd::sideband_comb(center, kLinewidth, delta, kOmega, 10, brightness);
  return qd::filtered_spectrum(comb, filter(center)).trace;
}

}  // namespace

TEST(ModulationIndexFit, NoiselessRecovery) {
  prop::Gen g(81);
  for (int i = 0; i < 30; ++i) {
    const double d = g.uniform(0.05, 2.5);
    const double c = g.uniform(-1e9, 1e9);
    const auto fit = extract_modulation_index(spectrum(d, c, g.log_uniform(1e-3, 1e3)), kOmega, filter(c),
                                              kLinewidth);
    ASSERT_TRUE(fit.converged) << prop::case_label(i);
    EXPECT_NEAR(fit.value("delta") / d, 1.0, 1e-6) << prop::case_label(i) << " delta=" << d;
    EXPECT_NEAR(fit.value("center") - c, 0.0, 1.0) << prop::case_label(i);
  }
}

TEST(ModulationIndexFit, SidebandRatioSelfConsistent) {
  const double d = 1.0;
  const auto fit = extract_modulation_index(spectrum(d), kOmega, filter(), kLinewidth);
  const double fd = fit.value("delta");
  const double r_fit = std::pow(qd::bessel_j(1, fd) / qd::bessel_j(0, fd), 2);
  const double r_in = std::pow(qd::bessel_j(1, d) / qd::bessel_j(0, d), 2);
  EXPECT_NEAR(r_fit, r_in, 1e-6);
}

TEST(ModulationIndexFit, CarrierOnly) {
  const auto fit = extract_modulation_index(spectrum(0.0), kOmega, filter(), kLinewidth);
  EXPECT_GE(fit.value("delta"), 0.0);
  EXPECT_LT(fit.value("delta"), 1e-3);
}

TEST(ModulationIndexFit, ThirtyDbNoise) {
  const auto clean = spectrum(1.0);
  double peak = 0.0;
  for (double v : clean.y()) peak = std::max(peak, v);
  const double sigma = noise_scale_for_snr(peak, 30.0);
  for (std::uint64_t s = 0; s < 30; ++s) {
    const auto noisy = synthesize(clean, NoiseSpec{NoiseKind::gaussian_additive, sigma, derive_seed(17, s)});
    const auto fit = extract_modulation_index(noisy, kOmega, filter(), kLinewidth);
    EXPECT_NEAR(fit.value("delta"), 1.0, 0.02) << s;
  }
}

// Weak drive at 30 dB: the first sidebands sit near the noise floor and the
// fit can collapse to delta = 0. The delta^2 error must still cover the truth.
TEST(ModulationIndexFit, DeltaSquaredErrorCoversWeakDrive) {
  const double d = 0.15;
  const auto clean = spectrum(d);
  double peak = 0.0;
  for (double v : clean.y()) peak = std::max(peak, v);
  const double sigma = noise_scale_for_snr(peak, 30.0);
  int within = 0;
  const int trials = 400;
  for (int s = 0; s < trials; ++s) {
    const auto noisy = synthesize(clean, NoiseSpec{NoiseKind::gaussian_additive, sigma, derive_seed(23, s)});
    const auto fit = extract_modulation_index(noisy, kOmega, filter(), kLinewidth);
    const double q = fit.value("delta_sq"), sq = fit.sigma("delta_sq");
    EXPECT_NEAR(q, fit.value("delta") * fit.value("delta"), 1e-12);
    ASSERT_GT(sq, 0.0) << s;
    const double pull = (q - d * d) / sq;
    EXPECT_LT(std::abs(pull), 5.0) << s;
    if (std::abs(pull) < 1.0) ++within;
  }
  // Unconstrained Gaussian coverage would be 0.683; the delta >= 0 bound
  // folds estimates away from zero and makes the interval conservative.
  EXPECT_GT(within, 0.60 * trials);
  EXPECT_LT(within, 0.97 * trials);
}

TEST(ModulationIndexFit, Errors) {
  try {
    extract_modulation_index(spectrum(1.0), 250e6, filter(), kLinewidth);
    FAIL();
  } catch (const FitError& e) {
    EXPECT_STREQ(e.what(), "insufficient sideband resolution");
  }
  const auto x = linspace(-1e9, 1e9, 50);
  EXPECT_THROW(extract_modulation_index(Trace(x, std::vector<double>(50, 1.0)), kOmega, filter(), kLinewidth),
               FitError);
}
