#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "sawlab/acoustic.hpp"
#include "sawlab/errors.hpp"
#include "sawlab/estimate.hpp"

using namespace sawlab;
using namespace sawlab::estimate;
using acoustic::ResonatorParams;

namespace {

SParamTrace sweep(const ResonatorParams& p, double span_factor = 5.0, std::size_t n = 801) {
  const double k = p.kappa_total();
  return acoustic::s11_resonator_trace(linspace(p.f0 - span_factor * k, p.f0 + span_factor * k, n), p);
}

}  // namespace

TEST(FitS11Property, NoiselessComplexRecovery) {
  prop::Gen g(71);
  for (int i = 0; i < 100; ++i) {
    ResonatorParams p{g.uniform(1e9, 6e9), g.log_uniform(10e3, 1e6), 0.0, {}};
    p.kappa_ext = p.kappa_int * g.log_uniform(0.1, 10.0);
    p.crosstalk = {g.uniform(-0.05, 0.05), g.uniform(-0.05, 0.05)};
    const auto fit = fit_s11(sweep(p, g.uniform(4, 10), static_cast<std::size_t>(g.integer(200, 1200))));
    ASSERT_TRUE(fit.converged) << prop::case_label(i);
    EXPECT_NEAR((fit.value("f0") - p.f0) / p.kappa_total(), 0.0, 1e-6) << prop::case_label(i);
    EXPECT_NEAR(fit.value("kappa_int") / p.kappa_int, 1.0, 1e-6) << prop::case_label(i);
    EXPECT_NEAR(fit.value("kappa_ext") / p.kappa_ext, 1.0, 1e-6) << prop::case_label(i);
    EXPECT_NEAR(fit.value("crosstalk_re"), p.crosstalk.real(), 1e-6) << prop::case_label(i);
    EXPECT_NEAR(fit.value("crosstalk_im"), p.crosstalk.imag(), 1e-6) << prop::case_label(i);
    EXPECT_NEAR(fit.value("q_int") / (p.f0 / p.kappa_int), 1.0, 1e-6) << prop::case_label(i);
  }
}

TEST(FitS11, ReportsQualityFactors) {
  const ResonatorParams p{3.5e9, 125e3, 110e3, {}};
  const auto fit = fit_s11(sweep(p));
  EXPECT_NEAR(fit.value("q_int"), 28000.0, 28000.0 * 1e-6);
  EXPECT_NEAR(fit.value("q_ext"), 3.5e9 / 110e3, 1e-6 * 3.5e9 / 110e3);
  EXPECT_NEAR(fit.value("q_loaded"), 3.5e9 / 235e3, 1e-6 * 3.5e9 / 235e3);
}

TEST(FitS11, QualityFactorUncertaintyPropagates) {
  const ResonatorParams p{3.5e9, 125e3, 110e3, {}};
  const auto noisy = synthesize(sweep(p), NoiseSpec{NoiseKind::gaussian_additive, 0.0316, 99});
  const auto fit = fit_s11(noisy);
  const double q = fit.value("q_int");
  const double ki = fit.value("kappa_int");
  // First-order propagation for q = f0/kappa_int with f0 well determined.
  EXPECT_NEAR(fit.sigma("q_int") / (q * fit.sigma("kappa_int") / ki), 1.0, 0.05);
  EXPECT_NEAR(q / 28000.0, 1.0, 0.1);
}

TEST(FitS11, MedianQAtThirtyDb) {
  const ResonatorParams p{3.5e9, 125e3, 110e3, {}};
  const auto clean = sweep(p);
  std::vector<double> q;
  for (std::uint64_t s = 0; s < 40; ++s) {
    const auto noisy = synthesize(clean, NoiseSpec{NoiseKind::gaussian_additive, 0.0316, derive_seed(5, s)});
    q.push_back(fit_s11(noisy).value("q_int"));
  }
  std::nth_element(q.begin(), q.begin() + 20, q.end());
  EXPECT_NEAR(q[20] / 28000.0, 1.0, 0.05);
}

TEST(FitS11, DecoupledResonatorIsNotDetected) {
  ResonatorParams p{3.5e9, 125e3, 0.0, {0.01, 0.0}};
  try {
    fit_s11(sweep(ResonatorParams{3.5e9, 125e3, 0.0, {0.01, 0.0}}));
    FAIL();
  } catch (const FitError& e) {
    EXPECT_STREQ(e.what(), "no resonance detected");
  }
  EXPECT_THROW(fit_s11_power(sweep(p).power()), FitError);
}

TEST(FitS11, NarrowSpanIsRejected) {
  const ResonatorParams p{3.5e9, 125e3, 125e3, {}};
  EXPECT_THROW(fit_s11(sweep(p, 1.0, 101)), FitError);
}

TEST(FitS11Power, FlagsTwoSolutions) {
  const ResonatorParams p{3.5e9, 125e3, 60e3, {}};
  const auto fit = fit_s11_power(sweep(p).power());
  EXPECT_TRUE(fit.has_flag("two_solution"));
  const double a = fit.value("kappa_int"), b = fit.value("alt_kappa_int");
  EXPECT_NEAR(std::max(a, b) / 125e3, 1.0, 1e-6);
  EXPECT_NEAR(std::min(a, b) / 60e3, 1.0, 1e-6);
  EXPECT_NEAR(fit.value("kappa_int") + fit.value("kappa_ext"), 185e3, 185e3 * 1e-6);
  EXPECT_NEAR(fit.value("alt_kappa_int"), fit.value("kappa_ext"), 1e-6 * 185e3);
  EXPECT_NEAR(fit.value("q_loaded"), 3.5e9 / 185e3, 1e-3);
}

TEST(FitS11Power, SwappedCouplingGivesIdenticalMagnitude) {
  const ResonatorParams under{3.5e9, 125e3, 60e3, {}};
  const ResonatorParams over{3.5e9, 60e3, 125e3, {}};
  const auto a = sweep(under).power();
  const auto b = sweep(over).power();
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a.y()[i], b.y()[i], 1e-14);
  const auto fa = fit_s11_power(a);
  const auto fb = fit_s11_power(b);
  EXPECT_NEAR(fa.value("kappa_int"), fb.value("kappa_int"), 1e-3);
}

TEST(FitS11Power, CriticalCouplingFlag) {
  const ResonatorParams p{3.5e9, 125e3, 125e3, {}};
  const auto fit = fit_s11_power(sweep(p).power());
  EXPECT_TRUE(fit.has_flag("critical_coupling"));
  EXPECT_NEAR(fit.value("kappa_int") / 125e3, 1.0, 1e-3);
}
