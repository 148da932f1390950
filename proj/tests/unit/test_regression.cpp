#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "sawlab/errors.hpp"
#include "sawlab/estimate.hpp"
#include "sawlab/qd.hpp"

using namespace sawlab;
using namespace sawlab::estimate;

TEST(LossPerLength, TwoPointsGiveExactSlope) {
  const std::vector<double> gaps{200e-6, 600e-6};
  const std::vector<double> db{-10.0, -12.0};
  const std::vector<double> err{0.3, 0.3};
  const auto fit = fit_loss_per_length(gaps, db, err);
  EXPECT_NEAR(fit.value("slope_db_per_mm"), -5.0, 1e-12);
  EXPECT_NEAR(fit.value("intercept_db"), -9.0, 1e-12);
  // sigma of the slope for two points: sqrt(2) * err / span.
  EXPECT_NEAR(fit.sigma("slope_db_per_mm"), std::sqrt(2.0) * 0.3 / 0.4, 1e-12);
}

TEST(LossPerLength, WeightedAgainstClosedForm) {
  prop::Gen g(91);
  for (int i = 0; i < 50; ++i) {
    const int n = g.integer(3, 12);
    std::vector<double> x, y, e;
    for (int j = 0; j < n; ++j) {
      x.push_back(g.uniform(50e-6, 2e-3));
      y.push_back(g.uniform(-30, -5));
      e.push_back(g.uniform(0.05, 1.0));
    }
    // Normal equations solved independently with long double.
    long double s = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int j = 0; j < n; ++j) {
      const long double w = 1.0L / (e[j] * e[j]);
      const long double xm = x[j] * 1e3L;
      s += w;
      sx += w * xm;
      sy += w * y[j];
      sxx += w * xm * xm;
      sxy += w * xm * y[j];
    }
    const long double d = s * sxx - sx * sx;
    const auto fit = fit_loss_per_length(x, y, e);
    EXPECT_NEAR(fit.value("slope_db_per_mm"), static_cast<double>((s * sxy - sx * sy) / d), 1e-9)
        << prop::case_label(i);
    EXPECT_NEAR(fit.sigma("slope_db_per_mm"), static_cast<double>(std::sqrt(s / d)), 1e-9) << prop::case_label(i);
  }
}

TEST(LossPerLength, Errors) {
  const std::vector<double> same{400e-6, 400e-6, 400e-6};
  const std::vector<double> db{-10, -11, -12};
  const std::vector<double> err{0.1, 0.1, 0.1};
  EXPECT_THROW(fit_loss_per_length(same, db, err), FitError);
  const std::vector<double> one{400e-6};
  EXPECT_THROW(fit_loss_per_length(one, std::vector<double>{-1.0}, std::vector<double>{0.1}), FitError);
  const std::vector<double> gaps{200e-6, 400e-6, 600e-6};
  EXPECT_THROW(fit_loss_per_length(gaps, db, std::vector<double>{0.1, 0.0, 0.1}), DomainError);
  EXPECT_THROW(fit_loss_per_length(gaps, std::vector<double>{1.0}, err), DomainError);
}

TEST(CompareSlopes, InjectedThreeSigmaDifferenceFails) {
  const std::vector<double> gaps{200e-6, 600e-6};
  const std::vector<double> err{0.3, 0.3};
  const auto a = fit_loss_per_length(gaps, std::vector<double>{-10.0, -12.0}, err);
  const double sigma = std::sqrt(2.0) * a.sigma("slope_db_per_mm");
  // Shift b's slope by 3 sigma of the difference.
  const double ds = 3.0 * sigma * 0.4;
  const auto b = fit_loss_per_length(gaps, std::vector<double>{-10.0, -12.0 + ds}, err);
  const auto cmp = compare_slopes(a, b, 2.0);
  EXPECT_NEAR(cmp.z, 3.0, 1e-9);
  EXPECT_FALSE(cmp.agree);
  EXPECT_TRUE(compare_slopes(a, a, 2.0).agree);
}

TEST(CompareSlopes, EqualTrueSlopesAgreeMostOfTheTime) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n01;
  const std::vector<double> gaps{200e-6, 400e-6, 600e-6, 800e-6, 1000e-6};
  const std::vector<double> err(gaps.size(), 0.4);
  // Exact Gaussian z gives P(|z| <= 2) = 0.9545; 10 blocks of 1000 keep the
  // binomial spread (0.2 %) well inside the 0.45 % margin.
  const int trials = 10000;
  int agree = 0;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> ya, yb;
    for (double gp : gaps) {
      ya.push_back(-10 - 0.3 * gp * 1e3 + 0.4 * n01(rng));
      yb.push_back(-11 - 0.3 * gp * 1e3 + 0.4 * n01(rng));
    }
    agree += compare_slopes(fit_loss_per_length(gaps, ya, err), fit_loss_per_length(gaps, yb, err)).agree;
  }
  EXPECT_GE(agree, 0.95 * trials);
  EXPECT_LE(agree, 0.96 * trials);
}

namespace {

qd::EmitterState demo_emitter(double slope = 0.13e12) {
  qd::EmitterState e;
  e.stark_slope = slope;
  e.plateaus = {{-0.015, 0.0, -3e9}, {0.0, 0.02, -4e9}, {0.025, 0.045, -2e9}};
  return e;
}

qd::BiasMap demo_map(const qd::EmitterState& e, bool drive_on = true) {
  std::optional<qd::ModulationDrive> drive;
  if (drive_on) {
    qd::ModulationDrive d;
    d.mode = acoustic::ResonatorParams{3.53388e9, 116e3, 116e3, {}};
    d.drive_frequency = d.mode.f0;
    drive = d;
  }
  const qd::FilterSpec filt{600e6, e.base_frequency - 14e9, e.base_frequency + 14e9, 561};
  return qd::pl_bias_map(linspace(-0.02, 0.05, 141), e, drive, filt);
}

}  // namespace

TEST(StarkSlope, NoiselessRecoveryPerPlateau) {
  const auto map = demo_map(demo_emitter());
  const auto fit = fit_stark_slope(map);
  ASSERT_EQ(fit.plateaus.size(), 3u);
  for (const auto& p : fit.plateaus) {
    EXPECT_NEAR(p.slope_hz_per_v / 0.13e12, 1.0, 1e-3) << p.plateau;
    EXPECT_GE(p.rows_used, 3u);
  }
  EXPECT_TRUE(fit.fit.has("slope_hz_per_v_p0"));
  EXPECT_TRUE(fit.fit.has("slope_hz_per_v_p2"));
}

TEST(StarkSlope, ZeroSlopeIsZeroWithinUncertainty) {
  const auto map = demo_map(demo_emitter(0.0), false);
  const auto fit = fit_stark_slope(map);
  for (const auto& p : fit.plateaus) {
    EXPECT_LE(std::abs(p.slope_hz_per_v), std::max(3.0 * p.slope_sigma, 1e3)) << p.plateau;
  }
}

TEST(StarkSlope, DiscontinuitiesAtPlateauEdges) {
  const auto map = demo_map(demo_emitter());
  const auto fit = fit_stark_slope(map);
  const std::vector<double> expected{-0.015, 0.0, 0.02, 0.025, 0.045};
  ASSERT_EQ(fit.discontinuities.size(), expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    EXPECT_NEAR(fit.discontinuities[i], expected[i], 0.0005 + 1e-12) << i;
  }
}

TEST(StarkSlope, ThinPlateauIsSkippedWithNote) {
  auto e = demo_emitter();
  e.plateaus.push_back({0.0462, 0.0468, 0.0});  // a single row at 0.5 mV spacing
  const auto fit = fit_stark_slope(demo_map(e));
  EXPECT_EQ(fit.plateaus.size(), 3u);
  ASSERT_FALSE(fit.fit.notes.empty());
  EXPECT_NE(fit.fit.notes.front().find("plateau 3 skipped"), std::string::npos);
}

TEST(StarkSlope, DarkMapIsAnError) {
  qd::EmitterState e;
  e.plateaus = {{1.0, 2.0, 0.0}};
  EXPECT_THROW(fit_stark_slope(demo_map(e)), FitError);
}

TEST(TrackPeak, CentroidRefinedByLorentzian) {
  const auto x = linspace(-5e9, 5e9, 201);
  std::vector<double> y;
  for (double v : x) y.push_back(prop::lorentzian(v, 123.4e6, 1.2436e9, 1.0, 0.01));
  EXPECT_NEAR(track_peak(x, y), 123.4e6, 1.0);
}
