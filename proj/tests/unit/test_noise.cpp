#include <gtest/gtest.h>

#include <cmath>

#include "sawlab/errors.hpp"
#include "sawlab/estimate.hpp"

using namespace sawlab;
using namespace sawlab::estimate;

namespace {

Trace ramp(std::size_t n, double y0 = 1.0) {
  const auto x = linspace(0.0, 1.0, n);
  std::vector<double> y;
  for (double v : x) y.push_back(y0 + 10.0 * v);
  return Trace(x, y);
}

}  // namespace

TEST(Synthesize, ZeroScaleIsIdentity) {
  const auto t = ramp(100);
  EXPECT_EQ(synthesize(t, NoiseSpec{NoiseKind::gaussian_additive, 0.0, 1}), t);
  EXPECT_EQ(synthesize(t, NoiseSpec{NoiseKind::poisson_counts, 0.0, 1}), t);
  const SParamTrace s({1.0, 2.0}, {{1.0, 0.5}, {0.0, 0.0}});
  EXPECT_EQ(synthesize(s, NoiseSpec{NoiseKind::gaussian_additive, 0.0, 1}), s);
}

TEST(Synthesize, SameSeedSameOutput) {
  const auto t = ramp(1000);
  const NoiseSpec n{NoiseKind::gaussian_additive, 0.3, 42};
  EXPECT_EQ(synthesize(t, n), synthesize(t, n));
  const NoiseSpec p{NoiseKind::poisson_counts, 5.0, 42};
  EXPECT_EQ(synthesize(t, p), synthesize(t, p));
  EXPECT_NE(synthesize(t, n), synthesize(t, NoiseSpec{NoiseKind::gaussian_additive, 0.3, 43}));
}

TEST(Synthesize, GaussianStandardDeviation) {
  const auto t = ramp(10000);
  const double s = 0.7;
  const auto out = synthesize(t, NoiseSpec{NoiseKind::gaussian_additive, s, 9});
  double m = 0, m2 = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double d = out.y()[i] - t.y()[i];
    m += d;
    m2 += d * d;
  }
  m /= 1e4;
  const double sd = std::sqrt(m2 / 1e4 - m * m);
  EXPECT_NEAR(sd / s, 1.0, 0.03);
  ASSERT_TRUE(out.y_err().has_value());
  EXPECT_EQ((*out.y_err())[17], s);
}

TEST(Synthesize, PoissonCounts) {
  const auto t = ramp(20000, 0.0);
  const auto out = synthesize(t, NoiseSpec{NoiseKind::poisson_counts, 3.0, 4});
  double sum_in = 0, sum_out = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    EXPECT_EQ(out.y()[i], std::floor(out.y()[i]));
    EXPECT_EQ((*out.y_err())[i], std::sqrt(out.y()[i]));
    sum_in += 3.0 * t.y()[i];
    sum_out += out.y()[i];
  }
  EXPECT_EQ(out.y()[0], 0.0);
  EXPECT_NEAR(sum_out / sum_in, 1.0, 0.01);
}

TEST(Synthesize, Errors) {
  const Trace neg({0.0, 1.0}, {1.0, -1.0});
  EXPECT_THROW(synthesize(neg, NoiseSpec{NoiseKind::poisson_counts, 1.0, 0}), DomainError);
  EXPECT_THROW(synthesize(neg, NoiseSpec{NoiseKind::gaussian_additive, -1.0, 0}), DomainError);
  const SParamTrace s({1.0}, {{1.0, 0.0}});
  EXPECT_THROW(synthesize(s, NoiseSpec{NoiseKind::poisson_counts, 1.0, 0}), DomainError);
}

TEST(Synthesize, ComplexNoiseOnBothQuadratures) {
  std::vector<std::complex<double>> z(5000, {0.0, 0.0});
  const SParamTrace s(linspace(1.0, 2.0, 5000), z);
  const auto out = synthesize(s, NoiseSpec{NoiseKind::gaussian_additive, 0.1, 8});
  double re2 = 0, im2 = 0;
  for (auto v : out.s()) {
    re2 += v.real() * v.real();
    im2 += v.imag() * v.imag();
  }
  EXPECT_NEAR(std::sqrt(re2 / 5000) / 0.1, 1.0, 0.05);
  EXPECT_NEAR(std::sqrt(im2 / 5000) / 0.1, 1.0, 0.05);
}

TEST(Seeds, DerivedStreamsDiffer) {
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
  EXPECT_EQ(derive_seed(123, 7), derive_seed(123, 7));
}

TEST(Snr, AmplitudeRatio) {
  EXPECT_NEAR(noise_scale_for_snr(1.0, 30.0), 0.0316227766, 1e-10);
  EXPECT_NEAR(noise_scale_for_snr(-2.0, 20.0), 0.2, 1e-15);
  EXPECT_THROW(noise_scale_for_snr(1.0, std::nan("")), DomainError);
}
