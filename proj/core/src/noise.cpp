#include <cmath>
#include <random>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>

#include "sawlab/errors.hpp"
#include "sawlab/estimate.hpp"

namespace sawlab::estimate {

// std::mt19937_64 output is fixed by the standard; Boost's distributions are
// the same code on every platform, so streams are reproducible everywhere.

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double noise_scale_for_snr(double peak, double snr_db) {
  if (!std::isfinite(snr_db)) throw DomainError("snr_db must be finite");
  return std::abs(peak) / std::pow(10.0, snr_db / 20.0);
}

Trace synthesize(const Trace& model, const NoiseSpec& noise) {
  if (!(noise.scale >= 0.0)) throw DomainError("noise scale must be >= 0");
  const auto y = model.y();
  if (noise.kind == NoiseKind::poisson_counts) {
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (y[i] < 0.0) throw DomainError("poisson_counts requires y >= 0 (index " + std::to_string(i) + ")");
    }
  }
  if (noise.scale == 0.0) return model;

  std::mt19937_64 rng(noise.seed);
  std::vector<double> out(y.size()), err(y.size());
  if (noise.kind == NoiseKind::gaussian_additive) {
    boost::random::normal_distribution<double> normal(0.0, noise.scale);
    for (std::size_t i = 0; i < y.size(); ++i) {
      out[i] = y[i] + normal(rng);
      err[i] = noise.scale;
    }
  } else {
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double mean = noise.scale * y[i];
      double count = 0.0;
      if (mean > 0.0) {
        boost::random::poisson_distribution<long long, double> poisson(mean);
        count = static_cast<double>(poisson(rng));
      }
      out[i] = count;
      err[i] = std::sqrt(count);
    }
  }
  AxisMeta meta = model.meta();
  meta.provenance += (meta.provenance.empty() ? "" : " ") + std::string("noise=") +
                     (noise.kind == NoiseKind::gaussian_additive ? "gaussian" : "poisson") +
                     " seed=" + std::to_string(noise.seed);
  return Trace({model.x().begin(), model.x().end()}, std::move(out), std::move(err), std::move(meta));
}

SParamTrace synthesize(const SParamTrace& model, const NoiseSpec& noise) {
  if (!(noise.scale >= 0.0)) throw DomainError("noise scale must be >= 0");
  if (noise.kind != NoiseKind::gaussian_additive) {
    throw DomainError("complex traces support gaussian_additive noise only");
  }
  if (noise.scale == 0.0) return model;
  std::mt19937_64 rng(noise.seed);
  boost::random::normal_distribution<double> normal(0.0, noise.scale);
  std::vector<std::complex<double>> s(model.s().begin(), model.s().end());
  for (auto& v : s) {
    const double re = normal(rng);
    const double im = normal(rng);
    v += std::complex<double>(re, im);
  }
  AxisMeta meta = model.meta();
  meta.provenance += (meta.provenance.empty() ? "" : " ") + std::string("noise=gaussian seed=") +
                     std::to_string(noise.seed);
  return SParamTrace({model.f().begin(), model.f().end()}, std::move(s), std::move(meta));
}

}  // namespace sawlab::estimate
