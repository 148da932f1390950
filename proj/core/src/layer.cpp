#include "sawlab/layer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sawlab/errors.hpp"

namespace sawlab::layer {

namespace {

void require_conductivity(double sigma_xx) {
  if (!(sigma_xx >= 0.0)) {
    throw DomainError("conductivity must be >= 0, got " + std::to_string(sigma_xx));
  }
}

// Tangents for a monotone piecewise-cubic Hermite interpolant
// (Fritsch-Carlson limiter on top of a weighted harmonic mean).
std::vector<double> monotone_tangents(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  std::vector<double> m(n, 0.0);
  if (n < 2) return m;
  std::vector<double> h(n - 1), d(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    h[k] = x[k + 1] - x[k];
    d[k] = (y[k + 1] - y[k]) / h[k];
  }
  m.front() = d.front();
  m.back() = d.back();
  for (std::size_t k = 1; k + 1 < n; ++k) {
    if (d[k - 1] * d[k] <= 0.0) {
      m[k] = 0.0;
    } else {
      const double w1 = 2.0 * h[k] + h[k - 1];
      const double w2 = h[k] + 2.0 * h[k - 1];
      m[k] = (w1 + w2) / (w1 / d[k - 1] + w2 / d[k]);
    }
  }
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (d[k] == 0.0) {
      m[k] = m[k + 1] = 0.0;
      continue;
    }
    const double a = m[k] / d[k];
    const double b = m[k + 1] / d[k];
    const double s = a * a + b * b;
    if (s > 9.0) {
      const double t = 3.0 / std::sqrt(s);
      m[k] = t * a * d[k];
      m[k + 1] = t * b * d[k];
    }
  }
  return m;
}

}  // namespace

void RelaxationCoeffs::validate() const {
  if (!(alpha2 > 0.0 && alpha2 < 1.0)) throw DomainError("alpha2 must lie in (0, 1)");
  if (!(sigma_m > 0.0)) throw DomainError("sigma_m must be > 0");
}

std::string_view to_string(Regime r) noexcept {
  switch (r) {
    case Regime::dielectric: return "dielectric";
    case Regime::crossover: return "crossover";
    case Regime::metallic: return "metallic";
  }
  return "unknown";
}

void K2Calibration::validate() const {
  if (anchors.empty()) throw ConfigError("k2_calibration: anchor list is empty");
  if (!(k2_bulk > 0.0 && k2_bulk < 1.0)) throw ConfigError("k2_calibration: k2_bulk must lie in (0, 1)");
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    const auto& a = anchors[i];
    if (!(a.depth > 0.0)) {
      throw ConfigError("k2_calibration: anchor " + std::to_string(i) + " depth must be > 0");
    }
    if (!(a.k2 > 0.0 && a.k2 <= k2_bulk)) {
      throw ConfigError("k2_calibration: anchor " + std::to_string(i) + " k2 must lie in (0, k2_bulk]");
    }
    if (i > 0) {
      if (!(a.depth > anchors[i - 1].depth)) {
        throw ConfigError("k2_calibration: anchor depths must be strictly increasing (anchor " +
                          std::to_string(i) + ")");
      }
      if (a.k2 < anchors[i - 1].k2) {
        throw ConfigError("k2_calibration: k2 must not decrease with depth (anchor " +
                          std::to_string(i) + ")");
      }
    }
  }
}

K2Calibration default_k2_calibration(double k2_bulk) {
  K2Calibration cal;
  cal.k2_bulk = k2_bulk;
  cal.anchors = {
      {50e-9, 0.1 * k2_bulk},
      {100e-9, 0.5 * k2_bulk},
      {360e-9, 5.5e-4},
      {500e-9, 7.0e-4},
  };
  return cal;
}

double velocity_shift_fraction(double sigma_xx, const RelaxationCoeffs& c) {
  require_conductivity(sigma_xx);
  const double x = sigma_xx / c.sigma_m;
  return 0.5 * c.alpha2 / (1.0 + x * x);
}

double attenuation_per_wavevector(double sigma_xx, const RelaxationCoeffs& c) {
  require_conductivity(sigma_xx);
  if (std::isinf(sigma_xx)) return 0.0;
  const double x = sigma_xx / c.sigma_m;
  // x / (1 + x^2) written to avoid overflow for very large x.
  const double ratio = x > 1.0 ? 1.0 / (x + 1.0 / x) : x / (1.0 + x * x);
  return 0.5 * c.alpha2 * ratio;
}

double attenuation_rate_hz(double sigma_xx, const RelaxationCoeffs& c, double frequency_hz) {
  if (!(frequency_hz > 0.0)) throw DomainError("frequency must be positive");
  return attenuation_per_wavevector(sigma_xx, c) * frequency_hz;
}

Regime regime_classify(double sigma_xx, const RelaxationCoeffs& c) {
  require_conductivity(sigma_xx);
  const double x = sigma_xx / c.sigma_m;
  if (x < 0.1) return Regime::dielectric;
  if (x > 10.0) return Regime::metallic;
  return Regime::crossover;
}

double k2_effective(double depth, const K2Calibration& cal) {
  if (!(depth >= 0.0)) throw DomainError("depth must be >= 0");
  cal.validate();
  const auto& a = cal.anchors;
  if (depth <= a.front().depth) return a.front().k2;
  if (depth > a.back().depth) return cal.k2_bulk;
  if (depth == a.back().depth) return a.back().k2;

  std::vector<double> lx(a.size()), y(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    lx[i] = std::log(a[i].depth);
    y[i] = a[i].k2;
  }
  const auto m = monotone_tangents(lx, y);
  const double t_log = std::log(depth);
  const auto it = std::upper_bound(lx.begin(), lx.end(), t_log);
  // log() can round up to the last anchor just below it.
  const std::size_t k =
      std::min(static_cast<std::size_t>(std::distance(lx.begin(), it)) - 1, a.size() - 2);
  if (depth == a[k].depth) return a[k].k2;

  const double h = lx[k + 1] - lx[k];
  const double t = (t_log - lx[k]) / h;
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1;
  const double h10 = t3 - 2 * t2 + t;
  const double h01 = -2 * t3 + 3 * t2;
  const double h11 = t3 - t2;
  const double v = h00 * y[k] + h10 * h * m[k] + h01 * y[k + 1] + h11 * h * m[k + 1];
  return std::clamp(v, y[k], y[k + 1]);
}

RelaxationCoeffs coeffs_for_stack(const LayerStack& stack, const MaterialParams& material,
                                  const K2Calibration& cal) {
  stack.validate();
  material.validate();
  return RelaxationCoeffs{k2_effective(stack.depth, cal), material.sigma_m};
}

double cpw_mismatch_reflected_fraction(double z_line, double z_ref) {
  if (!(z_line > 0.0) || !(z_ref > 0.0)) throw DomainError("impedances must be > 0");
  const double gamma = (z_line - z_ref) / (z_line + z_ref);
  return gamma * gamma;
}

}  // namespace sawlab::layer
