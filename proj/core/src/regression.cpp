#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "sawlab/errors.hpp"
#include "sawlab/estimate.hpp"

namespace sawlab::estimate {

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

// Robust noise level of a row from successive differences.
double row_noise(std::span<const double> y) {
  std::vector<double> d(y.size() > 1 ? y.size() - 1 : 0);
  for (std::size_t i = 0; i + 1 < y.size(); ++i) d[i] = std::abs(y[i + 1] - y[i]);
  return median(std::move(d)) / (0.6745 * std::sqrt(2.0));
}

bool row_is_bright(std::span<const double> y) {
  const double mx = *std::max_element(y.begin(), y.end());
  const double med = median({y.begin(), y.end()});
  return mx - med > 0.0 && mx - med > 8.0 * row_noise(y);
}

struct Line {
  double slope, intercept, slope_sigma;
};

Line ordinary_line(const std::vector<double>& x, const std::vector<double>& y) {
  const double m = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= m;
  my /= m;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double rss = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (intercept + slope * x[i]);
    rss += r * r;
  }
  const double s2 = x.size() > 2 ? rss / (m - 2.0) : 0.0;
  return {slope, intercept, std::sqrt(s2 / sxx)};
}

}  // namespace

FitResult fit_loss_per_length(std::span<const double> gaps_m, std::span<const double> peak_db,
                              std::span<const double> errs_db) {
  if (gaps_m.size() != peak_db.size() || gaps_m.size() != errs_db.size()) {
    throw DomainError("gaps, peaks and errors must have equal length");
  }
  for (double e : errs_db) {
    if (!(e > 0.0)) throw DomainError("error bars must be > 0");
  }
  const std::set<double> distinct(gaps_m.begin(), gaps_m.end());
  if (distinct.size() < 2) throw FitError("rank deficiency: need at least two distinct gaps");

  double s = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < gaps_m.size(); ++i) {
    const double x = gaps_m[i] * 1e3;  // mm
    const double w = 1.0 / (errs_db[i] * errs_db[i]);
    s += w;
    sx += w * x;
    sy += w * peak_db[i];
    sxx += w * x * x;
    sxy += w * x * peak_db[i];
  }
  const double delta = s * sxx - sx * sx;
  if (!(delta > 1e-12 * s * sxx)) throw FitError("rank deficiency: gaps are not distinguishable");
  const double slope = (s * sxy - sx * sy) / delta;
  const double intercept = (sxx * sy - sx * sxy) / delta;

  double chi2 = 0.0;
  for (std::size_t i = 0; i < gaps_m.size(); ++i) {
    const double r = (peak_db[i] - intercept - slope * gaps_m[i] * 1e3) / errs_db[i];
    chi2 += r * r;
  }

  FitResult out;
  out.model = "loss_per_length";
  out.add("slope_db_per_mm", slope, std::sqrt(s / delta));
  out.add("intercept_db", intercept, std::sqrt(sxx / delta));
  out.residual_norm = std::sqrt(chi2);
  out.converged = true;
  out.n_iter = 0;
  return out;
}

SlopeComparison compare_slopes(const FitResult& a, const FitResult& b, double k) {
  const double d = a.value("slope_db_per_mm") - b.value("slope_db_per_mm");
  const double sa = a.sigma("slope_db_per_mm");
  const double sb = b.sigma("slope_db_per_mm");
  const double sigma = std::sqrt(sa * sa + sb * sb);
  const double z = sigma > 0 ? std::abs(d) / sigma : (d == 0 ? 0.0 : std::numeric_limits<double>::infinity());
  return {d, sigma, z, z <= k};
}

double track_peak(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 3) throw DomainError("track_peak needs matching rows of >= 3 samples");
  const auto idx = static_cast<std::size_t>(std::distance(y.begin(), std::max_element(y.begin(), y.end())));
  const double base = *std::min_element(y.begin(), y.end());
  const double half = base + 0.5 * (y[idx] - base);
  std::size_t l = idx, r = idx;
  while (l > 0 && y[l - 1] > half) --l;
  while (r + 1 < y.size() && y[r + 1] > half) ++r;

  double m0 = 0, m1 = 0;
  for (std::size_t i = l; i <= r; ++i) {
    const double w = y[i] - half;
    m0 += w;
    m1 += w * x[i];
  }
  const double centroid = m0 > 0 ? m1 / m0 : x[idx];
  const double width = std::max(x[std::min(r + 1, x.size() - 1)] - x[l > 0 ? l - 1 : 0], 1e-300);

  std::vector<double> wx, wy;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (std::abs(x[i] - centroid) <= 1.5 * width) {
      wx.push_back(x[i]);
      wy.push_back(y[i]);
    }
  }
  if (wx.size() < 8) return centroid;
  try {
    const LorentzianGuess g{centroid, 0.8 * width, y[idx] - base, base};
    const auto fit = fit_lorentzian(Trace(std::move(wx), std::move(wy)), g);
    const double c = fit.value("center");
    if (fit.converged && std::abs(c - centroid) < width) return c;
  } catch (const FitError&) {
  }
  return centroid;
}

StarkSlopeFit fit_stark_slope(const qd::BiasMap& map) {
  const std::size_t rows = map.bias.size();
  if (map.counts.size() != rows || map.row_plateau.size() != rows) {
    throw DomainError("bias map rows are inconsistent");
  }
  StarkSlopeFit out;
  out.fit.model = "stark_slope";
  out.tracked_peak.assign(rows, std::numeric_limits<double>::quiet_NaN());
  std::vector<bool> bright(rows, false);
  for (std::size_t i = 0; i < rows; ++i) {
    bright[i] = row_is_bright(map.counts[i]);
    if (bright[i]) out.tracked_peak[i] = track_peak(map.frequency, map.counts[i]);
  }

  for (std::size_t k = 0; k < map.plateaus.size(); ++k) {
    std::vector<double> bx, fy;
    for (std::size_t i = 0; i < rows; ++i) {
      if (bright[i] && map.row_plateau[i] == k) {
        bx.push_back(map.bias[i]);
        fy.push_back(out.tracked_peak[i]);
      }
    }
    if (bx.size() < 3) {
      out.fit.notes.push_back("plateau " + std::to_string(k) + " skipped: " + std::to_string(bx.size()) +
                              " usable rows (< 3)");
      continue;
    }
    const auto line = ordinary_line(bx, fy);
    out.plateaus.push_back({k, bx.size(), line.slope, line.slope_sigma, line.intercept});
    out.fit.add("slope_hz_per_v_p" + std::to_string(k), line.slope, line.slope_sigma);
  }
  if (out.plateaus.empty()) throw FitError("no plateau has 3 usable rows");
  out.fit.converged = true;

  // Jumps: bright/dark transitions and steps far from the typical Stark step.
  std::vector<double> steps;
  for (std::size_t i = 0; i + 1 < rows; ++i) {
    if (bright[i] && bright[i + 1]) steps.push_back(out.tracked_peak[i + 1] - out.tracked_peak[i]);
  }
  const double typical = median(steps);
  std::vector<double> dev;
  for (double s : steps) dev.push_back(std::abs(s - typical));
  const double span = map.frequency.back() - map.frequency.front();
  const double threshold = std::max({10.0 * 1.4826 * median(dev), 0.5 * std::abs(typical), 1e-3 * span});
  for (std::size_t i = 0; i + 1 < rows; ++i) {
    const double mid = 0.5 * (map.bias[i] + map.bias[i + 1]);
    if (bright[i] != bright[i + 1]) {
      out.discontinuities.push_back(mid);
    } else if (bright[i] && std::abs(out.tracked_peak[i + 1] - out.tracked_peak[i] - typical) > threshold) {
      out.discontinuities.push_back(mid);
    }
  }
  return out;
}

}  // namespace sawlab::estimate
