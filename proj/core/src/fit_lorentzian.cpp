#include <algorithm>
#include <cmath>
#include <vector>

#include "sawlab/errors.hpp"
#include "sawlab/estimate.hpp"
#include "sawlab/least_squares.hpp"

namespace sawlab::estimate {

namespace {

double median(std::vector<double> v) {
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  double m = *mid;
  if (v.size() % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), mid));
  return m;
}

// Weights 1/sigma when every error bar is positive, else unit weights.
std::vector<double> weights_of(const Trace& t) {
  std::vector<double> w(t.size(), 1.0);
  if (const auto& e = t.y_err()) {
    if (std::all_of(e->begin(), e->end(), [](double s) { return s > 0.0; })) {
      for (std::size_t i = 0; i < w.size(); ++i) w[i] = 1.0 / (*e)[i];
    }
  }
  return w;
}

}  // namespace

LorentzianGuess guess_lorentzian(const Trace& t) {
  if (t.size() < 8) throw FitError("lorentzian fit needs at least 8 samples");
  const auto x = t.x();
  const auto y = t.y();
  const auto [mn, mx] = std::minmax_element(y.begin(), y.end());
  const double scale = std::max({1.0, std::abs(*mn), std::abs(*mx)});
  if (!(*mx - *mn > 1e-12 * scale)) throw FitError("no peak detected");

  // Baseline from the outer samples; the median is biased when the trace
  // covers only a few widths.
  const std::size_t edge = std::max<std::size_t>(2, y.size() / 20);
  std::vector<double> outer(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(edge));
  outer.insert(outer.end(), y.end() - static_cast<std::ptrdiff_t>(edge), y.end());
  const double base = median(std::move(outer));
  std::size_t idx = 0;
  for (std::size_t i = 1; i < y.size(); ++i) {
    if (std::abs(y[i] - base) > std::abs(y[idx] - base)) idx = i;
  }
  const double sign = y[idx] >= base ? 1.0 : -1.0;
  const double offset = sign > 0 ? *mn : *mx;
  const double amplitude = y[idx] - offset;
  const double half = offset + 0.5 * amplitude;

  auto crossing = [&](std::size_t a, std::size_t b) {
    const double fa = y[a] - half, fb = y[b] - half;
    if (fa == fb) return x[a];
    return x[a] + (x[b] - x[a]) * fa / (fa - fb);
  };
  std::optional<double> left, right;
  for (std::size_t i = idx; i > 0; --i) {
    if (sign * (y[i - 1] - half) <= 0.0) {
      left = crossing(i - 1, i);
      break;
    }
  }
  for (std::size_t i = idx; i + 1 < y.size(); ++i) {
    if (sign * (y[i + 1] - half) <= 0.0) {
      right = crossing(i, i + 1);
      break;
    }
  }

  const double span = x.back() - x.front();
  double center = x[idx];
  double fwhm;
  if (left && right) {
    fwhm = *right - *left;
    center = 0.5 * (*left + *right);
  } else if (left) {
    fwhm = 2.0 * (x[idx] - *left);
  } else if (right) {
    fwhm = 2.0 * (*right - x[idx]);
  } else {
    fwhm = 0.25 * span;
  }
  if (!(fwhm > 0.0)) fwhm = span / static_cast<double>(x.size());
  return {center, fwhm, amplitude, offset};
}

FitResult fit_lorentzian(const Trace& t, const std::optional<LorentzianGuess>& init) {
  const LorentzianGuess g = init ? *init : guess_lorentzian(t);
  if (t.size() < 8) throw FitError("lorentzian fit needs at least 8 samples");
  const auto x = t.x();
  const auto y = t.y();
  if (!(g.fwhm > 0.0) || g.amplitude == 0.0) throw FitError("invalid lorentzian initial guess");
  if (x.back() - x.front() < 2.0 * g.fwhm) {
    throw FitError("trace spans fewer than two estimated FWHM");
  }

  // Normalised coordinates keep all parameters O(1).
  const double x0 = g.center, xs = g.fwhm;
  const double y0 = g.offset, ys = g.amplitude;
  const std::size_t n = t.size();
  std::vector<double> u(n), v(n);
  for (std::size_t i = 0; i < n; ++i) {
    u[i] = (x[i] - x0) / xs;
    v[i] = (y[i] - y0) / ys;
  }
  const auto w = weights_of(t);
  const double wmax = *std::max_element(w.begin(), w.end());

  LsqProblem prob;
  prob.n_residuals = n;
  prob.residuals = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
    for (std::size_t i = 0; i < n; ++i) {
      const double z = 2.0 * (u[i] - p[0]) / p[1];
      r[static_cast<Eigen::Index>(i)] = (w[i] / wmax) * (p[3] + p[2] / (1.0 + z * z) - v[i]);
    }
  };
  prob.jacobian = [&](const Eigen::VectorXd& p, Eigen::MatrixXd& jac) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = static_cast<Eigen::Index>(i);
      const double z = 2.0 * (u[i] - p[0]) / p[1];
      const double q = 1.0 / (1.0 + z * z);
      const double s = w[i] / wmax;
      jac(row, 0) = s * 4.0 * p[2] * z * q * q / p[1];
      jac(row, 1) = s * 2.0 * p[2] * z * z * q * q / p[1];
      jac(row, 2) = s * q;
      jac(row, 3) = s;
    }
  };

  Eigen::VectorXd p0(4);
  p0 << 0.0, 1.0, 1.0, 0.0;
  const auto res = levenberg_marquardt(prob, p0);
  const auto& p = res.params;
  const auto sd = [&](int k) { return std::sqrt(std::max(0.0, res.covariance(k, k))); };
  // The guess can underestimate the width of a truncated peak; recheck.
  if (x.back() - x.front() < 2.0 * std::abs(xs * p[1])) {
    throw FitError("trace spans fewer than two fitted FWHM");
  }

  FitResult out;
  out.model = "lorentzian";
  out.add("center", x0 + xs * p[0], std::abs(xs) * sd(0));
  out.add("fwhm", std::abs(xs * p[1]), std::abs(xs) * sd(1));
  out.add("amplitude", ys * p[2], std::abs(ys) * sd(2));
  out.add("offset", y0 + ys * p[3], std::abs(ys) * sd(3));
  out.residual_norm = res.residual_norm * std::abs(ys) * wmax;
  out.converged = res.converged;
  out.n_iter = res.n_iter;
  if (!res.converged) out.flags.push_back("non_authoritative");
  return out;
}

}  // namespace sawlab::estimate
