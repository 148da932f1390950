#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "sawlab/bessel.hpp"
#include "sawlab/errors.hpp"
#include "sawlab/estimate.hpp"
#include "sawlab/least_squares.hpp"

namespace sawlab::estimate {

namespace {

constexpr double kInvTwoPi = 0.5 / kPi;

// Orders needed so the discarded sideband weight stays below 1e-12.
int orders_for(const std::vector<double>& j) {
  double captured = j[0] * j[0];
  int n = 0;
  while (1.0 - captured > 1e-12 && n + 2 < static_cast<int>(j.size())) {
    ++n;
    captured += 2.0 * j[static_cast<std::size_t>(n)] * j[static_cast<std::size_t>(n)];
  }
  return std::max(n, 1);
}

double j1_over_j0_squared(double d) {
  const auto j = qd::bessel_j_all(1, d);
  return (j[1] * j[1]) / (j[0] * j[0]);
}

// delta in [0, 2.3] whose first-sideband to carrier ratio equals r.
double delta_from_ratio(double r) {
  if (!(r > 0.0)) return 0.05;
  double lo = 0.0, hi = 2.3;
  if (j1_over_j0_squared(hi) <= r) return hi;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (j1_over_j0_squared(mid) < r ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double interpolate(std::span<const double> x, std::span<const double> y, double at) {
  if (at <= x.front()) return y.front();
  if (at >= x.back()) return y.back();
  const auto it = std::upper_bound(x.begin(), x.end(), at);
  const std::size_t k = static_cast<std::size_t>(std::distance(x.begin(), it));
  const double t = (at - x[k - 1]) / (x[k] - x[k - 1]);
  return y[k - 1] + t * (y[k] - y[k - 1]);
}

}  // namespace

FitResult extract_modulation_index(const Trace& spectrum, double omega_m, const qd::FilterSpec& filt,
                                   double linewidth) {
  if (!(filt.fwhm > 0.0)) throw DomainError("filter fwhm must be > 0");
  if (!(linewidth >= 0.0)) throw DomainError("linewidth must be >= 0");
  if (!(omega_m > 0.5 * filt.fwhm)) throw FitError("insufficient sideband resolution");
  const std::size_t n = spectrum.size();
  if (n < 8) throw FitError("sideband fit needs at least 8 samples");

  const auto x = spectrum.x();
  const auto y = spectrum.y();
  const double ymax = *std::max_element(y.begin(), y.end());
  const double ymin = *std::min_element(y.begin(), y.end());
  if (!(ymax - ymin > 1e-12 * std::max(std::abs(ymax), std::abs(ymin)))) throw FitError("no peak detected");

  // Centroid of the baseline-subtracted spectrum: the comb is symmetric.
  double m0 = 0.0, m1 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = std::max(0.0, y[i] - ymin);
    m0 += w;
    m1 += w * x[i];
  }
  const double x_ref = m1 / m0;
  const double width = linewidth + filt.fwhm;
  const double spacing = omega_m / width;

  std::vector<double> u(n), v(n);
  for (std::size_t i = 0; i < n; ++i) {
    u[i] = (x[i] - x_ref) / width;
    v[i] = y[i] / ymax;
  }

  LsqProblem prob;
  prob.n_residuals = n;
  auto model_terms = [&](const Eigen::VectorXd& p, std::size_t i, const std::vector<double>& j, int orders,
                         double& value, double* grad) {
    double sum = 0.0, d_delta = 0.0, d_center = 0.0;
    for (int k = -orders; k <= orders; ++k) {
      const auto ak = static_cast<std::size_t>(std::abs(k));
      const double jk = j[ak];
      // d/d(delta) J_|k|^2 = 2 J_|k| J'_|k|, J'_0 = -J_1, J'_m = (J_{m-1} - J_{m+1}) / 2.
      const double djk = ak == 0 ? -j[1] : 0.5 * (j[ak - 1] - j[ak + 1]);
      const double z = u[i] - p[1] - k * spacing;
      const double den = z * z + 0.25;
      const double l = kInvTwoPi / den;
      sum += jk * jk * l;
      if (grad) {
        d_delta += 2.0 * jk * djk * l;
        d_center += jk * jk * kInvTwoPi * 2.0 * z / (den * den);
      }
    }
    value = p[3] + p[2] * sum;
    if (grad) {
      grad[0] = p[2] * d_delta;
      grad[1] = p[2] * d_center;
      grad[2] = sum;
      grad[3] = 1.0;
    }
  };
  auto bessels = [](double delta, std::vector<double>& j, int& orders) {
    if (!(std::abs(delta) <= 25.0)) return false;
    j = qd::bessel_j_all(qd::kBesselMaxOrder, delta);
    orders = orders_for(j);
    return true;
  };
  prob.residuals = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
    std::vector<double> j;
    int orders = 0;
    if (!bessels(p[0], j, orders)) {
      r.setConstant(std::numeric_limits<double>::quiet_NaN());
      return;
    }
    for (std::size_t i = 0; i < n; ++i) {
      double value;
      model_terms(p, i, j, orders, value, nullptr);
      r[static_cast<Eigen::Index>(i)] = value - v[i];
    }
  };
  prob.jacobian = [&](const Eigen::VectorXd& p, Eigen::MatrixXd& jac) {
    std::vector<double> j;
    int orders = 0;
    if (!bessels(p[0], j, orders)) {
      jac.setZero();
      return;
    }
    double g[4];
    for (std::size_t i = 0; i < n; ++i) {
      double value;
      model_terms(p, i, j, orders, value, g);
      for (int c = 0; c < 4; ++c) jac(static_cast<Eigen::Index>(i), c) = g[c];
    }
  };

  // Initial guesses: offset from the floor, area from the integral, delta
  // from the first-sideband to carrier height ratio plus two fallbacks.
  const double o0 = ymin / ymax;
  double area = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    area += 0.5 * (u[i] - u[i - 1]) * ((v[i] - o0) + (v[i - 1] - o0));
  }
  area = std::max(area, 1e-6);
  const double carrier = interpolate(x, y, x_ref) - ymin;
  const double side = 0.5 * (interpolate(x, y, x_ref - omega_m) + interpolate(x, y, x_ref + omega_m)) - ymin;
  const double ratio_delta = delta_from_ratio(carrier > 0 ? side / carrier : 0.0);

  std::vector<double> starts = {ratio_delta, 0.6, 1.6};
  LsqResult best;
  bool have = false;
  for (double d0 : starts) {
    Eigen::VectorXd p0(4);
    p0 << d0, 0.0, area, o0;
    LsqResult res;
    try {
      res = levenberg_marquardt(prob, p0);
    } catch (const FitError&) {
      continue;
    }
    if (!have || res.residual_norm < best.residual_norm) {
      best = std::move(res);
      have = true;
    }
  }
  if (!have) throw FitError("sideband fit failed for every starting point");

  const auto& p = best.params;
  const auto sd = [&](int k) { return std::sqrt(std::max(0.0, best.covariance(k, k))); };
  FitResult out;
  out.model = "phase_modulated_comb";
  out.add("delta", std::abs(p[0]), sd(0));
  out.add("center", x_ref + width * p[1], width * sd(1));
  out.add("amplitude", p[2] * ymax * width, sd(2) * ymax * width);
  out.add("offset", p[3] * ymax, sd(3) * ymax);

  // delta^2 with its own covariance: the sideband weights are smooth in
  // delta^2, so its error stays finite where d/d(delta) vanishes at zero.
  {
    const double q = p[0] * p[0];
    const double h = std::max(1e-6, 1e-4 * q);
    const double q_lo = std::max(0.0, q - h), q_hi = q + h;
    auto model_at = [&](double q_eval, Eigen::VectorXd& m) {
      Eigen::VectorXd pe = p;
      pe[0] = std::sqrt(q_eval);
      prob.residuals(pe, m);
    };
    Eigen::VectorXd r_lo(n), r_hi(n);
    model_at(q_lo, r_lo);
    model_at(q_hi, r_hi);
    Eigen::MatrixXd jac(n, 4);
    prob.jacobian(p, jac);
    jac.col(0) = (r_hi - r_lo) / (q_hi - q_lo);
    const double dof = static_cast<double>(n) - 4.0;
    const double s2 = best.residual_norm * best.residual_norm / dof;
    const Eigen::MatrixXd cov = (jac.transpose() * jac).completeOrthogonalDecomposition().pseudoInverse() * s2;
    out.add("delta_sq", q, std::sqrt(std::max(0.0, cov(0, 0))));
  }
  out.residual_norm = best.residual_norm * ymax;
  out.converged = best.converged;
  out.n_iter = best.n_iter;
  if (!best.converged) out.flags.push_back("non_authoritative");
  return out;
}

}  // namespace sawlab::estimate
