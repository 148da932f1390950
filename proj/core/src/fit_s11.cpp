#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "sawlab/errors.hpp"
#include "sawlab/estimate.hpp"
#include "sawlab/least_squares.hpp"

namespace sawlab::estimate {

namespace {

using cplx = std::complex<double>;

double median(std::vector<double> v) {
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

// Half-level crossings of `dev` around its maximum at idx; returns width and
// centre, or nullopt when neither side crosses.
std::optional<std::pair<double, double>> half_width(std::span<const double> x,
                                                    const std::vector<double>& dev, std::size_t idx) {
  const double half = 0.5 * dev[idx];
  auto cross = [&](std::size_t a, std::size_t b) {
    const double fa = dev[a] - half, fb = dev[b] - half;
    return fa == fb ? x[a] : x[a] + (x[b] - x[a]) * fa / (fa - fb);
  };
  std::optional<double> l, r;
  for (std::size_t i = idx; i > 0; --i) {
    if (dev[i - 1] <= half) {
      l = cross(i - 1, i);
      break;
    }
  }
  for (std::size_t i = idx; i + 1 < dev.size(); ++i) {
    if (dev[i + 1] <= half) {
      r = cross(i, i + 1);
      break;
    }
  }
  if (l && r) return std::make_pair(*r - *l, 0.5 * (*l + *r));
  if (l) return std::make_pair(2.0 * (x[idx] - *l), x[idx]);
  if (r) return std::make_pair(2.0 * (*r - x[idx]), x[idx]);
  return std::nullopt;
}

double sd_of(const Eigen::MatrixXd& cov, const Eigen::VectorXd& grad) {
  const double v = grad.dot(cov * grad);
  return std::sqrt(std::max(0.0, v));
}

}  // namespace

FitResult fit_s11(const SParamTrace& t, const std::optional<S11Guess>& init) {
  const std::size_t n = t.size();
  if (n < 8) throw FitError("s11 fit needs at least 8 samples");
  const auto f = t.f();
  const auto s = t.s();

  S11Guess g{};
  if (init) {
    g = *init;
  } else {
    const std::size_t k = std::max<std::size_t>(2, n / 20);
    cplx bg{0.0, 0.0};
    for (std::size_t i = 0; i < k; ++i) bg += s[i] + s[n - 1 - i];
    bg /= static_cast<double>(2 * k);

    std::vector<double> dev(n), diffs(n - 1);
    for (std::size_t i = 0; i < n; ++i) dev[i] = std::norm(s[i] - bg);
    for (std::size_t i = 0; i + 1 < n; ++i) diffs[i] = std::abs(s[i + 1] - s[i]);
    const double noise = median(diffs) / 1.665;
    const auto idx = static_cast<std::size_t>(std::distance(dev.begin(), std::max_element(dev.begin(), dev.end())));
    if (!(std::sqrt(dev[idx]) > std::max(1e-9, 5.0 * noise))) throw FitError("no resonance detected");

    const auto hw = half_width(f, dev, idx);
    const double kt = hw ? hw->first : 0.25 * (f.back() - f.front());
    const double ke = std::min(0.95, 0.5 * std::sqrt(dev[idx])) * kt;
    g.f0 = hw ? hw->second : f[idx];
    g.kappa_ext = ke;
    g.kappa_int = std::max(kt - ke, 0.05 * kt);
    g.crosstalk = bg - 1.0;
  }
  const double kt0 = g.kappa_int + g.kappa_ext;
  if (!(kt0 > 0.0)) throw FitError("invalid s11 initial guess");
  if (f.back() - f.front() < 3.0 * kt0) {
    throw FitError("trace spans fewer than three estimated total linewidths");
  }

  const double f_ref = g.f0;
  std::vector<double> u(n);
  for (std::size_t i = 0; i < n; ++i) u[i] = (f[i] - f_ref) / kt0;

  LsqProblem prob;
  prob.n_residuals = 2 * n;
  prob.residuals = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
    const cplx xt{p[3], p[4]};
    for (std::size_t i = 0; i < n; ++i) {
      const cplx model = 1.0 - p[2] / cplx(0.5 * (p[1] + p[2]), u[i] - p[0]) + xt;
      const cplx d = model - s[i];
      r[static_cast<Eigen::Index>(2 * i)] = d.real();
      r[static_cast<Eigen::Index>(2 * i + 1)] = d.imag();
    }
  };
  prob.jacobian = [&](const Eigen::VectorXd& p, Eigen::MatrixXd& jac) {
    for (std::size_t i = 0; i < n; ++i) {
      const cplx den(0.5 * (p[1] + p[2]), u[i] - p[0]);
      const cplx inv2 = 1.0 / (den * den);
      const cplx dd = -p[2] * cplx(0.0, 1.0) * inv2;
      const cplx dki = 0.5 * p[2] * inv2;
      const cplx dke = -1.0 / den + 0.5 * p[2] * inv2;
      const cplx col[5] = {dd, dki, dke, {1.0, 0.0}, {0.0, 1.0}};
      const auto re = static_cast<Eigen::Index>(2 * i);
      for (int c = 0; c < 5; ++c) {
        jac(re, c) = col[c].real();
        jac(re + 1, c) = col[c].imag();
      }
    }
  };

  Eigen::VectorXd p0(5);
  p0 << (g.f0 - f_ref) / kt0, g.kappa_int / kt0, g.kappa_ext / kt0, g.crosstalk.real(), g.crosstalk.imag();
  const auto res = levenberg_marquardt(prob, p0);
  const auto& p = res.params;
  const auto& cov = res.covariance;

  const double f0 = f_ref + kt0 * p[0];
  const double ki = kt0 * p[1];
  const double ke = kt0 * p[2];
  auto unit = [](int k) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(5);
    e[k] = 1.0;
    return e;
  };

  FitResult out;
  out.model = "s11_resonator";
  out.add("f0", f0, kt0 * sd_of(cov, unit(0)));
  out.add("kappa_int", ki, kt0 * sd_of(cov, unit(1)));
  out.add("kappa_ext", ke, kt0 * sd_of(cov, unit(2)));
  out.add("crosstalk_re", p[3], sd_of(cov, unit(3)));
  out.add("crosstalk_im", p[4], sd_of(cov, unit(4)));

  // Q = f0 / kappa; gradients in normalised parameters.
  Eigen::VectorXd gq = Eigen::VectorXd::Zero(5);
  gq[0] = kt0 / ki;
  gq[1] = -f0 * kt0 / (ki * ki);
  out.add("q_int", f0 / ki, sd_of(cov, gq));
  gq.setZero();
  gq[0] = kt0 / ke;
  gq[2] = -f0 * kt0 / (ke * ke);
  out.add("q_ext", ke > 0.0 ? f0 / ke : std::numeric_limits<double>::infinity(), ke > 0.0 ? sd_of(cov, gq) : 0.0);
  const double ktot = ki + ke;
  gq.setZero();
  gq[0] = kt0 / ktot;
  gq[1] = gq[2] = -f0 * kt0 / (ktot * ktot);
  out.add("q_loaded", f0 / ktot, sd_of(cov, gq));

  out.residual_norm = res.residual_norm;
  out.converged = res.converged;
  out.n_iter = res.n_iter;
  if (!res.converged) out.flags.push_back("non_authoritative");
  if (!(ki > 0.0)) out.flags.push_back("unphysical_kappa_int");
  if (ke < 0.0) out.flags.push_back("unphysical_kappa_ext");
  return out;
}

FitResult fit_s11_power(const Trace& power, const std::optional<S11Guess>& init) {
  const std::size_t n = power.size();
  if (n < 8) throw FitError("s11 fit needs at least 8 samples");
  const auto f = power.x();
  const auto y = power.y();

  double f0g, ktg, pkg, bg;
  {
    const std::size_t k = std::max<std::size_t>(2, n / 20);
    double b = 0.0;
    for (std::size_t i = 0; i < k; ++i) b += y[i] + y[n - 1 - i];
    b /= static_cast<double>(2 * k);
    std::vector<double> dev(n), diffs(n - 1);
    for (std::size_t i = 0; i < n; ++i) dev[i] = b - y[i];
    for (std::size_t i = 0; i + 1 < n; ++i) diffs[i] = std::abs(y[i + 1] - y[i]);
    const double noise = median(diffs) / (0.6745 * std::sqrt(2.0));
    const auto idx = static_cast<std::size_t>(std::distance(dev.begin(), std::max_element(dev.begin(), dev.end())));
    if (!(dev[idx] > std::max(1e-9 * std::abs(b), 5.0 * noise))) throw FitError("no resonance detected");
    const auto hw = half_width(f, dev, idx);
    ktg = hw ? hw->first : 0.25 * (f.back() - f.front());
    f0g = hw ? hw->second : f[idx];
    bg = b;
    pkg = std::min(dev[idx] / b, 1.0) * 0.25 * ktg * ktg;
    if (init) {
      f0g = init->f0;
      ktg = init->kappa_int + init->kappa_ext;
      pkg = init->kappa_int * init->kappa_ext;
      bg = std::norm(1.0 + init->crosstalk);
    }
  }
  if (!(ktg > 0.0)) throw FitError("invalid s11 initial guess");
  if (f.back() - f.front() < 3.0 * ktg) {
    throw FitError("trace spans fewer than three estimated total linewidths");
  }

  const double kt0 = ktg;
  std::vector<double> u(n);
  for (std::size_t i = 0; i < n; ++i) u[i] = (f[i] - f0g) / kt0;

  LsqProblem prob;
  prob.n_residuals = n;
  prob.residuals = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
    for (std::size_t i = 0; i < n; ++i) {
      const double d = u[i] - p[0];
      const double model = p[3] * (1.0 - p[2] / (d * d + 0.25 * p[1] * p[1]));
      r[static_cast<Eigen::Index>(i)] = model - y[i];
    }
  };
  Eigen::VectorXd p0(4);
  p0 << 0.0, 1.0, pkg / (kt0 * kt0), bg;
  const auto res = levenberg_marquardt(prob, p0);
  const auto& p = res.params;
  const auto& cov = res.covariance;

  const double f0 = f0g + kt0 * p[0];
  const double kt = kt0 * std::abs(p[1]);
  const double pk = kt0 * kt0 * p[2];
  const double disc = kt * kt - 4.0 * pk;
  const double root = std::sqrt(std::max(0.0, disc));
  const double k_hi = 0.5 * (kt + root);
  const double k_lo = 0.5 * (kt - root);

  // Gradients of the roots in normalised (p1, p2).
  const double inf = std::numeric_limits<double>::infinity();
  double s_hi = inf, s_lo = inf;
  if (root > 0.0) {
    Eigen::VectorXd gh = Eigen::VectorXd::Zero(4), gl = Eigen::VectorXd::Zero(4);
    const double sgn = p[1] >= 0 ? 1.0 : -1.0;
    gh[1] = 0.5 * kt0 * sgn * (1.0 + kt / root);
    gh[2] = -kt0 * kt0 / root;
    gl[1] = 0.5 * kt0 * sgn * (1.0 - kt / root);
    gl[2] = kt0 * kt0 / root;
    s_hi = sd_of(cov, gh);
    s_lo = sd_of(cov, gl);
  }

  FitResult out;
  out.model = "s11_power";
  Eigen::VectorXd e0 = Eigen::VectorXd::Zero(4);
  e0[0] = 1.0;
  out.add("f0", f0, kt0 * sd_of(cov, e0));
  out.add("kappa_int", k_hi, s_hi);
  out.add("kappa_ext", k_lo, s_lo);
  const double b = std::max(p[3], 0.0);
  Eigen::VectorXd e3 = Eigen::VectorXd::Zero(4);
  e3[3] = 1.0;
  out.add("crosstalk", std::sqrt(b) - 1.0, b > 0 ? sd_of(cov, e3) / (2.0 * std::sqrt(b)) : inf);
  out.add("alt_kappa_int", k_lo, s_lo);
  out.add("alt_kappa_ext", k_hi, s_hi);
  out.add("q_int", k_hi > 0 ? f0 / k_hi : inf, k_hi > 0 ? f0 * s_hi / (k_hi * k_hi) : inf);
  out.add("alt_q_int", k_lo > 0 ? f0 / k_lo : inf, k_lo > 0 ? f0 * s_lo / (k_lo * k_lo) : inf);
  Eigen::VectorXd e1 = Eigen::VectorXd::Zero(4);
  e1[1] = 1.0;
  out.add("q_loaded", f0 / kt, f0 * kt0 * sd_of(cov, e1) / (kt * kt));

  out.residual_norm = res.residual_norm;
  out.converged = res.converged;
  out.n_iter = res.n_iter;
  if (!res.converged) out.flags.push_back("non_authoritative");
  if (disc > 1e-12 * kt * kt) {
    out.flags.push_back("two_solution");
    out.notes.push_back(
        "magnitude-only data cannot distinguish under- from over-coupling; primary = under-coupled "
        "(kappa_int > kappa_ext), alt_* = over-coupled");
  } else {
    out.flags.push_back("critical_coupling");
  }
  return out;
}

}  // namespace sawlab::estimate
