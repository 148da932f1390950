#include "sawlab/trace.hpp"

#include <cmath>
#include <string>

namespace sawlab {

void require_strictly_increasing(std::span<const double> x) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i])) {
      throw TraceOrderError("x is not finite at index " + std::to_string(i), i);
    }
    if (i > 0 && !(x[i] > x[i - 1])) {
      throw TraceOrderError("x must be strictly increasing; first violation at index " +
                                std::to_string(i),
                            i);
    }
  }
}

Trace::Trace(std::vector<double> x, std::vector<double> y, AxisMeta meta)
    : x_(std::move(x)), y_(std::move(y)), meta_(std::move(meta)) {
  validate();
}

Trace::Trace(std::vector<double> x, std::vector<double> y, std::vector<double> y_err, AxisMeta meta)
    : x_(std::move(x)), y_(std::move(y)), y_err_(std::move(y_err)), meta_(std::move(meta)) {
  validate();
}

void Trace::validate() const {
  if (x_.size() != y_.size()) {
    throw DomainError("trace x and y lengths differ (" + std::to_string(x_.size()) + " vs " +
                      std::to_string(y_.size()) + ")");
  }
  require_strictly_increasing(x_);
  if (y_err_) {
    if (y_err_->size() != y_.size()) throw DomainError("trace y_err length differs from y");
    for (std::size_t i = 0; i < y_err_->size(); ++i) {
      if (!((*y_err_)[i] >= 0.0)) {
        throw DomainError("trace y_err must be >= 0; violated at index " + std::to_string(i));
      }
    }
  }
}

Trace Trace::with_y(std::vector<double> y, std::optional<std::vector<double>> y_err) const {
  if (y_err) return Trace(x_, std::move(y), std::move(*y_err), meta_);
  return Trace(x_, std::move(y), meta_);
}

Trace Trace::with_meta(AxisMeta meta) const {
  Trace out = *this;
  out.meta_ = std::move(meta);
  return out;
}

SParamTrace::SParamTrace(std::vector<double> f_hz, std::vector<std::complex<double>> s, AxisMeta meta)
    : f_(std::move(f_hz)), s_(std::move(s)), meta_(std::move(meta)) {
  if (f_.size() != s_.size()) throw DomainError("S-parameter trace f and s lengths differ");
  require_strictly_increasing(f_);
}

Trace SParamTrace::power() const {
  std::vector<double> p(s_.size());
  for (std::size_t i = 0; i < s_.size(); ++i) p[i] = std::norm(s_[i]);
  AxisMeta m = meta_;
  m.y_label = "|" + (m.y_label.empty() ? std::string("S") : m.y_label) + "|^2";
  m.y_unit = "";
  return Trace(f_, std::move(p), std::move(m));
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  if (n < 2) throw DomainError("linspace needs at least 2 points");
  if (!(hi > lo)) throw DomainError("linspace needs hi > lo");
  std::vector<double> out(n);
  const double m = static_cast<double>(n - 1);
  // Weighted form hits round values (e.g. 0 on a symmetric grid) exactly.
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i);
    out[i] = ((m - t) * lo + t * hi) / m;
  }
  return out;
}

std::vector<double> logspace(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0)) throw DomainError("logspace needs positive bounds");
  auto exps = linspace(std::log10(lo), std::log10(hi), n);
  for (auto& e : exps) e = std::pow(10.0, e);
  exps.front() = lo;
  exps.back() = hi;
  return exps;
}

double trapezoid(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DomainError("trapezoid: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) acc += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
  return acc;
}

}  // namespace sawlab
