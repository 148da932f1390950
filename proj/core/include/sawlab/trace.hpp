#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sawlab/errors.hpp"

namespace sawlab {

struct AxisMeta {
  std::string x_label = "x";
  std::string x_unit = "";
  std::string y_label = "y";
  std::string y_unit = "";
  std::string provenance = "";

  bool operator==(const AxisMeta&) const = default;
};

// Raised when a trace's abscissa is not strictly increasing. index() is the
// first sample i with x[i] <= x[i-1].
class TraceOrderError : public DomainError {
 public:
  TraceOrderError(const std::string& what, std::size_t index) : DomainError(what), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

// Ordered real samples (x, y[, y_err]). Immutable once built.
class Trace {
 public:
  Trace() = default;
  Trace(std::vector<double> x, std::vector<double> y, AxisMeta meta = {});
  Trace(std::vector<double> x, std::vector<double> y, std::vector<double> y_err, AxisMeta meta = {});

  std::span<const double> x() const noexcept { return x_; }
  std::span<const double> y() const noexcept { return y_; }
  const std::optional<std::vector<double>>& y_err() const noexcept { return y_err_; }
  const AxisMeta& meta() const noexcept { return meta_; }
  std::size_t size() const noexcept { return x_.size(); }
  bool empty() const noexcept { return x_.empty(); }

  // Same abscissa and metadata, new ordinate.
  Trace with_y(std::vector<double> y, std::optional<std::vector<double>> y_err = std::nullopt) const;
  Trace with_meta(AxisMeta meta) const;

  bool operator==(const Trace&) const = default;

 private:
  void validate() const;

  std::vector<double> x_;
  std::vector<double> y_;
  std::optional<std::vector<double>> y_err_;
  AxisMeta meta_;
};

// Complex S-parameter samples on a strictly increasing frequency grid.
class SParamTrace {
 public:
  SParamTrace() = default;
  SParamTrace(std::vector<double> f_hz, std::vector<std::complex<double>> s, AxisMeta meta = {});

  std::span<const double> f() const noexcept { return f_; }
  std::span<const std::complex<double>> s() const noexcept { return s_; }
  const AxisMeta& meta() const noexcept { return meta_; }
  std::size_t size() const noexcept { return f_.size(); }

  // |S|^2 as a real trace (linear power ratio).
  Trace power() const;

  bool operator==(const SParamTrace&) const = default;

 private:
  std::vector<double> f_;
  std::vector<std::complex<double>> s_;
  AxisMeta meta_;
};

// Throws TraceOrderError on the first non-increasing sample.
void require_strictly_increasing(std::span<const double> x);

// n evenly spaced points over [lo, hi], endpoints included.
std::vector<double> linspace(double lo, double hi, std::size_t n);
// n log-spaced points over [lo, hi]; both bounds must be positive.
std::vector<double> logspace(double lo, double hi, std::size_t n);

// Trapezoidal integral of y over x.
double trapezoid(std::span<const double> x, std::span<const double> y);

}  // namespace sawlab
