#pragma once

// Independent reference implementations and a small random-case generator
// used by the property tests.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

namespace sawlab::prop {

// J_n(x) from the ascending power series, summed in long double until the
// terms stop changing the sum.
inline double bessel_series(int n, double x) {
  long double half = static_cast<long double>(x) / 2.0L;
  long double term = 1.0L;
  for (int k = 1; k <= n; ++k) term *= half / k;
  long double sum = term;
  const long double h2 = half * half;
  for (int k = 1; k < 500; ++k) {
    term *= -h2 / (static_cast<long double>(k) * static_cast<long double>(k + n));
    sum += term;
    if (std::fabs(term) < 1e-30L * (1.0L + std::fabs(sum)) && k > 2) break;
  }
  return static_cast<double>(sum);
}

// Root of a monotone-bracketed function by plain bisection.
template <typename F>
double bisect(F f, double lo, double hi, int iterations = 200) {
  double flo = f(lo);
  for (int i = 0; i < iterations; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

inline double lorentzian(double x, double center, double fwhm, double amplitude, double offset) {
  const double u = 2.0 * (x - center) / fwhm;
  return offset + amplitude / (1.0 + u * u);
}

// Seeded case generator. Each property test owns one; the case index is
// reported on failure so a case can be replayed.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin() { return integer(0, 1) == 1; }
  std::uint64_t u64() { return rng_(); }

 private:
  std::mt19937_64 rng_;
};

inline std::string case_label(int i) { return "case " + std::to_string(i); }

}  // namespace sawlab::prop
