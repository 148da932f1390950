#include "sawlab/bessel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sawlab/errors.hpp"

namespace sawlab::qd {

namespace {

void check_range(int n, double x) {
  if (n < 0 || n > kBesselMaxOrder) {
    throw DomainError("bessel_j: order " + std::to_string(n) + " outside [0, 60]");
  }
  if (!(std::abs(x) <= kBesselMaxArgument)) {
    throw DomainError("bessel_j: |x| must be <= 30");
  }
}

}  // namespace

std::vector<double> bessel_j_all(int n_max, double x) {
  check_range(n_max, x);
  std::vector<double> out(static_cast<std::size_t>(n_max) + 1, 0.0);
  const double ax = std::abs(x);

  if (ax < 1e-6) {
    // Two leading series terms; the next one is O(x^4) relative.
    const double h = 0.5 * ax;
    double term = 1.0;  // (x/2)^n / n!
    for (int n = 0; n <= n_max; ++n) {
      if (n > 0) term *= h / n;
      out[static_cast<std::size_t>(n)] = term * (1.0 - h * h / (n + 1));
      if (term == 0.0) break;
    }
  } else {
    const double top = std::max(static_cast<double>(n_max), ax);
    int start = static_cast<int>(top + 30.0 + std::sqrt(160.0 * top));
    start += start % 2;  // even, so the normalisation sum sees J_start

    constexpr double kBig = 1e250;
    const double two_over_x = 2.0 / ax;
    double j_next = 0.0;  // J_{k+1}
    double j_k = 1.0;  // arbitrary seed for J_start
    double norm = 0.0;
    for (int k = start; k >= 0; --k) {
      if (k <= n_max) out[static_cast<std::size_t>(k)] = j_k;
      if (k > 0 && k % 2 == 0) norm += 2.0 * j_k;
      if (k == 0) norm += j_k;
      if (k == 0) break;
      const double j_prev = k * two_over_x * j_k - j_next;
      j_next = j_k;
      j_k = j_prev;
      if (std::abs(j_k) > kBig) {
        const double s = 1.0 / kBig;
        j_k *= s;
        j_next *= s;
        norm *= s;
        for (auto& v : out) v *= s;
      }
    }
    for (auto& v : out) v /= norm;
  }

  if (x < 0.0) {
    for (std::size_t n = 1; n < out.size(); n += 2) out[n] = -out[n];
  }
  return out;
}

double bessel_j(int n, double x) {
  check_range(n, x);
  return bessel_j_all(n, x)[static_cast<std::size_t>(n)];
}

double bessel_j_signed(int n, double x) {
  if (n >= 0) return bessel_j(n, x);
  const double v = bessel_j(-n, x);
  return (n % 2 == 0) ? v : -v;
}

}  // namespace sawlab::qd
