#pragma once

#include <vector>

namespace sawlab::qd {

// Documented validity range of the evaluator.
inline constexpr double kBesselMaxArgument = 30.0;
inline constexpr int kBesselMaxOrder = 60;

// J_0(x) .. J_{n_max}(x) from one downward (Miller) recurrence normalised with
// J_0 + 2 * sum_k J_{2k} = 1. Absolute error <= 1e-10 for |x| <= 30, n <= 60.
// Throws DomainError outside that range.
std::vector<double> bessel_j_all(int n_max, double x);

// J_n(x) for n >= 0.
double bessel_j(int n, double x);

// J_n(x) for any integer n using J_{-n} = (-1)^n J_n.
double bessel_j_signed(int n, double x);

}  // namespace sawlab::qd
