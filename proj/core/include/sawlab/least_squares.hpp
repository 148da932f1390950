#pragma once

#include <cstddef>
#include <functional>

#include <Eigen/Dense>

namespace sawlab::estimate {

struct LsqOptions {
  int max_iterations = 200;
  double step_tolerance = 1e-10;  // relative: |dp| <= tol * (|p| + tol)
  double initial_lambda = 1e-3;
  double lambda_up = 4.0;
  double lambda_down = 1.0 / 3.0;
  double lambda_max = 1e16;
  double jacobian_step = 1e-6;  // relative central-difference step
};

// Least-squares problem r(p) with optional analytic Jacobian. Parameters
// should be O(1); fitters normalise before calling.
struct LsqProblem {
  std::size_t n_residuals = 0;
  std::function<void(const Eigen::VectorXd& p, Eigen::VectorXd& r)> residuals;
  std::function<void(const Eigen::VectorXd& p, Eigen::MatrixXd& jac)> jacobian;
};

struct LsqResult {
  Eigen::VectorXd params;
  Eigen::MatrixXd covariance;  // residual-scaled (J^T J)^-1 at the optimum
  double residual_norm = 0.0;  // |r|
  bool converged = false;
  int n_iter = 0;
};

// Damped Gauss-Newton (Levenberg-Marquardt, Marquardt diagonal scaling).
// Accepted steps never increase |r|. Converged when the relative step drops
// below tolerance, when |r| hits zero, or when no damping level can reduce
// |r| further. Hitting max_iterations leaves converged = false and returns
// the best point found.
LsqResult levenberg_marquardt(const LsqProblem& problem, Eigen::VectorXd p0,
                              const LsqOptions& options = {});

// Central-difference Jacobian of problem.residuals.
void numeric_jacobian(const LsqProblem& problem, const Eigen::VectorXd& p, double rel_step,
                      Eigen::MatrixXd& jac);

}  // namespace sawlab::estimate
