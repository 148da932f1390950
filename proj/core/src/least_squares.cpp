#include "sawlab/least_squares.hpp"

#include <cmath>
#include <limits>

#include "sawlab/errors.hpp"

namespace sawlab::estimate {

void numeric_jacobian(const LsqProblem& problem, const Eigen::VectorXd& p, double rel_step,
                      Eigen::MatrixXd& jac) {
  const auto n = p.size();
  const auto m = static_cast<Eigen::Index>(problem.n_residuals);
  jac.resize(m, n);
  Eigen::VectorXd rp(m), rm(m);
  Eigen::VectorXd q = p;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double h = rel_step * std::max(1.0, std::abs(p[j]));
    q[j] = p[j] + h;
    problem.residuals(q, rp);
    q[j] = p[j] - h;
    problem.residuals(q, rm);
    q[j] = p[j];
    jac.col(j) = (rp - rm) / (2.0 * h);
  }
}

LsqResult levenberg_marquardt(const LsqProblem& problem, Eigen::VectorXd p0, const LsqOptions& options) {
  const auto n = p0.size();
  const auto m = static_cast<Eigen::Index>(problem.n_residuals);
  if (m < n) throw FitError("fewer residuals than parameters");

  auto eval_jac = [&](const Eigen::VectorXd& p, Eigen::MatrixXd& jac) {
    if (problem.jacobian) {
      jac.resize(m, n);
      problem.jacobian(p, jac);
    } else {
      numeric_jacobian(problem, p, options.jacobian_step, jac);
    }
  };

  LsqResult out;
  Eigen::VectorXd p = std::move(p0);
  Eigen::VectorXd r(m);
  problem.residuals(p, r);
  if (!r.allFinite()) throw FitError("residuals are not finite at the initial guess");
  double cost = r.squaredNorm();

  double lambda = options.initial_lambda;
  Eigen::MatrixXd jac;
  Eigen::VectorXd r_new(m);
  int iter = 0;
  bool converged = cost == 0.0;

  while (!converged && iter < options.max_iterations) {
    ++iter;
    eval_jac(p, jac);
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd g = jac.transpose() * r;
    Eigen::VectorXd diag = jtj.diagonal();
    const double dmax = std::max(diag.maxCoeff(), std::numeric_limits<double>::min());
    for (Eigen::Index j = 0; j < n; ++j) diag[j] = std::max(diag[j], 1e-12 * dmax);

    bool accepted = false;
    while (lambda <= options.lambda_max) {
      Eigen::MatrixXd a = jtj;
      a.diagonal() += lambda * diag;
      const Eigen::VectorXd step = a.ldlt().solve(-g);
      if (!step.allFinite()) {
        lambda *= options.lambda_up;
        continue;
      }
      const Eigen::VectorXd p_new = p + step;
      problem.residuals(p_new, r_new);
      const double cost_new = r_new.allFinite() ? r_new.squaredNorm()
                                                : std::numeric_limits<double>::infinity();
      if (cost_new < cost) {
        const bool small_step =
            step.norm() <= options.step_tolerance * (p.norm() + options.step_tolerance);
        p = p_new;
        r.swap(r_new);
        cost = cost_new;
        lambda = std::max(lambda * options.lambda_down, 1e-15);
        accepted = true;
        if (small_step || cost == 0.0) converged = true;
        break;
      }
      lambda *= options.lambda_up;
    }
    if (!accepted) {
      // No damping level reduces the residual: p is a minimum to working
      // precision.
      converged = true;
    }
  }

  out.params = p;
  out.residual_norm = std::sqrt(cost);
  out.converged = converged;
  out.n_iter = iter;

  eval_jac(p, jac);
  const Eigen::MatrixXd jtj = jac.transpose() * jac;
  const double dof = static_cast<double>(m - n);
  const double s2 = dof > 0 ? cost / dof : 0.0;
  out.covariance = jtj.completeOrthogonalDecomposition().pseudoInverse() * s2;
  return out;
}

}  // namespace sawlab::estimate
