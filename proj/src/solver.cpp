#include "covshift/solver.hpp"

#include <algorithm>

namespace covshift {

SolverResult projected_gradient(
    const std::function<double(const Eigen::VectorXd&)>& loss,
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& gradient,
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& project,
    Eigen::VectorXd x0, const SolverOptions& opts) {
  SolverResult result;
  Eigen::VectorXd x = project(std::move(x0));
  double f = loss(x);
  double step = opts.init_step;
  double threshold = opts.tol;
  double window_start_loss = f;

  for (int it = 1; it <= opts.max_iters; ++it) {
    result.iterations = it;
    const Eigen::VectorXd g = gradient(x);
    const double pg_norm = (x - project(x - g)).norm();
    result.projected_gradient_norm = pg_norm;
    if (it == 1 && opts.tol_relative > 0.0)
      threshold = std::max(opts.tol, opts.tol_relative * pg_norm);
    if (pg_norm <= threshold) {
      result.converged = true;
      break;
    }

    step = std::min(step * 2.0, 1e12);
    bool accepted = false;
    while (step >= 1e-18) {
      Eigen::VectorXd cand = project(x - step * g);
      const double dx2 = (x - cand).squaredNorm();
      if (dx2 > 0.0) {
        const double fc = loss(cand);
        if (fc <= f - (opts.armijo_c / step) * dx2) {
          x = std::move(cand);
          f = fc;
          accepted = true;
          break;
        }
      }
      step *= opts.backtrack;
    }
    if (!accepted) {
      // No decreasing step exists at double precision; for a finite loss
      // this is numerical optimality, not failure.
      result.converged = std::isfinite(f);
      break;
    }

    if (opts.plateau_tol > 0.0 && it % opts.plateau_window == 0) {
      if (window_start_loss - f <= opts.plateau_tol * (1.0 + std::abs(f))) {
        result.converged = true;
        break;
      }
      window_start_loss = f;
    }
  }

  result.x = std::move(x);
  result.loss = f;
  return result;
}

}  // namespace covshift
