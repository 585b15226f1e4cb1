#pragma once

#include <functional>

#include <Eigen/Dense>

namespace covshift {

struct SolverOptions {
  double tol = 1e-8;       // stop when the projected-gradient norm falls below
  double tol_relative = 0.0;  // additional stop at tol_relative * first pg norm
  double plateau_tol = 0.0;   // stop when the loss improvement over a window
  int plateau_window = 50;    // of accepted steps falls below this (relative)
  int max_iters = 50000;
  double armijo_c = 1e-4;
  double backtrack = 0.5;
  double init_step = 1.0;
};

struct SolverResult {
  Eigen::VectorXd x;
  double loss = 0.0;
  int iterations = 0;
  double projected_gradient_norm = 0.0;
  bool converged = false;
};

/// Projected gradient with Armijo backtracking. Accepted steps satisfy
/// f(x') <= f(x) - (c/step) * |x - x'|^2, so the loss sequence is
/// non-increasing. The certificate is |x - project(x - grad(x))| <= tol.
SolverResult projected_gradient(
    const std::function<double(const Eigen::VectorXd&)>& loss,
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& gradient,
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& project,
    Eigen::VectorXd x0, const SolverOptions& opts = {});

}  // namespace covshift
