#pragma once

#include <Eigen/Dense>

#include "covshift/kernel.hpp"
#include "covshift/logistic.hpp"

namespace covshift {

/// Score function f(x) = sum_i gammas[i] K(support_points[:,i], x) + intercept
/// with RKHS norm sqrt(gamma' K gamma) bounded by rkhs_norm_bound.
struct KernelLogisticModel {
  Eigen::MatrixXd support_points;  // d x n
  Eigen::VectorXd gammas;
  KernelSpec kernel;
  double intercept = 0.0;
  double rkhs_norm_bound = 0.0;
  double rkhs_norm = 0.0;
  TrainInfo info;

  double score(const Eigen::VectorXd& x) const;
  /// Scores for a batch of points (columns), computed blockwise.
  Eigen::VectorXd score_batch(const Eigen::MatrixXd& points) const;
};

struct KernelLogisticTrainOptions {
  SolverOptions solver;
  bool fit_intercept = false;  // constants need not lie in the RKHS
  int support_cap = 20000;     // dense Gram ceiling
};

/// Representer-reduced kernel logistic regression: minimize the empirical
/// NLL of sign margins y_i (K gamma + s)_i over the RKHS ball
/// {gamma' K gamma <= B^2} by projected gradient; violating iterates are
/// rescaled back onto the ball.
KernelLogisticModel train_kernel_logistic(const Eigen::MatrixXd& points,
                                          const Eigen::VectorXd& labels,
                                          const KernelSpec& kernel, double rkhs_norm_bound,
                                          const KernelLogisticTrainOptions& opts = {});

}  // namespace covshift
