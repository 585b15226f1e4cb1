#pragma once

#include <Eigen/Dense>

#include "covshift/solver.hpp"

namespace covshift {

/// Binary classification sample: feature columns and labels in {-1, +1}.
struct LabeledDataset {
  Eigen::MatrixXd z;  // D x n
  Eigen::VectorXd y;  // n

  Eigen::Index count() const { return y.size(); }
  Eigen::Index feature_dim() const { return z.rows(); }
  void validate(bool require_both_labels = true) const;
};

struct TrainInfo {
  int iterations = 0;
  double final_loss = 0.0;
  double projected_gradient_norm = 0.0;
  bool converged = false;
};

/// Affine logistic classifier Pr[y | x] = 1 / (1 + exp(-y (<theta, z> + s)))
/// with theta and s constrained to a ball of radius norm_bound.
struct LogisticModel {
  Eigen::VectorXd theta;
  double intercept = 0.0;
  double norm_bound = 0.0;
  TrainInfo info;

  double score(const Eigen::VectorXd& z) const { return theta.dot(z) + intercept; }
};

struct NllValue {
  double loss = 0.0;
  Eigen::VectorXd grad_theta;
  double grad_intercept = 0.0;
};

/// Average negative log-likelihood and its exact gradient, evaluated with
/// the sign-branched log1p form.
NllValue nll_loss_grad(const Eigen::VectorXd& theta, double intercept,
                       const LabeledDataset& data);

struct LogisticTrainOptions {
  SolverOptions solver;
  bool fit_intercept = true;
};

/// Constrained empirical NLL minimization over {|theta| <= B, |s| <= B} by
/// projected gradient. A run that exhausts max_iters returns the best
/// iterate with converged = false.
LogisticModel train_logistic(const LabeledDataset& data, double norm_bound,
                             const LogisticTrainOptions& opts = {});

}  // namespace covshift
