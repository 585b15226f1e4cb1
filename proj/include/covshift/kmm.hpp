#pragma once

#include <Eigen/Dense>

#include "covshift/estimators.hpp"
#include "covshift/kernel.hpp"
#include "covshift/kernel_logistic.hpp"
#include "covshift/solver.hpp"

namespace covshift {

struct KmmConfig {
  KernelSpec kernel = KernelSpec::rbf(1.0);
  double weight_bound = 20.0;   // per-weight cap B
  double mean_match_tol = 0.01; // allowed |sum(beta)/n - 1|
  double f_norm_bound = 1.0;    // M, naive plug-in only
  SolverOptions solver{.tol = 1e-9, .tol_relative = 1e-3, .max_iters = 1000};

  // Naive plug-in subgradient controls.
  int subgradient_iters = 500;
  double subgradient_scale = 1.0;  // multiplies the auto-calibrated c in c/sqrt(k)
  int support_cap = 2000;          // regressor support points; larger sets are subsampled
};

struct KmmResult {
  Eigen::VectorXd beta;
  double objective = 0.0;       // squared RKHS mean discrepancy, constant included
  int iterations = 0;
  bool converged = false;
  double feasibility_gap = 0.0;  // max violation over box and slab constraints
};

/// Match the reweighted training kernel mean to the test kernel mean over
/// the box {0 <= beta_i <= B} intersected with the mean-matching slab, by
/// projected gradient with a Dykstra projection onto the intersection.
KmmResult kmm_weights(const Eigen::MatrixXd& train_points, const Eigen::MatrixXd& test_points,
                      const KmmConfig& config);

struct NaivePluginFit {
  KernelLogisticModel regressor;  // f_hat(x) = sum_i gamma_i K(x_i, x)
  double objective = 0.0;         // L1 residual of the best iterate
  int iterations = 0;
  bool converged = false;
  std::uint64_t subsample_seed = 0;
};

/// L1 kernel regression min |K lambda - y|_1 over the RKHS ball of radius
/// f_norm_bound, by projected subgradient descent with step c/sqrt(k) and
/// best-iterate tracking.
NaivePluginFit naive_plugin_regress(const Eigen::MatrixXd& points, const Eigen::VectorXd& values,
                                    const KernelSpec& kernel, double f_norm_bound,
                                    const KmmConfig& config, std::uint64_t seed);

/// Fit f_hat on the labeled sample, return the plain mean of f_hat over the
/// unlabeled test points.
EstimateResult estimate_naive_plugin(const LabeledSample& labeled,
                                     const Eigen::MatrixXd& test_unlabeled,
                                     const KernelSpec& kernel, double f_norm_bound,
                                     const KmmConfig& config, std::uint64_t seed);

/// KMM end to end: weights on the labeled training points, then the
/// weighted mean of their f values.
EstimateResult estimate_kmm(const LabeledSample& labeled, const Eigen::MatrixXd& test_unlabeled,
                            const KmmConfig& config);

}  // namespace covshift
