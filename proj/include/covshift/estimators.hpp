#pragma once

#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "covshift/density_ratio.hpp"
#include "covshift/kernel.hpp"

namespace covshift {

/// Labeled draw: points are columns of x, f holds the matching f(x) values.
struct LabeledSample {
  Eigen::MatrixXd x;  // d x n
  Eigen::VectorXd f;  // n

  Eigen::Index count() const { return f.size(); }
  LabeledSample slice(Eigen::Index start, Eigen::Index len) const {
    return {x.middleCols(start, len), f.segment(start, len)};
  }
};

struct EstimatorConfig {
  double epsilon = 0.1;
  double delta = 0.1;
  double ratio_bound = 20.0;  // truncation threshold B

  // Batching for the median trick; zero means "derive from the constants".
  int batch_size = 0;   // m, derived as ceil(c_m / eps^2)
  int batch_count = 0;  // t, derived as the next odd >= c_t * ln(1/delta)
  double c_K = 4.0;
  double c_m = 4.0;
  double c_t = 18.0;

  bool truncate_plugin = false;  // optional truncation in the plug-in path (extension)

  // Classifier-pipeline knobs.
  double norm_bound = 10.0;  // parameter/RKHS ball radius during training
  KernelSpec kernel{};       // kernel-logistic pipeline
  bool klr_intercept = false;
  int klr_train_cap = 2000;  // classification-set ceiling; larger sides are subsampled
  SolverOptions solver{};
  // The representer coordinates make a tiny gradient-norm target
  // unreachable at useful Gram sizes, so the kernel path stops on a loss
  // plateau as well.
  SolverOptions klr_solver{
      .tol = 1e-8, .tol_relative = 3e-3, .plateau_tol = 2e-5, .max_iters = 2000};

  int resolved_batch_size() const;
  int resolved_batch_count() const;
  long fit_budget(int dim) const;  // K = ceil(c_K * d^2 / eps^2)
  void validate() const;
};

struct EstimateResult {
  double value = 0.0;
  std::vector<double> batch_means;
  long n_labeled_used = 0;
  long n_unlabeled_used = 0;
  long truncated_count = 0;
  std::map<std::string, double> diagnostics;
  std::optional<LogisticModel> fitted_logistic;
  std::optional<KernelLogisticModel> fitted_kernel_logistic;
};

/// Running tallies over the per-sample terms Z_i = r(x_i) f(x_i).
struct BatchTally {
  long truncated = 0;
  long count = 0;
  double z_min = std::numeric_limits<double>::infinity();
  double z_max = -std::numeric_limits<double>::infinity();
  double z_sum = 0.0;
  double z_sum_sq = 0.0;

  double variance() const {
    if (count == 0) return 0.0;
    const double mean = z_sum / static_cast<double>(count);
    return z_sum_sq / static_cast<double>(count) - mean * mean;
  }
};

/// (1/K) sum_i r(x_i) f(x_i), zero where the (possibly truncated) ratio
/// model truncates. Requires |f| <= 1 and reports offenders by index.
double weighted_batch_mean(const LabeledSample& batch, const DensityRatioModel& ratio,
                           BatchTally* tally = nullptr);

/// Middle order statistic; even counts average the two middle values.
double median_of_means(const std::vector<double>& batch_means);

/// Plug-in estimator: fit both Gaussians from the unlabeled sets, reweight
/// the labeled batches by the fitted density ratio, return the median of
/// the batch means. No truncation unless config.truncate_plugin is set.
EstimateResult estimate_gaussian_plugin(const Eigen::MatrixXd& train_unlabeled,
                                        const Eigen::MatrixXd& test_unlabeled,
                                        const std::vector<LabeledSample>& labeled_batches,
                                        const EstimatorConfig& config, bool isotropic);

/// Truncated-ratio estimator. With batch_count <= 1 this is the plain
/// single-batch average of the truncated terms; otherwise the labeled set
/// is split into batch_count contiguous batches and the median is returned.
EstimateResult estimate_truncated_ratio(const LabeledSample& labeled,
                                        const DensityRatioModel& ratio,
                                        const EstimatorConfig& config);

/// Classification pipeline: label train draws -1 and test draws +1 in
/// feature space T, fit constrained logistic regression, exponentiate the
/// affine score into a density ratio, truncate, and estimate.
EstimateResult estimate_via_logistic(const Eigen::MatrixXd& train_unlabeled,
                                     const Eigen::MatrixXd& test_unlabeled,
                                     const LabeledSample& labeled, const FeatureMap& feature_map,
                                     const EstimatorConfig& config, std::uint64_t seed);

/// Same pipeline through kernel logistic regression; the classification set
/// is subsampled to klr_train_cap points (seed recorded) before the dense
/// Gram solve.
EstimateResult estimate_via_kernel_logistic(const Eigen::MatrixXd& train_unlabeled,
                                            const Eigen::MatrixXd& test_unlabeled,
                                            const LabeledSample& labeled, const KernelSpec& kernel,
                                            double rkhs_norm_bound, const EstimatorConfig& config,
                                            std::uint64_t seed);

}  // namespace covshift
