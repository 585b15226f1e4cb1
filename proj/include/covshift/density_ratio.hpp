#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <optional>

#include <Eigen/Dense>

#include "covshift/gaussian.hpp"
#include "covshift/kernel_logistic.hpp"
#include "covshift/logistic.hpp"

namespace covshift {

using FeatureMap = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using LogRatioFn = std::function<double(const Eigen::VectorXd&)>;

/// Invert a classifier probability q = Pr(y = -1 | x) into a density ratio
/// r = 1/q - 1, with q clamped into [1e-12, 1 - 1e-12] first. The counter,
/// when given, is bumped on every clamping event.
double ratio_from_classifier_prob(double q, long* clamp_count = nullptr);

/// Evaluable importance-weight function r(x) >= 0, optionally truncated:
/// when a bound B is set, weights above B evaluate to zero.
class DensityRatioModel {
 public:
  static DensityRatioModel gaussian_ratio(GaussianModel numerator, GaussianModel denominator);
  static DensityRatioModel logistic(LogisticModel model, FeatureMap feature_map);
  static DensityRatioModel kernel_logistic(KernelLogisticModel model);
  static DensityRatioModel exact(LogRatioFn log_ratio);

  double log_ratio(const Eigen::VectorXd& x) const;
  double ratio(const Eigen::VectorXd& x) const { return std::exp(log_ratio(x)); }

  /// Log ratios for a batch of points (columns); kernel models use a
  /// blocked Gram product instead of per-point evaluation.
  Eigen::VectorXd log_ratio_batch(const Eigen::MatrixXd& points) const;

  struct Weight {
    double value = 0.0;
    bool truncated = false;
  };
  Weight weight(const Eigen::VectorXd& x) const;

  bool has_bound() const { return bound_.has_value(); }
  double bound() const { return bound_.value(); }

  const GaussianModel* numerator() const;
  const GaussianModel* denominator() const;
  const LogisticModel* logistic_model() const;
  const KernelLogisticModel* kernel_logistic_model() const;

  friend DensityRatioModel truncate_ratio(DensityRatioModel model, double bound);

 private:
  DensityRatioModel() = default;

  struct GaussianRatio {
    GaussianModel num;
    GaussianModel den;
  };
  struct LogisticRatio {
    LogisticModel model;
    FeatureMap feature_map;
  };

  std::shared_ptr<const GaussianRatio> gaussian_;
  std::shared_ptr<const LogisticRatio> logistic_;
  std::shared_ptr<const KernelLogisticModel> kernel_;
  LogRatioFn exact_;
  std::optional<double> bound_;
};

double evaluate_log_ratio(const DensityRatioModel& model, const Eigen::VectorXd& x);

/// Wrap a ratio model with the truncation threshold B > 0.
DensityRatioModel truncate_ratio(DensityRatioModel model, double bound);

}  // namespace covshift
