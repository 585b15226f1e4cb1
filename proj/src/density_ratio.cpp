#include "covshift/density_ratio.hpp"

#include <cmath>
#include <stdexcept>

namespace covshift {

namespace {
constexpr double kQMin = 1e-12;
}

double ratio_from_classifier_prob(double q, long* clamp_count) {
  if (std::isnan(q)) throw std::invalid_argument("ratio_from_classifier_prob: NaN probability");
  if (q < 0.0 || q > 1.0) throw std::invalid_argument("ratio_from_classifier_prob: probability outside [0, 1]");
  const double clamped = std::clamp(q, kQMin, 1.0 - kQMin);
  if (clamped != q && clamp_count != nullptr) ++*clamp_count;
  return 1.0 / clamped - 1.0;
}

DensityRatioModel DensityRatioModel::gaussian_ratio(GaussianModel numerator,
                                                    GaussianModel denominator) {
  if (numerator.dim() != denominator.dim())
    throw std::invalid_argument("gaussian_ratio: dimension mismatch");
  DensityRatioModel m;
  m.gaussian_ = std::make_shared<const GaussianRatio>(
      GaussianRatio{std::move(numerator), std::move(denominator)});
  return m;
}

DensityRatioModel DensityRatioModel::logistic(LogisticModel model, FeatureMap feature_map) {
  DensityRatioModel m;
  m.logistic_ = std::make_shared<const LogisticRatio>(
      LogisticRatio{std::move(model), std::move(feature_map)});
  return m;
}

DensityRatioModel DensityRatioModel::kernel_logistic(KernelLogisticModel model) {
  DensityRatioModel m;
  m.kernel_ = std::make_shared<const KernelLogisticModel>(std::move(model));
  return m;
}

DensityRatioModel DensityRatioModel::exact(LogRatioFn log_ratio) {
  DensityRatioModel m;
  m.exact_ = std::move(log_ratio);
  return m;
}

double DensityRatioModel::log_ratio(const Eigen::VectorXd& x) const {
  if (gaussian_) return log_density_ratio_gaussian(gaussian_->num, gaussian_->den, x);
  if (logistic_) {
    const Eigen::VectorXd z = logistic_->feature_map ? logistic_->feature_map(x) : x;
    return logistic_->model.score(z);
  }
  if (kernel_) return kernel_->score(x);
  if (exact_) return exact_(x);
  throw std::logic_error("DensityRatioModel: empty model");
}

Eigen::VectorXd DensityRatioModel::log_ratio_batch(const Eigen::MatrixXd& points) const {
  if (kernel_) return kernel_->score_batch(points);
  Eigen::VectorXd out(points.cols());
  for (Eigen::Index j = 0; j < points.cols(); ++j) out[j] = log_ratio(points.col(j));
  return out;
}

DensityRatioModel::Weight DensityRatioModel::weight(const Eigen::VectorXd& x) const {
  const double r = ratio(x);
  if (bound_ && r > *bound_) return {0.0, true};
  return {r, false};
}

const GaussianModel* DensityRatioModel::numerator() const {
  return gaussian_ ? &gaussian_->num : nullptr;
}

const GaussianModel* DensityRatioModel::denominator() const {
  return gaussian_ ? &gaussian_->den : nullptr;
}

const LogisticModel* DensityRatioModel::logistic_model() const {
  return logistic_ ? &logistic_->model : nullptr;
}

const KernelLogisticModel* DensityRatioModel::kernel_logistic_model() const {
  return kernel_ ? kernel_.get() : nullptr;
}

double evaluate_log_ratio(const DensityRatioModel& model, const Eigen::VectorXd& x) {
  return model.log_ratio(x);
}

DensityRatioModel truncate_ratio(DensityRatioModel model, double bound) {
  if (!(bound > 0.0)) throw std::invalid_argument("truncate_ratio: bound must be > 0");
  model.bound_ = bound;
  return model;
}

}  // namespace covshift
