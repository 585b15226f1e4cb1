#include "covshift/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "covshift/rng.hpp"

namespace covshift {

int EstimatorConfig::resolved_batch_size() const {
  if (batch_size > 0) return batch_size;
  return static_cast<int>(std::ceil(c_m / (epsilon * epsilon)));
}

int EstimatorConfig::resolved_batch_count() const {
  if (batch_count > 0) return batch_count;
  int t = static_cast<int>(std::ceil(c_t * std::log(1.0 / delta)));
  t = std::max(t, 1);
  if (t % 2 == 0) ++t;
  return t;
}

long EstimatorConfig::fit_budget(int dim) const {
  return static_cast<long>(std::ceil(c_K * dim * dim / (epsilon * epsilon)));
}

void EstimatorConfig::validate() const {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("config: epsilon must be in (0, 1)");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("config: delta must be in (0, 1)");
  if (!(ratio_bound > 0.0)) throw std::invalid_argument("config: ratio_bound must be > 0");
  if (resolved_batch_size() < 1 || resolved_batch_count() < 1)
    throw std::invalid_argument("config: batch size and count must be >= 1");
}

double weighted_batch_mean(const LabeledSample& batch, const DensityRatioModel& ratio,
                           BatchTally* tally) {
  const Eigen::Index n = batch.count();
  if (n == 0) throw std::invalid_argument("weighted_batch_mean: empty batch");
  if (batch.x.cols() != n) throw std::invalid_argument("weighted_batch_mean: shape mismatch");

  std::vector<Eigen::Index> offenders;
  for (Eigen::Index i = 0; i < n; ++i)
    if (!(std::abs(batch.f[i]) <= 1.0 + 1e-9)) offenders.push_back(i);
  if (!offenders.empty()) {
    std::ostringstream os;
    os << "weighted_batch_mean: |f| > 1 at indices";
    for (std::size_t k = 0; k < offenders.size() && k < 16; ++k) os << ' ' << offenders[k];
    if (offenders.size() > 16) os << " ...";
    throw std::invalid_argument(os.str());
  }

  const Eigen::VectorXd log_ratios = ratio.log_ratio_batch(batch.x);
  const bool bounded = ratio.has_bound();
  const double bound = bounded ? ratio.bound() : 0.0;

  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double w = std::exp(log_ratios[i]);
    bool truncated = false;
    if (bounded && w > bound) {
      w = 0.0;
      truncated = true;
    }
    const double z = w * batch.f[i];
    sum += z;
    if (tally != nullptr) {
      ++tally->count;
      if (truncated) ++tally->truncated;
      tally->z_min = std::min(tally->z_min, z);
      tally->z_max = std::max(tally->z_max, z);
      tally->z_sum += z;
      tally->z_sum_sq += z * z;
    }
  }
  return sum / static_cast<double>(n);
}

double median_of_means(const std::vector<double>& batch_means) {
  if (batch_means.empty()) throw std::invalid_argument("median_of_means: empty input");
  for (double v : batch_means)
    if (std::isnan(v)) throw std::invalid_argument("median_of_means: NaN entry");
  std::vector<double> sorted = batch_means;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t t = sorted.size();
  if (t % 2 == 1) return sorted[t / 2];
  return 0.5 * (sorted[t / 2 - 1] + sorted[t / 2]);
}

EstimateResult estimate_gaussian_plugin(const Eigen::MatrixXd& train_unlabeled,
                                        const Eigen::MatrixXd& test_unlabeled,
                                        const std::vector<LabeledSample>& labeled_batches,
                                        const EstimatorConfig& config, bool isotropic) {
  config.validate();
  if (train_unlabeled.cols() != test_unlabeled.cols())
    throw std::invalid_argument("estimate_gaussian_plugin: unlabeled sets must have equal size");
  if (train_unlabeled.rows() != test_unlabeled.rows())
    throw std::invalid_argument("estimate_gaussian_plugin: dimension mismatch");
  if (labeled_batches.empty())
    throw std::invalid_argument("estimate_gaussian_plugin: need at least one labeled batch");

  const GaussianFit fit_tr = fit_gaussian(train_unlabeled, isotropic);
  const GaussianFit fit_te = fit_gaussian(test_unlabeled, isotropic);

  DensityRatioModel ratio = DensityRatioModel::gaussian_ratio(fit_te.model, fit_tr.model);
  if (config.truncate_plugin) ratio = truncate_ratio(ratio, config.ratio_bound);

  EstimateResult result;
  BatchTally tally;
  for (const LabeledSample& batch : labeled_batches) {
    result.batch_means.push_back(weighted_batch_mean(batch, ratio, &tally));
    result.n_labeled_used += batch.count();
  }
  result.value = median_of_means(result.batch_means);
  result.n_unlabeled_used = 2 * train_unlabeled.cols();
  result.truncated_count = tally.truncated;
  result.diagnostics["dropped_samples"] =
      static_cast<double>(fit_tr.dropped_samples + fit_te.dropped_samples);
  result.diagnostics["jitter_tr"] = fit_tr.model.jitter_used();
  result.diagnostics["jitter_te"] = fit_te.model.jitter_used();
  result.diagnostics["z_variance"] = tally.variance();
  if (config.truncate_plugin) result.diagnostics["truncation_extension"] = 1.0;
  return result;
}

EstimateResult estimate_truncated_ratio(const LabeledSample& labeled,
                                        const DensityRatioModel& ratio,
                                        const EstimatorConfig& config) {
  config.validate();
  const Eigen::Index total = labeled.count();
  if (total < 1) throw std::invalid_argument("estimate_truncated_ratio: empty labeled set");

  const DensityRatioModel bounded =
      ratio.has_bound() ? ratio : truncate_ratio(ratio, config.ratio_bound);

  EstimateResult result;
  BatchTally tally;
  const int t = std::max(1, config.batch_count);  // single batch unless boosting is on
  if (t > total)
    throw std::invalid_argument("estimate_truncated_ratio: fewer labeled samples than batches");
  if (t == 1) {
    result.batch_means.push_back(weighted_batch_mean(labeled, bounded, &tally));
  } else {
    // Contiguous slices in arrival order; the remainder widens the leading batches.
    const Eigen::Index base = total / t;
    const Eigen::Index extra = total % t;
    Eigen::Index start = 0;
    for (int b = 0; b < t; ++b) {
      const Eigen::Index len = base + (b < extra ? 1 : 0);
      result.batch_means.push_back(weighted_batch_mean(labeled.slice(start, len), bounded, &tally));
      start += len;
    }
  }
  result.value = median_of_means(result.batch_means);
  result.n_labeled_used = total;
  result.truncated_count = tally.truncated;
  result.diagnostics["z_min"] = tally.z_min;
  result.diagnostics["z_max"] = tally.z_max;
  result.diagnostics["z_variance"] = tally.variance();
  result.diagnostics["truncated_fraction"] =
      static_cast<double>(tally.truncated) / static_cast<double>(tally.count);
  return result;
}

namespace {

// Balanced classification set: train columns labeled -1, test labeled +1.
// The larger side is subsampled to match the smaller.
LabeledDataset build_classification_set(const Eigen::MatrixXd& train_features,
                                        const Eigen::MatrixXd& test_features, int cap,
                                        std::uint64_t seed, long* per_class_out) {
  const int n_tr = static_cast<int>(train_features.cols());
  const int n_te = static_cast<int>(test_features.cols());
  if (n_tr < 1 || n_te < 1)
    throw std::invalid_argument("classification pipeline: both sample sets must be nonempty");
  int per_class = std::min(n_tr, n_te);
  if (cap > 0) per_class = std::min(per_class, std::max(1, cap / 2));

  const std::vector<int> tr_idx = subsample_indices(n_tr, per_class, derive_seed(seed, 1));
  const std::vector<int> te_idx = subsample_indices(n_te, per_class, derive_seed(seed, 2));

  const Eigen::Index d = train_features.rows();
  LabeledDataset data;
  data.z.resize(d, 2 * per_class);
  data.y.resize(2 * per_class);
  for (int i = 0; i < per_class; ++i) {
    data.z.col(i) = train_features.col(tr_idx[static_cast<std::size_t>(i)]);
    data.y[i] = -1.0;
    data.z.col(per_class + i) = test_features.col(te_idx[static_cast<std::size_t>(i)]);
    data.y[per_class + i] = 1.0;
  }
  if (per_class_out != nullptr) *per_class_out = per_class;
  return data;
}

Eigen::MatrixXd map_features(const FeatureMap& feature_map, const Eigen::MatrixXd& points) {
  if (!feature_map) return points;
  const Eigen::Index n = points.cols();
  if (n == 0) return points;
  const Eigen::VectorXd first = feature_map(points.col(0));
  Eigen::MatrixXd out(first.size(), n);
  out.col(0) = first;
  for (Eigen::Index j = 1; j < n; ++j) out.col(j) = feature_map(points.col(j));
  return out;
}

}  // namespace

EstimateResult estimate_via_logistic(const Eigen::MatrixXd& train_unlabeled,
                                     const Eigen::MatrixXd& test_unlabeled,
                                     const LabeledSample& labeled, const FeatureMap& feature_map,
                                     const EstimatorConfig& config, std::uint64_t seed) {
  config.validate();
  long per_class = 0;
  const LabeledDataset data = build_classification_set(
      map_features(feature_map, train_unlabeled), map_features(feature_map, test_unlabeled),
      /*cap=*/0, seed, &per_class);

  LogisticTrainOptions train_opts;
  train_opts.solver = config.solver;
  const LogisticModel model = train_logistic(data, config.norm_bound, train_opts);

  const DensityRatioModel ratio =
      truncate_ratio(DensityRatioModel::logistic(model, feature_map), config.ratio_bound);

  EstimateResult result = estimate_truncated_ratio(labeled, ratio, config);
  result.n_unlabeled_used = 2 * per_class;
  result.diagnostics["solver_iterations"] = model.info.iterations;
  result.diagnostics["solver_converged"] = model.info.converged ? 1.0 : 0.0;
  result.diagnostics["solver_final_loss"] = model.info.final_loss;
  result.diagnostics["theta_norm"] = model.theta.norm();
  result.diagnostics["intercept"] = model.intercept;
  result.fitted_logistic = model;
  return result;
}

EstimateResult estimate_via_kernel_logistic(const Eigen::MatrixXd& train_unlabeled,
                                            const Eigen::MatrixXd& test_unlabeled,
                                            const LabeledSample& labeled, const KernelSpec& kernel,
                                            double rkhs_norm_bound, const EstimatorConfig& config,
                                            std::uint64_t seed) {
  config.validate();
  long per_class = 0;
  const LabeledDataset data = build_classification_set(train_unlabeled, test_unlabeled,
                                                       config.klr_train_cap, seed, &per_class);

  KernelLogisticTrainOptions train_opts;
  train_opts.solver = config.klr_solver;
  train_opts.fit_intercept = config.klr_intercept;
  const KernelLogisticModel model =
      train_kernel_logistic(data.z, data.y, kernel, rkhs_norm_bound, train_opts);

  const DensityRatioModel ratio =
      truncate_ratio(DensityRatioModel::kernel_logistic(model), config.ratio_bound);

  EstimateResult result = estimate_truncated_ratio(labeled, ratio, config);
  result.n_unlabeled_used = 2 * per_class;
  result.diagnostics["solver_iterations"] = model.info.iterations;
  result.diagnostics["solver_converged"] = model.info.converged ? 1.0 : 0.0;
  result.diagnostics["solver_final_loss"] = model.info.final_loss;
  result.diagnostics["rkhs_norm"] = model.rkhs_norm;
  result.diagnostics["intercept"] = model.intercept;
  result.diagnostics["class_set_per_side"] = static_cast<double>(per_class);
  result.fitted_kernel_logistic = model;
  return result;
}

}  // namespace covshift
