#pragma once

#include <optional>
#include <stdexcept>

#include <Eigen/Dense>

namespace covshift {

// Covariance (or Gram) factorization failed even after jitter escalation.
class FactorizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Multivariate normal with an immutable, eagerly factorized covariance.
/// The isotropic flag pins the covariance to the identity.
class GaussianModel {
 public:
  GaussianModel(Eigen::VectorXd mean, Eigen::MatrixXd cov, bool isotropic = false);

  // Convenience: N(mean, I).
  static GaussianModel standard(Eigen::VectorXd mean);

  Eigen::Index dim() const { return mean_.size(); }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& cov() const { return cov_; }
  bool isotropic() const { return isotropic_; }

  double log_density(const Eigen::VectorXd& x) const;

  // (x - mean)' cov^{-1} (x - mean), through the jittered factorization.
  double mahalanobis_sq(const Eigen::VectorXd& x) const;

  // ln det(cov) of the (possibly jittered) factorization.
  double log_det() const;

  // Columns are samples; deterministic in (model, n, seed).
  Eigen::MatrixXd sample(int n, std::uint64_t seed) const;

  // Jitter added to make the Cholesky succeed; 0 when none was needed.
  double jitter_used() const { return jitter_used_; }

  Eigen::MatrixXd cov_inverse() const;

 private:
  void require_factorized() const;

  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
  bool isotropic_ = false;
  std::optional<Eigen::LLT<Eigen::MatrixXd>> llt_;  // empty if not factorizable
  Eigen::MatrixXd sample_factor_;                   // B with B B' = cov
  double log_det_ = 0.0;
  double jitter_used_ = 0.0;
};

struct GaussianFit {
  GaussianModel model;
  int dropped_samples = 0;  // 1 when an odd trailing sample was discarded
};

/// Fit mean and covariance from an even number of samples: the mean is the
/// average of the first half, the covariance comes from consecutive paired
/// differences over the whole set. Columns of `samples` are points.
GaussianFit fit_gaussian(const Eigen::MatrixXd& samples, bool isotropic = false);

/// log num(x) - log den(x) as one quadratic-form difference.
double log_density_ratio_gaussian(const GaussianModel& num, const GaussianModel& den,
                                  const Eigen::VectorXd& x);

double kl_gaussian(const GaussianModel& p, const GaussianModel& q);

/// sqrt(2 * min(KL(p||q), KL(q||p))) clamped to [0, 1].
double tv_upper_pinsker(const GaussianModel& p, const GaussianModel& q);

}  // namespace covshift
