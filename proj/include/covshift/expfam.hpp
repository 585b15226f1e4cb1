#pragma once

#include <functional>

#include <Eigen/Dense>

namespace covshift {

/// Exponential family p(x|theta) = h(x) exp(<theta, T(x)> - A(theta)).
struct ExponentialFamilySpec {
  int dim = 0;  // natural-parameter dimension D
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> sufficient_stat;
  std::function<double(const Eigen::VectorXd&)> log_base;
  std::function<double(const Eigen::VectorXd&)> log_partition;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd& theta, int n, std::uint64_t seed)> sampler;
};

double expfam_log_density(const ExponentialFamilySpec& family, const Eigen::VectorXd& theta,
                          const Eigen::VectorXd& x);

/// Gaussians with known unit covariance as an exponential family:
/// T(x) = x, theta = mean, A(theta) = |theta|^2 / 2, h = N(0, I) density.
ExponentialFamilySpec gaussian_mean_family(int d);

}  // namespace covshift
