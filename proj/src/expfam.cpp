#include "covshift/expfam.hpp"

#include <cmath>
#include <stdexcept>

#include "covshift/gaussian.hpp"

namespace covshift {

double expfam_log_density(const ExponentialFamilySpec& family, const Eigen::VectorXd& theta,
                          const Eigen::VectorXd& x) {
  if (theta.size() != family.dim)
    throw std::invalid_argument("expfam_log_density: parameter dimension mismatch");
  return family.log_base(x) + theta.dot(family.sufficient_stat(x)) - family.log_partition(theta);
}

ExponentialFamilySpec gaussian_mean_family(int d) {
  if (d < 1) throw std::invalid_argument("gaussian_mean_family: d must be >= 1");
  ExponentialFamilySpec family;
  family.dim = d;
  family.sufficient_stat = [](const Eigen::VectorXd& x) { return x; };
  family.log_base = [d](const Eigen::VectorXd& x) {
    return -0.5 * x.squaredNorm() - 0.5 * d * std::log(2.0 * M_PI);
  };
  family.log_partition = [](const Eigen::VectorXd& theta) { return 0.5 * theta.squaredNorm(); };
  family.sampler = [](const Eigen::VectorXd& theta, int n, std::uint64_t seed) {
    return GaussianModel::standard(theta).sample(n, seed);
  };
  return family;
}

}  // namespace covshift
