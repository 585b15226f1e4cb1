#include "covshift/divergence.hpp"

#include <cmath>
#include <stdexcept>

namespace covshift {

namespace {

struct Moments {
  double mean = 0.0;
  double se = 0.0;
  double second_moment = 0.0;
};

Moments sample_moments(const Eigen::VectorXd& values) {
  const double n = static_cast<double>(values.size());
  Moments m;
  m.mean = values.mean();
  m.second_moment = values.squaredNorm() / n;
  if (values.size() > 1) {
    const double var = (values.array() - m.mean).square().sum() / (n - 1.0);
    m.se = std::sqrt(var / n);
  }
  return m;
}

}  // namespace

LogDensityFn log_density_fn(const Distribution& dist) {
  if (!dist.has_density())
    throw std::invalid_argument("log_density_fn: distribution has no evaluable density");
  return [dist](const Eigen::VectorXd& x) { return dist.log_density(x); };
}

McEstimate q_divergence_mc(double s, const LogDensityFn& log_p_hat, const LogDensityFn& log_p,
                           const Distribution& q, int n, std::uint64_t seed) {
  if (!(s >= 1.0)) throw std::invalid_argument("q_divergence_mc: order must be >= 1");
  if (n < 1) throw std::invalid_argument("q_divergence_mc: n must be >= 1");

  const Eigen::MatrixXd samples = q.sample(n, seed);
  Eigen::VectorXd values(n);
  for (int j = 0; j < n; ++j) {
    const double lph = log_p_hat(samples.col(j));
    if (!std::isfinite(lph))
      throw std::runtime_error("q_divergence_mc: p_hat vanishes at a sampled point");
    const double ratio = std::exp(log_p(samples.col(j)) - lph);
    values[j] = std::pow(std::abs(ratio - 1.0), s);
  }

  const Moments m = sample_moments(values);
  McEstimate out;
  out.value = std::pow(m.mean, 1.0 / s);
  // Delta-method propagation through the 1/s power.
  out.std_error = m.mean > 0.0 ? m.se * std::pow(m.mean, 1.0 / s - 1.0) / s : m.se;
  return out;
}

McEstimate renyi_r2_mc(const LogDensityFn& log_p1, const Distribution& p2, int n,
                       std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("renyi_r2_mc: n must be >= 1");
  const Eigen::MatrixXd samples = p2.sample(n, seed);
  Eigen::VectorXd values(n);
  for (int j = 0; j < n; ++j) {
    const double lp2 = p2.log_density(samples.col(j));
    if (!std::isfinite(lp2))
      throw std::runtime_error("renyi_r2_mc: p2 vanishes at its own sample");
    values[j] = std::exp(2.0 * (log_p1(samples.col(j)) - lp2));
  }
  const Moments m = sample_moments(values);
  McEstimate out;
  out.value = m.mean;
  out.std_error = m.se;
  out.high_variance = m.second_moment > 1e4;
  return out;
}

McEstimate tv_l1_mc(const LogDensityFn& log_p_hat, const Distribution& p, int n,
                    std::uint64_t seed) {
  return q_divergence_mc(1.0, log_density_fn(p), log_p_hat, p, n, seed);
}

}  // namespace covshift
