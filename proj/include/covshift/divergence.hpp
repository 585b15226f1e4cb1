#pragma once

#include <functional>

#include <Eigen/Dense>

#include "covshift/distribution.hpp"

namespace covshift {

using LogDensityFn = std::function<double(const Eigen::VectorXd&)>;

/// Monte-Carlo estimate together with its standard error.
struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
  bool high_variance = false;
};

LogDensityFn log_density_fn(const Distribution& dist);

/// (E_{x~q} |p(x)/p_hat(x) - 1|^s)^{1/s}; ratios are formed in log domain
/// and a sampled point where p_hat vanishes is an error.
McEstimate q_divergence_mc(double s, const LogDensityFn& log_p_hat, const LogDensityFn& log_p,
                           const Distribution& q, int n, std::uint64_t seed);

/// Second-order discrepancy E_{x~p2} (p1(x)/p2(x))^2. Flagged high-variance
/// when the empirical second moment of the squared ratio exceeds 1e4.
McEstimate renyi_r2_mc(const LogDensityFn& log_p1, const Distribution& p2, int n,
                       std::uint64_t seed);

/// Plain L1 distance estimate E_{x~p} |p_hat(x)/p(x) - 1| = int |p_hat - p|.
McEstimate tv_l1_mc(const LogDensityFn& log_p_hat, const Distribution& p, int n,
                    std::uint64_t seed);

}  // namespace covshift
