#pragma once

#include <memory>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "covshift/gaussian.hpp"
#include "covshift/kernel.hpp"

namespace covshift {

/// Axis-aligned box with the uniform density.
struct UniformBox {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  UniformBox(Eigen::VectorXd lo_, Eigen::VectorXd hi_);
  Eigen::Index dim() const { return lo.size(); }
  double log_density(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd sample(int n, std::uint64_t seed) const;
};

/// Base distribution reweighted through an RKHS log-ratio
///   log_ratio(x) = sum_i alphas[i] * K(centers[i], x),
/// interpreted as log(base / target): the target upweights where the
/// log-ratio is negative. Sampling is rejection from the base with
/// acceptance exp(-log_ratio(x)) / exp(log_ratio_bound), clipped to [0, 1].
class RkhsReweightedModel {
 public:
  using Base = std::variant<GaussianModel, UniformBox>;

  RkhsReweightedModel(Base base, KernelSpec kernel, Eigen::MatrixXd centers,
                      Eigen::VectorXd alphas, double log_ratio_bound);

  Eigen::Index dim() const;
  const Base& base() const { return *base_; }
  const KernelSpec& kernel() const { return kernel_; }
  const Eigen::MatrixXd& centers() const { return centers_; }
  const Eigen::VectorXd& alphas() const { return alphas_; }
  double log_ratio_bound() const { return log_ratio_bound_; }

  double log_ratio(const Eigen::VectorXd& x) const;

  Eigen::MatrixXd sample(int n, std::uint64_t seed) const;

 private:
  std::shared_ptr<const Base> base_;
  KernelSpec kernel_;
  Eigen::MatrixXd centers_;  // columns
  Eigen::VectorXd alphas_;
  double log_ratio_bound_ = 0.0;
};

/// Finite support with explicit probabilities; atoms are columns.
struct DiscreteAtoms {
  Eigen::MatrixXd atoms;
  Eigen::VectorXd probs;

  DiscreteAtoms(Eigen::MatrixXd atoms_, Eigen::VectorXd probs_);
  Eigen::Index dim() const { return atoms.rows(); }
  Eigen::MatrixXd sample(int n, std::uint64_t seed) const;
  int atom_index(const Eigen::VectorXd& x) const;  // -1 when x is no atom
  double log_density(const Eigen::VectorXd& x) const;  // log pmf at the matching atom
};

/// Sampleable distribution used by scenarios; density evaluation is
/// available for every variant except the RKHS-reweighted one (its
/// normalizer has no closed form).
class Distribution {
 public:
  using Variant = std::variant<GaussianModel, UniformBox, RkhsReweightedModel, DiscreteAtoms>;

  Distribution(GaussianModel m) : v_(std::move(m)) {}          // NOLINT(google-explicit-constructor)
  Distribution(UniformBox m) : v_(std::move(m)) {}             // NOLINT(google-explicit-constructor)
  Distribution(RkhsReweightedModel m) : v_(std::move(m)) {}    // NOLINT(google-explicit-constructor)
  Distribution(DiscreteAtoms m) : v_(std::move(m)) {}          // NOLINT(google-explicit-constructor)

  Eigen::Index dim() const;
  Eigen::MatrixXd sample(int n, std::uint64_t seed) const;
  bool has_density() const;
  double log_density(const Eigen::VectorXd& x) const;

  const Variant& variant() const { return v_; }
  const GaussianModel* as_gaussian() const { return std::get_if<GaussianModel>(&v_); }
  const RkhsReweightedModel* as_rkhs() const { return std::get_if<RkhsReweightedModel>(&v_); }
  const DiscreteAtoms* as_discrete() const { return std::get_if<DiscreteAtoms>(&v_); }

 private:
  Variant v_;
};

}  // namespace covshift
