#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "covshift/distribution.hpp"
#include "covshift/divergence.hpp"

namespace covshift {

/// Bounded target function |f| <= 1, closed under serialization.
class TargetFunction {
 public:
  struct IndicatorHalfspace {
    Eigen::VectorXd w;
    double b = 0.0;
  };
  struct TanhCoordinate {
    int index = 0;
  };
  struct PlantedRkhs {
    KernelSpec kernel;
    Eigen::MatrixXd centers;  // columns
    Eigen::VectorXd alphas;
  };
  struct IndicatorBall {
    Eigen::VectorXd center;
    double radius = 0.0;
  };
  struct Zero {};

  using Variant = std::variant<IndicatorHalfspace, TanhCoordinate, PlantedRkhs, IndicatorBall, Zero>;

  TargetFunction(Variant v) : v_(std::move(v)) {}  // NOLINT(google-explicit-constructor)

  double operator()(const Eigen::VectorXd& x) const;
  const Variant& variant() const { return v_; }

 private:
  Variant v_;
};

struct ClosedFormTruth {
  double value = 0.0;
};
struct MonteCarloTruth {
  long budget = 10000000;
  std::uint64_t seed = 1;
};
using TruthSpec = std::variant<ClosedFormTruth, MonteCarloTruth>;

struct TailBoundHint {
  double bound = 0.0;    // B
  double epsilon = 0.0;  // allowed tail mass above B
};

struct AssumptionRecord {
  double mean_shift_norm = 0.0;
  double mean_tr_norm = 0.0;
  double sigma_tr_inv_op = 0.0;
  double sigma_inv_diff_frobenius = 0.0;
  double limit = 1.0;
  bool satisfied = true;
};

struct ExpfamTruth {
  Eigen::VectorXd theta_star;  // theta_te - theta_tr
  double s_star = 0.0;         // intercept of ln(p_te / p_tr)
};

/// One synthetic covariate-shift problem with a reproducible truth.
struct ScenarioSpec {
  std::string id;
  Distribution p_tr;
  Distribution p_te;
  TargetFunction f;
  TruthSpec truth;
  std::optional<TailBoundHint> tail_bound_hint;
  std::optional<AssumptionRecord> assumptions;
  std::optional<ExpfamTruth> expfam_truth;
  std::map<std::string, double> measurements;
  std::vector<std::string> flags;

  bool has_flag(const std::string& flag) const;
  /// |f| <= 1 spot check over 1e5 probe samples from both distributions.
  void validate_probe(std::uint64_t seed = 7) const;
};

struct GaussianScenarioOptions {
  std::string id = "gaussian";
  double assumption_limit = 1.0;
  bool warn_and_proceed = false;  // keep going when an assumption check fails
  long mc_budget = 10000000;
  std::uint64_t mc_seed = 1;
};

/// p_tr = N(0, cov_tr), p_te = N(mean_shift, cov_te). Indicator-halfspace
/// targets get a closed-form truth; anything else gets an oracle recipe.
ScenarioSpec make_gaussian_scenario(int d, const Eigen::VectorXd& mean_shift,
                                    const Eigen::MatrixXd& cov_tr, const Eigen::MatrixXd& cov_te,
                                    TargetFunction f, const GaussianScenarioOptions& opts = {});

/// Unit-covariance Gaussian mean family: p = N(theta, I). Ground-truth
/// classifier parameters (theta_star, s_star) ride along as metadata.
ScenarioSpec make_expfam_scenario(const Eigen::VectorXd& theta_tr, const Eigen::VectorXd& theta_te,
                                  TargetFunction f, const GaussianScenarioOptions& opts = {});

struct RkhsScenarioOptions {
  std::string id = "rkhs";
  long mc_budget = 10000000;
  std::uint64_t mc_seed = 1;
};

/// p_tr is the Gaussian base, p_te reweights it through the planted RKHS
/// log-ratio sum_i alphas_i K(centers_i, x).
ScenarioSpec make_rkhs_scenario(GaussianModel base, const KernelSpec& kernel,
                                const Eigen::MatrixXd& centers, const Eigen::VectorXd& alphas,
                                TargetFunction f, const RkhsScenarioOptions& opts = {});

/// Discrete three-atom pair demonstrating indistinguishability under a
/// heavy ratio tail: p_te(S) = 2 eps with p_tr(S) = 2 eps / B. Scenario A
/// has f = 1_S, scenario B has f = 0; the truths differ by exactly 2 eps.
std::pair<ScenarioSpec, ScenarioSpec> make_lower_bound_instance(double ratio_bound, double epsilon);

struct GroundTruth {
  double value = 0.0;
  double std_error = 0.0;
};

/// Closed form when available (zero standard error); otherwise direct
/// Monte Carlo on p_te with budget at least (3 / precision)^2.
GroundTruth ground_truth(const ScenarioSpec& scenario, double precision);
GroundTruth ground_truth(const ScenarioSpec& scenario, double precision, std::uint64_t seed);

/// Normal CDF used by the closed-form truths.
double normal_cdf(double z);

}  // namespace covshift
