#pragma once

#include <string>
#include <vector>

#include "covshift/estimators.hpp"
#include "covshift/kmm.hpp"
#include "covshift/scenario.hpp"

namespace covshift {

enum class EstimatorKind {
  Gauss,
  GaussIso,
  Truncated,
  Logistic,
  KernelLogistic,
  Kmm,
  NaivePlugin,
};

std::string to_string(EstimatorKind kind);
EstimatorKind estimator_from_string(const std::string& name);
std::vector<std::string> estimator_names();

/// Everything an estimator run needs beyond the samples.
struct RunConfig {
  EstimatorConfig estimator;
  KmmConfig kmm;
};

struct ExperimentPlan {
  std::string id = "plan";
  ScenarioSpec scenario;
  EstimatorKind estimator = EstimatorKind::Gauss;
  RunConfig config;
  std::vector<long> n_grid;
  int trials_per_n = 1;
  std::uint64_t root_seed = 0;
  double truth_precision = 0.01;  // oracle precision target

  void validate() const;
};

struct TrialRecord {
  long n = 0;
  int trial_index = 0;
  std::uint64_t seed = 0;
  double estimate = 0.0;
  double truth = 0.0;
  double abs_error = 0.0;
  long truncated_count = 0;
  double wall_ms = 0.0;
  bool converged = true;
  bool failed = false;
  std::string error;
};

/// One estimator run on fresh samples: n labeled draws from p_tr plus the
/// unlabeled budgets the estimator kind requires, all derived from `seed`.
EstimateResult run_single_trial(const ScenarioSpec& scenario, EstimatorKind kind,
                                const RunConfig& config, long n, std::uint64_t seed);

/// trials_per_n x |n_grid| records; per-trial seeds are derived from
/// (root_seed, n, trial_index), trials run on a pool of `threads` workers,
/// and the output order is (n, trial_index) regardless of scheduling.
std::vector<TrialRecord> run_plan(const ExperimentPlan& plan, int threads = 1);

struct SummaryRow {
  long n = 0;
  int trials = 0;
  int failed = 0;
  bool valid = false;  // false when every trial failed
  double median_abs_error = 0.0;
  double p10_abs_error = 0.0;
  double p90_abs_error = 0.0;
  double success_rate = 0.0;  // fraction with abs_error <= epsilon
  double epsilon = 0.0;
  double mean_truncated_fraction = 0.0;
};

/// Per-n order statistics. The median follows the median_of_means even/odd
/// convention; the 10th/90th percentiles use nearest rank.
std::vector<SummaryRow> summarize(const std::vector<TrialRecord>& records, double epsilon);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  int points = 0;
};

/// Least squares of ln(median abs_error) on ln(n) over the valid rows.
SlopeFit fit_loglog_slope(const std::vector<SummaryRow>& summary);

}  // namespace covshift
