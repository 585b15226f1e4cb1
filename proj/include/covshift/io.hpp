#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "covshift/density_ratio.hpp"
#include "covshift/harness.hpp"

namespace covshift {

/// Bad or unknown configuration input; maps to the usage exit code.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kFormatVersion = 1;

using json = nlohmann::json;

/// Throws ConfigError naming the first key not in the allowed set.
void require_keys(const json& j, std::initializer_list<const char*> allowed,
                  const std::string& context);

json kernel_to_json(const KernelSpec& kernel);
KernelSpec kernel_from_json(const json& j);

json distribution_to_json(const Distribution& dist);
Distribution distribution_from_json(const json& j);

json target_to_json(const TargetFunction& f);
TargetFunction target_from_json(const json& j);

json scenario_to_json(const ScenarioSpec& scenario);
ScenarioSpec scenario_from_json(const json& j);
ScenarioSpec load_scenario(const std::string& path);
void save_scenario(const ScenarioSpec& scenario, const std::string& path);

json run_config_to_json(const RunConfig& config);
RunConfig run_config_from_json(const json& j);

json plan_to_json(const ExperimentPlan& plan);
/// `base_dir` resolves scenario {"ref": ...} entries.
ExperimentPlan plan_from_json(const json& j, const std::string& base_dir = ".");
ExperimentPlan load_plan(const std::string& path);

/// Versioned fitted-model record; the exact closure variant cannot be saved.
json ratio_model_to_json(const DensityRatioModel& model);
DensityRatioModel ratio_model_from_json(const json& j);

void write_trials_csv(const std::string& path, const std::vector<TrialRecord>& records,
                      bool include_timing = false);

/// Summary row tagged with the run it came from, so report consolidation
/// can group by estimator and scenario.
struct SummaryRecord {
  std::string estimator;
  std::string scenario;
  SummaryRow row;
};

void write_summary_csv(const std::string& path, const std::vector<SummaryRow>& rows,
                       const std::string& estimator, const std::string& scenario);
std::vector<SummaryRecord> read_summary_csv(const std::string& path);

/// Sample dumps: one row per point, `dim` column then the coordinates, with
/// a trailing f_value column for labeled points.
void write_unlabeled_csv(const std::string& path, const Eigen::MatrixXd& points);
void write_labeled_csv(const std::string& path, const Eigen::MatrixXd& points,
                       const Eigen::VectorXd& f_values);

std::string format_double(double v);  // shortest round-trip decimal

json load_json_file(const std::string& path);
void save_json_file(const json& j, const std::string& path);

}  // namespace covshift
