// Command-line front end: scenario generation, single estimates, benchmark
// grids, and report consolidation over summary files.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "covshift/harness.hpp"
#include "covshift/io.hpp"
#include "covshift/rng.hpp"

namespace {

using namespace covshift;

constexpr const char* kVersion = "1.0.0";

// Ratio-tail and discrepancy measurements attached to generated scenarios.
void attach_measurements(ScenarioSpec& scenario, double tail_bound, std::uint64_t seed) {
  constexpr int kProbe = 100000;
  if (scenario.p_tr.has_density() && scenario.p_te.has_density()) {
    const Distribution& p_tr = scenario.p_tr;
    const Distribution& p_te = scenario.p_te;
    const Eigen::MatrixXd samples = p_te.sample(kProbe, derive_seed(seed, 0x7a11));
    long above = 0;
    for (int j = 0; j < kProbe; ++j) {
      const double log_ratio = p_te.log_density(samples.col(j)) - p_tr.log_density(samples.col(j));
      if (log_ratio > std::log(tail_bound / 4.0)) ++above;
    }
    scenario.measurements["tail_fraction_at_B_over_4"] =
        static_cast<double>(above) / static_cast<double>(kProbe);
    scenario.measurements["tail_bound_B"] = tail_bound;

    const McEstimate r2 =
        renyi_r2_mc(log_density_fn(p_tr), p_te, kProbe, derive_seed(seed, 0x52f2));
    scenario.measurements["r2_tr_te"] = r2.value;
    scenario.measurements["r2_tr_te_se"] = r2.std_error;
  }
  const GaussianModel* g_tr = scenario.p_tr.as_gaussian();
  const GaussianModel* g_te = scenario.p_te.as_gaussian();
  if (g_tr != nullptr && g_te != nullptr)
    scenario.measurements["tv_upper_pinsker"] = tv_upper_pinsker(*g_te, *g_tr);
}

void report_scenario(const ScenarioSpec& scenario, const std::string& path) {
  std::cout << "wrote " << path << "\n";
  for (const auto& [key, value] : scenario.measurements)
    std::cout << "  " << key << " = " << value << "\n";
}

struct EstimateArgs {
  std::string scenario_path;
  std::string estimator;
  long n = 0;
  std::uint64_t seed = 0;
  std::string config_path;
  std::string model_out;
  std::string model_in;
  std::string record_out;
  std::string dump_labeled;
  double epsilon = -1.0;
  double ratio_bound = -1.0;
  int batch_size = -1;
  int batch_count = -1;
  double norm_bound = -1.0;
};

int run_estimate(const EstimateArgs& args) {
  if (args.n < 1) throw ConfigError("estimate: n must be >= 1");
  const EstimatorKind kind = estimator_from_string(args.estimator);
  ScenarioSpec scenario = load_scenario(args.scenario_path);

  RunConfig config;
  if (!args.config_path.empty()) config = run_config_from_json(load_json_file(args.config_path));
  // Flags override file values.
  if (args.epsilon > 0.0) config.estimator.epsilon = args.epsilon;
  if (args.ratio_bound > 0.0) {
    config.estimator.ratio_bound = args.ratio_bound;
    config.kmm.weight_bound = args.ratio_bound;
  }
  if (args.batch_size >= 0) config.estimator.batch_size = args.batch_size;
  if (args.batch_count >= 0) config.estimator.batch_count = args.batch_count;
  if (args.norm_bound > 0.0) config.estimator.norm_bound = args.norm_bound;
  config.estimator.validate();

  if (config.estimator.batch_size > 0 && config.estimator.batch_count > 0 &&
      static_cast<long>(config.estimator.batch_size) * config.estimator.batch_count > args.n)
    throw ConfigError("estimate: sample budget below minimum (batch_size * batch_count > n)");

  scenario.validate_probe(derive_seed(args.seed, 0xbeef));
  const GroundTruth truth = ground_truth(scenario, 0.01);

  const auto start = std::chrono::steady_clock::now();
  EstimateResult result;
  if (!args.model_in.empty()) {
    if (kind != EstimatorKind::Truncated)
      throw ConfigError("estimate: --model-in applies to the truncated estimator only");
    const DensityRatioModel model = ratio_model_from_json(load_json_file(args.model_in));
    LabeledSample labeled;
    labeled.x = scenario.p_tr.sample(static_cast<int>(args.n), derive_seed(args.seed, 1));
    labeled.f.resize(args.n);
    for (long j = 0; j < args.n; ++j) labeled.f[j] = scenario.f(labeled.x.col(j));
    if (!args.dump_labeled.empty()) write_labeled_csv(args.dump_labeled, labeled.x, labeled.f);
    result = estimate_truncated_ratio(labeled, model, config.estimator);
  } else {
    result = run_single_trial(scenario, kind, config, args.n, args.seed);
  }
  const double wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

  const double abs_error = std::abs(result.value - truth.value);
  std::cout << "estimator,scenario,n,seed,Z,truth,abs_error,truncated_count,wall_ms\n"
            << args.estimator << ',' << scenario.id << ',' << args.n << ',' << args.seed << ','
            << format_double(result.value) << ',' << format_double(truth.value) << ','
            << format_double(abs_error) << ',' << result.truncated_count << ','
            << format_double(wall_ms) << "\n";

  if (!args.model_out.empty()) {
    std::optional<DensityRatioModel> fitted;
    if (result.fitted_logistic)
      fitted = truncate_ratio(DensityRatioModel::logistic(*result.fitted_logistic, FeatureMap{}),
                              config.estimator.ratio_bound);
    else if (result.fitted_kernel_logistic)
      fitted = truncate_ratio(DensityRatioModel::kernel_logistic(*result.fitted_kernel_logistic),
                              config.estimator.ratio_bound);
    if (!fitted) throw ConfigError("estimate: this estimator does not produce a savable model");
    save_json_file(ratio_model_to_json(*fitted), args.model_out);
    std::cout << "model written to " << args.model_out << "\n";
  }

  if (!args.record_out.empty()) {
    json record{{"format_version", kFormatVersion},
                {"estimator", args.estimator},
                {"scenario", scenario.id},
                {"n", args.n},
                {"seed", args.seed},
                {"value", result.value},
                {"truth", truth.value},
                {"truth_std_error", truth.std_error},
                {"abs_error", abs_error},
                {"batch_means", result.batch_means},
                {"n_labeled_used", result.n_labeled_used},
                {"n_unlabeled_used", result.n_unlabeled_used},
                {"truncated_count", result.truncated_count},
                {"diagnostics", result.diagnostics},
                {"wall_ms", wall_ms}};
    save_json_file(record, args.record_out);
  }

  const auto it = result.diagnostics.find("solver_converged");
  if (it != result.diagnostics.end() && it->second == 0.0) {
    std::cerr << "solver failed to converge\n";
    return 3;
  }
  return 0;
}

struct BenchArgs {
  std::string plan_path;
  std::string out_dir;
  int threads = 1;
  bool timing = false;
};

int run_bench(const BenchArgs& args) {
  ExperimentPlan plan = load_plan(args.plan_path);
  std::filesystem::create_directories(args.out_dir);

  const std::vector<TrialRecord> records = run_plan(plan, args.threads);
  const std::vector<SummaryRow> summary = summarize(records, plan.config.estimator.epsilon);

  const std::string trials_path = args.out_dir + "/trials.csv";
  const std::string summary_path = args.out_dir + "/summary.csv";
  write_trials_csv(trials_path, records, args.timing);
  write_summary_csv(summary_path, summary, to_string(plan.estimator), plan.scenario.id);

  json report{{"format_version", kFormatVersion},
              {"provenance", std::string("covshift-") + kVersion + " plan=" + plan.id +
                                 " root_seed=" + std::to_string(plan.root_seed)},
              {"plan", plan.id},
              {"estimator", to_string(plan.estimator)},
              {"scenario", plan.scenario.id},
              {"config", run_config_to_json(plan.config)},
              {"n_grid", plan.n_grid},
              {"trials_per_n", plan.trials_per_n},
              {"root_seed", plan.root_seed}};
  if (!plan.scenario.measurements.empty())
    report["assumption_measurements"] = plan.scenario.measurements;

  json summary_json = json::array();
  for (const auto& row : summary)
    summary_json.push_back({{"n", row.n},
                            {"trials", row.trials},
                            {"failed", row.failed},
                            {"valid", row.valid},
                            {"median_abs_error", row.median_abs_error},
                            {"success_rate", row.success_rate}});
  report["summary"] = summary_json;

  int valid_rows = 0;
  for (const auto& row : summary)
    if (row.valid && row.median_abs_error > 0.0) ++valid_rows;
  if (valid_rows >= 3) {
    const SlopeFit fit = fit_loglog_slope(summary);
    report["slope_fit"] = {{"slope", fit.slope},
                           {"intercept", fit.intercept},
                           {"r_squared", fit.r_squared},
                           {"points", fit.points}};
  }
  save_json_file(report, args.out_dir + "/report.json");

  std::cout << "wrote " << trials_path << ", " << summary_path << ", " << args.out_dir
            << "/report.json\n";
  return 0;
}

struct ReportArgs {
  std::vector<std::string> summaries;
  std::string out_md;
  std::string out_csv;
  double target_rate = 0.9;
};

int run_report(const ReportArgs& args) {
  struct Group {
    std::string estimator;
    std::string scenario;
    std::vector<SummaryRow> rows;
  };
  std::vector<Group> groups;
  for (const std::string& path : args.summaries) {
    for (const SummaryRecord& rec : read_summary_csv(path)) {
      Group* group = nullptr;
      for (Group& g : groups)
        if (g.estimator == rec.estimator && g.scenario == rec.scenario) group = &g;
      if (group == nullptr) {
        groups.push_back({rec.estimator, rec.scenario, {}});
        group = &groups.back();
      }
      group->rows.push_back(rec.row);
    }
  }
  if (groups.empty()) throw ConfigError("report: no summary rows");

  struct Line {
    std::string estimator;
    std::string scenario;
    std::optional<double> n_needed;
    double max_rate = 0.0;
  };
  std::vector<Line> lines;
  for (Group& g : groups) {
    std::sort(g.rows.begin(), g.rows.end(),
              [](const SummaryRow& a, const SummaryRow& b) { return a.n < b.n; });
    Line line{g.estimator, g.scenario, std::nullopt, 0.0};
    for (std::size_t i = 0; i < g.rows.size(); ++i) {
      const SummaryRow& row = g.rows[i];
      if (!row.valid) continue;
      line.max_rate = std::max(line.max_rate, row.success_rate);
      if (row.success_rate >= args.target_rate && !line.n_needed) {
        if (i == 0 || !g.rows[i - 1].valid || g.rows[i - 1].success_rate >= args.target_rate) {
          line.n_needed = static_cast<double>(row.n);
        } else {
          // Monotone crossing interpolated in log n.
          const SummaryRow& lo = g.rows[i - 1];
          const double t =
              (args.target_rate - lo.success_rate) / (row.success_rate - lo.success_rate);
          line.n_needed = std::exp(std::log(static_cast<double>(lo.n)) +
                                   t * (std::log(static_cast<double>(row.n)) -
                                        std::log(static_cast<double>(lo.n))));
        }
      }
    }
    lines.push_back(std::move(line));
  }

  std::ostringstream md;
  md << "| estimator | scenario | n @ success>=" << args.target_rate << " | max rate |\n";
  md << "|---|---|---|---|\n";
  for (const Line& line : lines) {
    md << "| " << line.estimator << " | " << line.scenario << " | ";
    if (line.n_needed)
      md << static_cast<long>(std::llround(*line.n_needed));
    else
      md << "-";
    md << " | " << line.max_rate << " |\n";
  }
  std::cout << md.str();

  if (!args.out_md.empty()) {
    std::ofstream out(args.out_md);
    if (!out) throw std::runtime_error("cannot write '" + args.out_md + "'");
    out << md.str();
  }
  if (!args.out_csv.empty()) {
    std::ofstream out(args.out_csv);
    if (!out) throw std::runtime_error("cannot write '" + args.out_csv + "'");
    out << "estimator,scenario,n_needed,max_rate\n";
    for (const Line& line : lines) {
      out << line.estimator << ',' << line.scenario << ',';
      if (line.n_needed)
        out << format_double(*line.n_needed);
      else
        out << '-';
      out << ',' << format_double(line.max_rate) << '\n';
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"covariate-shifted mean estimation toolkit"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  // ---- scenario ----
  auto* scenario_cmd = app.add_subcommand("scenario", "generate a synthetic scenario file");
  scenario_cmd->require_subcommand(1);

  struct {
    int d = 1;
    double shift = 0.5;
    double te_var = 1.0;
    std::string f_kind = "halfspace";
    double assumption_limit = 1.0;
    bool warn_and_proceed = false;
    long mc_budget = 10000000;
    std::uint64_t mc_seed = 1;
    std::string id;
    std::string out;
    double tail_bound = 20.0;
  } gauss_args;
  auto* gauss_cmd = scenario_cmd->add_subcommand("gaussian", "Gaussian pair with a mean shift");
  gauss_cmd->add_option("--d", gauss_args.d, "dimension")->check(CLI::PositiveNumber);
  gauss_cmd->add_option("--shift", gauss_args.shift, "mean shift along the first axis");
  gauss_cmd->add_option("--te-var", gauss_args.te_var, "isotropic test variance");
  gauss_cmd->add_option("--f", gauss_args.f_kind, "target: halfspace | tanh")
      ->check(CLI::IsMember({"halfspace", "tanh"}));
  gauss_cmd->add_option("--assumption-limit", gauss_args.assumption_limit);
  gauss_cmd->add_flag("--warn-and-proceed", gauss_args.warn_and_proceed,
                      "keep going when closeness assumptions fail");
  gauss_cmd->add_option("--mc-budget", gauss_args.mc_budget);
  gauss_cmd->add_option("--mc-seed", gauss_args.mc_seed);
  gauss_cmd->add_option("--id", gauss_args.id);
  gauss_cmd->add_option("--tail-bound", gauss_args.tail_bound, "B used in the tail measurement");
  gauss_cmd->add_option("--out", gauss_args.out, "output scenario path")->required();

  struct {
    int d = 1;
    double theta_shift = 0.5;
    std::string f_kind = "halfspace";
    std::string id;
    std::string out;
  } expfam_args;
  auto* expfam_cmd =
      scenario_cmd->add_subcommand("expfam", "unit-covariance Gaussian mean family");
  expfam_cmd->add_option("--d", expfam_args.d)->check(CLI::PositiveNumber);
  expfam_cmd->add_option("--theta-shift", expfam_args.theta_shift,
                         "natural-parameter shift along the first axis");
  expfam_cmd->add_option("--f", expfam_args.f_kind)->check(CLI::IsMember({"halfspace", "tanh"}));
  expfam_cmd->add_option("--id", expfam_args.id);
  expfam_cmd->add_option("--out", expfam_args.out)->required();

  struct {
    double alpha = -0.8;
    double bandwidth = 1.0;
    double f_radius = 1.0;
    std::string id;
    std::string out;
  } rkhs_args;
  auto* rkhs_cmd = scenario_cmd->add_subcommand("rkhs", "RKHS-reweighted standard normal");
  rkhs_cmd->add_option("--alpha", rkhs_args.alpha, "log-ratio coefficient at the origin");
  rkhs_cmd->add_option("--bandwidth", rkhs_args.bandwidth)->check(CLI::PositiveNumber);
  rkhs_cmd->add_option("--f-radius", rkhs_args.f_radius, "target = indicator of |x| < radius");
  rkhs_cmd->add_option("--id", rkhs_args.id);
  rkhs_cmd->add_option("--out", rkhs_args.out)->required();

  struct {
    double bound = 100.0;
    double eps = 0.05;
    std::string out_a;
    std::string out_b;
  } lb_args;
  auto* lb_cmd = scenario_cmd->add_subcommand("lower-bound", "linked hard-instance pair");
  lb_cmd->add_option("--B", lb_args.bound)->required();
  lb_cmd->add_option("--eps", lb_args.eps)->required();
  lb_cmd->add_option("--out-a", lb_args.out_a, "scenario with f = 1_S")->required();
  lb_cmd->add_option("--out-b", lb_args.out_b, "scenario with f = 0")->required();

  // ---- estimate ----
  EstimateArgs est_args;
  auto* est_cmd = app.add_subcommand("estimate", "one estimate on a scenario");
  est_cmd->add_option("--scenario", est_args.scenario_path)->required();
  est_cmd->add_option("--estimator", est_args.estimator)->required();
  est_cmd->add_option("--n", est_args.n, "labeled sample budget")->required();
  est_cmd->add_option("--seed", est_args.seed)->envname("COVSHIFT_SEED");
  est_cmd->add_option("--config", est_args.config_path, "run-config JSON");
  est_cmd->add_option("--epsilon", est_args.epsilon);
  est_cmd->add_option("--ratio-bound", est_args.ratio_bound);
  est_cmd->add_option("--batch-size", est_args.batch_size);
  est_cmd->add_option("--batch-count", est_args.batch_count);
  est_cmd->add_option("--norm-bound", est_args.norm_bound);
  est_cmd->add_option("--model-out", est_args.model_out, "save the fitted ratio model");
  est_cmd->add_option("--model-in", est_args.model_in,
                      "ratio model to evaluate (truncated estimator)");
  est_cmd->add_option("--record-out", est_args.record_out, "structured result record");
  est_cmd->add_option("--dump-labeled", est_args.dump_labeled, "write the labeled draw as CSV");

  // ---- bench ----
  BenchArgs bench_args;
  auto* bench_cmd = app.add_subcommand("bench", "run an experiment plan");
  bench_cmd->add_option("--plan", bench_args.plan_path)->required();
  bench_cmd->add_option("--out", bench_args.out_dir)->required();
  bench_cmd->add_option("--threads", bench_args.threads)->check(CLI::PositiveNumber);
  bench_cmd->add_flag("--timing", bench_args.timing,
                      "include wall_ms in trials.csv (breaks byte-level determinism)");

  // ---- report ----
  ReportArgs report_args;
  auto* report_cmd = app.add_subcommand("report", "consolidate summaries into a comparison table");
  report_cmd->add_option("--summary", report_args.summaries, "summary.csv paths")
      ->required()
      ->expected(-1);
  report_cmd->add_option("--out-md", report_args.out_md);
  report_cmd->add_option("--out-csv", report_args.out_csv);
  report_cmd->add_option("--target-rate", report_args.target_rate);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (gauss_cmd->parsed()) {
      const int d = gauss_args.d;
      Eigen::VectorXd shift = Eigen::VectorXd::Zero(d);
      shift[0] = gauss_args.shift;
      TargetFunction f = gauss_args.f_kind == "tanh"
                             ? TargetFunction(TargetFunction::TanhCoordinate{0})
                             : TargetFunction(TargetFunction::IndicatorHalfspace{
                                   Eigen::VectorXd::Unit(d, 0), 0.0});
      GaussianScenarioOptions opts;
      opts.id = gauss_args.id.empty() ? "gaussian-d" + std::to_string(d) : gauss_args.id;
      opts.assumption_limit = gauss_args.assumption_limit;
      opts.warn_and_proceed = gauss_args.warn_and_proceed;
      opts.mc_budget = gauss_args.mc_budget;
      opts.mc_seed = gauss_args.mc_seed;
      ScenarioSpec scenario = make_gaussian_scenario(
          d, shift, Eigen::MatrixXd::Identity(d, d),
          gauss_args.te_var * Eigen::MatrixXd::Identity(d, d), std::move(f), opts);
      scenario.validate_probe();
      attach_measurements(scenario, gauss_args.tail_bound, opts.mc_seed);
      save_scenario(scenario, gauss_args.out);
      report_scenario(scenario, gauss_args.out);
      return 0;
    }
    if (expfam_cmd->parsed()) {
      const int d = expfam_args.d;
      Eigen::VectorXd theta_te = Eigen::VectorXd::Zero(d);
      theta_te[0] = expfam_args.theta_shift;
      TargetFunction f = expfam_args.f_kind == "tanh"
                             ? TargetFunction(TargetFunction::TanhCoordinate{0})
                             : TargetFunction(TargetFunction::IndicatorHalfspace{
                                   Eigen::VectorXd::Unit(d, 0), 0.0});
      GaussianScenarioOptions opts;
      opts.id = expfam_args.id.empty() ? "expfam-d" + std::to_string(d) : expfam_args.id;
      ScenarioSpec scenario =
          make_expfam_scenario(Eigen::VectorXd::Zero(d), theta_te, std::move(f), opts);
      scenario.validate_probe();
      attach_measurements(scenario, 20.0, 1);
      save_scenario(scenario, expfam_args.out);
      report_scenario(scenario, expfam_args.out);
      return 0;
    }
    if (rkhs_cmd->parsed()) {
      Eigen::MatrixXd centers = Eigen::MatrixXd::Zero(1, 1);
      Eigen::VectorXd alphas = Eigen::VectorXd::Constant(1, rkhs_args.alpha);
      TargetFunction f(
          TargetFunction::IndicatorBall{Eigen::VectorXd::Zero(1), rkhs_args.f_radius});
      RkhsScenarioOptions opts;
      opts.id = rkhs_args.id.empty() ? "rkhs-1d" : rkhs_args.id;
      ScenarioSpec scenario =
          make_rkhs_scenario(GaussianModel::standard(Eigen::VectorXd::Zero(1)),
                             KernelSpec::rbf(rkhs_args.bandwidth), centers, alphas, std::move(f),
                             opts);
      scenario.validate_probe();
      save_scenario(scenario, rkhs_args.out);
      report_scenario(scenario, rkhs_args.out);
      return 0;
    }
    if (lb_cmd->parsed()) {
      auto [a, b] = make_lower_bound_instance(lb_args.bound, lb_args.eps);
      a.validate_probe();
      b.validate_probe();
      attach_measurements(a, lb_args.bound, 1);
      attach_measurements(b, lb_args.bound, 1);
      save_scenario(a, lb_args.out_a);
      save_scenario(b, lb_args.out_b);
      report_scenario(a, lb_args.out_a);
      report_scenario(b, lb_args.out_b);
      return 0;
    }
    if (est_cmd->parsed()) return run_estimate(est_args);
    if (bench_cmd->parsed()) return run_bench(bench_args);
    if (report_cmd->parsed()) return run_report(report_args);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
