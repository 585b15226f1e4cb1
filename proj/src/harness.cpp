#include "covshift/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "covshift/rng.hpp"

namespace covshift {

std::string to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::Gauss: return "gauss";
    case EstimatorKind::GaussIso: return "gauss-iso";
    case EstimatorKind::Truncated: return "truncated";
    case EstimatorKind::Logistic: return "logistic";
    case EstimatorKind::KernelLogistic: return "kernel-logistic";
    case EstimatorKind::Kmm: return "kmm";
    case EstimatorKind::NaivePlugin: return "naive-plugin";
  }
  throw std::logic_error("unreachable estimator kind");
}

std::vector<std::string> estimator_names() {
  return {"gauss", "gauss-iso", "truncated", "logistic", "kernel-logistic", "kmm", "naive-plugin"};
}

EstimatorKind estimator_from_string(const std::string& name) {
  if (name == "gauss") return EstimatorKind::Gauss;
  if (name == "gauss-iso") return EstimatorKind::GaussIso;
  if (name == "truncated") return EstimatorKind::Truncated;
  if (name == "logistic") return EstimatorKind::Logistic;
  if (name == "kernel-logistic") return EstimatorKind::KernelLogistic;
  if (name == "kmm") return EstimatorKind::Kmm;
  if (name == "naive-plugin") return EstimatorKind::NaivePlugin;
  std::string known;
  for (const auto& n : estimator_names()) known += (known.empty() ? "" : ", ") + n;
  throw std::invalid_argument("unknown estimator '" + name + "' (valid: " + known + ")");
}

void ExperimentPlan::validate() const {
  if (n_grid.empty()) throw std::invalid_argument("plan: empty n grid");
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] < 1) throw std::invalid_argument("plan: n must be >= 1");
    if (i > 0 && n_grid[i] <= n_grid[i - 1])
      throw std::invalid_argument("plan: n grid must be strictly increasing");
  }
  if (trials_per_n < 1) throw std::invalid_argument("plan: trials_per_n must be >= 1");
  config.estimator.validate();
}

namespace {

LabeledSample draw_labeled(const ScenarioSpec& scenario, long n, std::uint64_t seed) {
  LabeledSample out;
  out.x = scenario.p_tr.sample(static_cast<int>(n), seed);
  out.f.resize(n);
  for (long j = 0; j < n; ++j) out.f[j] = scenario.f(out.x.col(j));
  return out;
}

std::vector<LabeledSample> split_batches(const LabeledSample& labeled, int t) {
  std::vector<LabeledSample> batches;
  const Eigen::Index total = labeled.count();
  const Eigen::Index base = total / t;
  const Eigen::Index extra = total % t;
  Eigen::Index start = 0;
  for (int b = 0; b < t; ++b) {
    const Eigen::Index len = base + (b < extra ? 1 : 0);
    batches.push_back(labeled.slice(start, len));
    start += len;
  }
  return batches;
}

DensityRatioModel exact_ratio_model(const ScenarioSpec& scenario) {
  if (!scenario.p_tr.has_density() || !scenario.p_te.has_density())
    throw std::invalid_argument(
        "truncated estimator: scenario lacks exact densities for the ratio model");
  const Distribution p_tr = scenario.p_tr;
  const Distribution p_te = scenario.p_te;
  return DensityRatioModel::exact([p_tr, p_te](const Eigen::VectorXd& x) {
    return p_te.log_density(x) - p_tr.log_density(x);
  });
}

}  // namespace

EstimateResult run_single_trial(const ScenarioSpec& scenario, EstimatorKind kind,
                                const RunConfig& config, long n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("run_single_trial: n must be >= 1");
  const std::uint64_t labeled_seed = derive_seed(seed, 1);
  const std::uint64_t train_seed = derive_seed(seed, 2);
  const std::uint64_t test_seed = derive_seed(seed, 3);
  const std::uint64_t pipeline_seed = derive_seed(seed, 4);

  switch (kind) {
    case EstimatorKind::Gauss:
    case EstimatorKind::GaussIso: {
      const LabeledSample labeled = draw_labeled(scenario, n, labeled_seed);
      const int t = std::max(1, config.estimator.batch_count > 0
                                    ? config.estimator.batch_count
                                    : config.estimator.resolved_batch_count());
      if (t > n) throw std::invalid_argument("run_single_trial: fewer labeled samples than batches");
      const Eigen::MatrixXd train_unlabeled =
          scenario.p_tr.sample(static_cast<int>(n), train_seed);
      const Eigen::MatrixXd test_unlabeled = scenario.p_te.sample(static_cast<int>(n), test_seed);
      return estimate_gaussian_plugin(train_unlabeled, test_unlabeled, split_batches(labeled, t),
                                      config.estimator, kind == EstimatorKind::GaussIso);
    }
    case EstimatorKind::Truncated: {
      const LabeledSample labeled = draw_labeled(scenario, n, labeled_seed);
      return estimate_truncated_ratio(labeled, exact_ratio_model(scenario), config.estimator);
    }
    case EstimatorKind::Logistic: {
      const LabeledSample labeled = draw_labeled(scenario, n, labeled_seed);
      const Eigen::MatrixXd train_unlabeled =
          scenario.p_tr.sample(static_cast<int>(n), train_seed);
      const Eigen::MatrixXd test_unlabeled = scenario.p_te.sample(static_cast<int>(n), test_seed);
      return estimate_via_logistic(train_unlabeled, test_unlabeled, labeled, FeatureMap{},
                                   config.estimator, pipeline_seed);
    }
    case EstimatorKind::KernelLogistic: {
      const LabeledSample labeled = draw_labeled(scenario, n, labeled_seed);
      const Eigen::MatrixXd train_unlabeled =
          scenario.p_tr.sample(static_cast<int>(n), train_seed);
      const Eigen::MatrixXd test_unlabeled = scenario.p_te.sample(static_cast<int>(n), test_seed);
      return estimate_via_kernel_logistic(train_unlabeled, test_unlabeled, labeled,
                                          config.estimator.kernel, config.estimator.norm_bound,
                                          config.estimator, pipeline_seed);
    }
    case EstimatorKind::Kmm: {
      const LabeledSample labeled = draw_labeled(scenario, n, labeled_seed);
      const Eigen::MatrixXd test_unlabeled = scenario.p_te.sample(static_cast<int>(n), test_seed);
      return estimate_kmm(labeled, test_unlabeled, config.kmm);
    }
    case EstimatorKind::NaivePlugin: {
      const LabeledSample labeled = draw_labeled(scenario, n, labeled_seed);
      const Eigen::MatrixXd test_unlabeled = scenario.p_te.sample(static_cast<int>(n), test_seed);
      return estimate_naive_plugin(labeled, test_unlabeled, config.kmm.kernel,
                                   config.kmm.f_norm_bound, config.kmm, pipeline_seed);
    }
  }
  throw std::logic_error("unreachable estimator kind");
}

std::vector<TrialRecord> run_plan(const ExperimentPlan& plan, int threads) {
  plan.validate();
  plan.scenario.validate_probe(derive_seed(plan.root_seed, 0xbeef));
  const GroundTruth truth = ground_truth(plan.scenario, plan.truth_precision);

  struct Job {
    long n;
    int trial;
  };
  std::vector<Job> jobs;
  for (long n : plan.n_grid)
    for (int t = 0; t < plan.trials_per_n; ++t) jobs.push_back({n, t});

  std::vector<TrialRecord> records(jobs.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      const Job job = jobs[i];
      TrialRecord rec;
      rec.n = job.n;
      rec.trial_index = job.trial;
      rec.seed = derive_seed(plan.root_seed, static_cast<std::uint64_t>(job.n),
                             static_cast<std::uint64_t>(job.trial));
      rec.truth = truth.value;
      const auto start = std::chrono::steady_clock::now();
      try {
        const EstimateResult est =
            run_single_trial(plan.scenario, plan.estimator, plan.config, job.n, rec.seed);
        rec.estimate = est.value;
        rec.abs_error = std::abs(est.value - truth.value);
        rec.truncated_count = est.truncated_count;
        const auto it = est.diagnostics.find("solver_converged");
        rec.converged = it == est.diagnostics.end() || it->second != 0.0;
      } catch (const std::exception& e) {
        rec.failed = true;
        rec.error = e.what();
      }
      rec.wall_ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - start).count();
      records[i] = std::move(rec);
    }
  };

  const int pool = std::max(1, threads);
  if (pool == 1) {
    worker();
  } else {
    std::vector<std::thread> crew;
    crew.reserve(pool);
    for (int i = 0; i < pool; ++i) crew.emplace_back(worker);
    for (auto& t : crew) t.join();
  }

  std::stable_sort(records.begin(), records.end(), [](const TrialRecord& a, const TrialRecord& b) {
    return a.n != b.n ? a.n < b.n : a.trial_index < b.trial_index;
  });
  return records;
}

namespace {

double nearest_rank_percentile(const std::vector<double>& sorted, double p) {
  const std::size_t n = sorted.size();
  const std::size_t rank = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(p * static_cast<double>(n))));
  return sorted[std::min(rank, n) - 1];
}

double median_sorted(const std::vector<double>& sorted) {
  const std::size_t n = sorted.size();
  if (n % 2 == 1) return sorted[n / 2];
  return 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

}  // namespace

std::vector<SummaryRow> summarize(const std::vector<TrialRecord>& records, double epsilon) {
  if (records.empty()) throw std::invalid_argument("summarize: no records");

  std::vector<long> grid;
  for (const auto& r : records)
    if (grid.empty() || grid.back() != r.n) {
      if (std::find(grid.begin(), grid.end(), r.n) == grid.end()) grid.push_back(r.n);
    }
  std::sort(grid.begin(), grid.end());

  std::vector<SummaryRow> rows;
  for (long n : grid) {
    SummaryRow row;
    row.n = n;
    row.epsilon = epsilon;
    std::vector<double> errors;
    double truncated_fraction_sum = 0.0;
    int successes = 0;
    for (const auto& r : records) {
      if (r.n != n) continue;
      ++row.trials;
      if (r.failed) {
        ++row.failed;
        continue;
      }
      errors.push_back(r.abs_error);
      truncated_fraction_sum += static_cast<double>(r.truncated_count) / static_cast<double>(r.n);
      if (r.abs_error <= epsilon) ++successes;
    }
    if (!errors.empty()) {
      std::sort(errors.begin(), errors.end());
      row.valid = true;
      row.median_abs_error = median_sorted(errors);
      row.p10_abs_error = nearest_rank_percentile(errors, 0.10);
      row.p90_abs_error = nearest_rank_percentile(errors, 0.90);
      row.success_rate = static_cast<double>(successes) / static_cast<double>(errors.size());
      row.mean_truncated_fraction = truncated_fraction_sum / static_cast<double>(errors.size());
    } else {
      row.median_abs_error = std::nan("");
      row.p10_abs_error = std::nan("");
      row.p90_abs_error = std::nan("");
      row.success_rate = std::nan("");
      row.mean_truncated_fraction = std::nan("");
    }
    rows.push_back(row);
  }
  return rows;
}

SlopeFit fit_loglog_slope(const std::vector<SummaryRow>& summary) {
  std::vector<double> xs, ys;
  for (const auto& row : summary) {
    if (!row.valid || !(row.median_abs_error > 0.0)) continue;
    xs.push_back(std::log(static_cast<double>(row.n)));
    ys.push_back(std::log(row.median_abs_error));
  }
  if (xs.size() < 3)
    throw std::invalid_argument("fit_loglog_slope: need at least 3 grid points with positive medians");

  const double n = static_cast<double>(xs.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double denom = n * sxx - sx * sx;
  if (std::abs(denom) < 1e-12) throw std::invalid_argument("fit_loglog_slope: degenerate grid");

  SlopeFit fit;
  fit.points = static_cast<int>(xs.size());
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;

  double ss_res = 0.0, ss_tot = 0.0;
  const double mean_y = sy / n;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double pred = fit.intercept + fit.slope * xs[i];
    ss_res += (ys[i] - pred) * (ys[i] - pred);
    ss_tot += (ys[i] - mean_y) * (ys[i] - mean_y);
  }
  fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

}  // namespace covshift
