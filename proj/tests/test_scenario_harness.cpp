#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "covshift/harness.hpp"
#include "covshift/io.hpp"
#include "covshift/rng.hpp"

using namespace covshift;

namespace {

Eigen::VectorXd vec1(double a) { return Eigen::VectorXd::Constant(1, a); }

ScenarioSpec shifted_1d_scenario(double shift) {
  return make_gaussian_scenario(
      1, vec1(shift), Eigen::MatrixXd::Identity(1, 1), Eigen::MatrixXd::Identity(1, 1),
      TargetFunction(TargetFunction::IndicatorHalfspace{Eigen::VectorXd::Ones(1), 0.0}));
}

}  // namespace

TEST_CASE("gaussian scenario truths and assumption records") {
  const ScenarioSpec scenario = shifted_1d_scenario(0.5);
  const GroundTruth truth = ground_truth(scenario, 0.01);
  CHECK(truth.value == doctest::Approx(0.6914624612740131).epsilon(1e-12));
  CHECK(truth.std_error == 0.0);
  REQUIRE(scenario.assumptions.has_value());
  CHECK(scenario.assumptions->mean_shift_norm == doctest::Approx(0.5));
  CHECK(scenario.assumptions->satisfied);

  const ScenarioSpec null = shifted_1d_scenario(0.0);
  CHECK(null.has_flag("null-shift"));
  CHECK(ground_truth(null, 0.01).value == doctest::Approx(0.5));
}

TEST_CASE("covariance closeness is measured through the inverse difference") {
  const double target = 0.5;
  const double inv_te = 1.0 - target / std::sqrt(2.0);
  Eigen::MatrixXd cov_te = (1.0 / inv_te) * Eigen::MatrixXd::Identity(2, 2);
  const ScenarioSpec scenario = make_gaussian_scenario(
      2, Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2), cov_te,
      TargetFunction(TargetFunction::TanhCoordinate{0}));
  REQUIRE(scenario.assumptions.has_value());
  CHECK(scenario.assumptions->sigma_inv_diff_frobenius == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(scenario.assumptions->satisfied);
}

TEST_CASE("assumption violations throw unless explicitly waived") {
  CHECK_THROWS_AS(shifted_1d_scenario(2.0), std::invalid_argument);
  GaussianScenarioOptions opts;
  opts.warn_and_proceed = true;
  const ScenarioSpec stressed = make_gaussian_scenario(
      1, vec1(2.0), Eigen::MatrixXd::Identity(1, 1), Eigen::MatrixXd::Identity(1, 1),
      TargetFunction(TargetFunction::TanhCoordinate{0}), opts);
  REQUIRE(stressed.assumptions.has_value());
  CHECK_FALSE(stressed.assumptions->satisfied);
}

TEST_CASE("exponential-family scenario carries the classifier ground truth") {
  Eigen::VectorXd theta_te = Eigen::VectorXd::Zero(3);
  theta_te[0] = 0.5;
  const ScenarioSpec scenario = make_expfam_scenario(
      Eigen::VectorXd::Zero(3), theta_te, TargetFunction(TargetFunction::TanhCoordinate{0}));
  REQUIRE(scenario.expfam_truth.has_value());
  CHECK((scenario.expfam_truth->theta_star - theta_te).norm() == 0.0);

  // The intercept is pinned by the pointwise log-ratio identity:
  // ln p_te(x) - ln p_tr(x) - <theta_star, x> is constant in x.
  Rng rng(3);
  for (int rep = 0; rep < 10; ++rep) {
    const Eigen::VectorXd x = 2.0 * rng.normal_vector(3);
    const double observed = scenario.p_te.log_density(x) - scenario.p_tr.log_density(x) -
                            scenario.expfam_truth->theta_star.dot(x);
    CHECK(observed == doctest::Approx(scenario.expfam_truth->s_star).epsilon(1e-10));
  }
  CHECK(scenario.expfam_truth->s_star == doctest::Approx(-0.125).epsilon(1e-12));

  const ScenarioSpec same = make_expfam_scenario(
      theta_te, theta_te, TargetFunction(TargetFunction::TanhCoordinate{0}));
  CHECK(same.expfam_truth->theta_star.norm() == 0.0);
  CHECK(same.expfam_truth->s_star == 0.0);
  CHECK(same.has_flag("null-shift"));

  // Unit natural-parameter shift: the order-2 discrepancy is exp(1).
  const ScenarioSpec wide = make_expfam_scenario(
      vec1(0), vec1(1.0), TargetFunction(TargetFunction::TanhCoordinate{0}));
  const McEstimate r2 = renyi_r2_mc(log_density_fn(wide.p_tr), wide.p_te, 200000, 5);
  CHECK(std::isfinite(r2.value));
  CHECK(r2.value == doctest::Approx(std::exp(1.0)).epsilon(0.05));
}

TEST_CASE("lower-bound instance arithmetic") {
  const auto [a, b] = make_lower_bound_instance(100.0, 0.05);
  CHECK(std::get<ClosedFormTruth>(a.truth).value - std::get<ClosedFormTruth>(b.truth).value ==
        doctest::Approx(0.1).epsilon(1e-15));
  const DiscreteAtoms* p_tr = a.p_tr.as_discrete();
  REQUIRE(p_tr != nullptr);
  CHECK(p_tr->probs[0] == doctest::Approx(0.001).epsilon(1e-12));
  // The chance that 50 labeled draws ever see the heavy atom is about 4.9%.
  CHECK(1.0 - std::pow(1.0 - p_tr->probs[0], 50.0) == doctest::Approx(0.0488).epsilon(0.01));

  const auto degenerate = make_lower_bound_instance(1.0, 0.05);
  CHECK(degenerate.first.has_flag("degenerate-lower-bound"));
  CHECK_THROWS_AS(make_lower_bound_instance(0.5, 0.05), std::invalid_argument);
  CHECK_THROWS_AS(make_lower_bound_instance(10.0, 0.6), std::invalid_argument);
}

TEST_CASE("ground-truth oracle reproducibility") {
  SUBCASE("null-shift tanh mean is zero within three standard errors") {
    GaussianScenarioOptions opts;
    opts.mc_budget = 2000000;
    const ScenarioSpec scenario = make_gaussian_scenario(
        2, Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2),
        Eigen::MatrixXd::Identity(2, 2), TargetFunction(TargetFunction::TanhCoordinate{0}), opts);
    const GroundTruth truth = ground_truth(scenario, 0.01);
    CHECK(truth.std_error > 0.0);
    CHECK(std::abs(truth.value) <= 3.0 * truth.std_error);
  }

  SUBCASE("independent oracle runs agree on the reweighted scenario") {
    Eigen::MatrixXd centers = Eigen::MatrixXd::Zero(1, 1);
    RkhsScenarioOptions opts;
    opts.mc_budget = 1000000;
    const ScenarioSpec scenario = make_rkhs_scenario(
        GaussianModel::standard(vec1(0)), KernelSpec::rbf(1.0), centers, vec1(-0.8),
        TargetFunction(TargetFunction::IndicatorBall{vec1(0), 1.0}), opts);
    const GroundTruth one = ground_truth(scenario, 0.01, 111);
    const GroundTruth two = ground_truth(scenario, 0.01, 222);
    CHECK(std::abs(one.value - two.value) <= 3.0 * (one.std_error + two.std_error));
  }
}

TEST_CASE("probe rejects targets that escape the unit band") {
  Eigen::MatrixXd centers = Eigen::MatrixXd::Zero(1, 1);
  ScenarioSpec bad = shifted_1d_scenario(0.3);
  bad.f = TargetFunction(
      TargetFunction::PlantedRkhs{KernelSpec::rbf(1.0), centers, vec1(2.5)});
  CHECK_THROWS_AS(bad.validate_probe(), std::invalid_argument);
}

TEST_CASE("run_plan shape, determinism, and thread invariance") {
  ExperimentPlan plan{"unit",
                      shifted_1d_scenario(0.5),
                      EstimatorKind::Truncated,
                      RunConfig{},
                      {100},
                      1,
                      12345,
                      0.01};
  plan.config.estimator.batch_count = 1;

  const std::vector<TrialRecord> single = run_plan(plan, 1);
  CHECK(single.size() == 1);
  CHECK(single[0].n == 100);
  CHECK(single[0].abs_error == std::abs(single[0].estimate - single[0].truth));

  plan.n_grid = {50, 100};
  plan.trials_per_n = 4;
  const std::vector<TrialRecord> a = run_plan(plan, 1);
  const std::vector<TrialRecord> b = run_plan(plan, 1);
  const std::vector<TrialRecord> c = run_plan(plan, 2);
  REQUIRE(a.size() == 8);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].estimate == b[i].estimate);
    CHECK(a[i].estimate == c[i].estimate);
    CHECK(a[i].seed == c[i].seed);
    CHECK(a[i].n == c[i].n);
    CHECK(a[i].trial_index == c[i].trial_index);
  }

  plan.n_grid = {100, 50};
  CHECK_THROWS_AS(plan.validate(), std::invalid_argument);
}

TEST_CASE("summarize order statistics") {
  auto record = [](long n, double err, bool failed) {
    TrialRecord r;
    r.n = n;
    r.abs_error = err;
    r.failed = failed;
    r.truncated_count = 0;
    return r;
  };

  SUBCASE("stated three-error example") {
    const std::vector<TrialRecord> records{record(10, 0.01, false), record(10, 0.02, false),
                                           record(10, 0.03, false)};
    const auto rows = summarize(records, 0.025);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].success_rate == doctest::Approx(2.0 / 3.0));
    CHECK(rows[0].median_abs_error == doctest::Approx(0.02));
  }

  SUBCASE("all-failed rows are flagged with absent statistics") {
    const std::vector<TrialRecord> records{record(10, 0, true), record(10, 0, true)};
    const auto rows = summarize(records, 0.1);
    REQUIRE(rows.size() == 1);
    CHECK_FALSE(rows[0].valid);
    CHECK(rows[0].failed == 2);
    CHECK(std::isnan(rows[0].median_abs_error));
  }

  SUBCASE("nearest-rank percentiles over one hundred records") {
    std::vector<TrialRecord> records;
    for (int i = 1; i <= 100; ++i) records.push_back(record(10, 0.01 * i, false));
    const auto rows = summarize(records, 0.5);
    CHECK(rows[0].p10_abs_error == doctest::Approx(0.10));
    CHECK(rows[0].p90_abs_error == doctest::Approx(0.90));
    CHECK(rows[0].median_abs_error == doctest::Approx(0.505));
  }
}

TEST_CASE("loglog slope fits") {
  auto row = [](long n, double median) {
    SummaryRow r;
    r.n = n;
    r.valid = true;
    r.median_abs_error = median;
    return r;
  };
  const std::vector<long> grid{1000, 3000, 10000, 30000, 100000};

  SUBCASE("exact inverse square root") {
    std::vector<SummaryRow> rows;
    for (long n : grid) rows.push_back(row(n, 2.0 / std::sqrt(static_cast<double>(n))));
    const SlopeFit fit = fit_loglog_slope(rows);
    CHECK(fit.slope == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("constant medians") {
    std::vector<SummaryRow> rows;
    for (long n : grid) rows.push_back(row(n, 0.25));
    CHECK(fit_loglog_slope(rows).slope == doctest::Approx(0.0).epsilon(1e-12));
  }

  SUBCASE("ten percent multiplicative noise keeps the slope in band") {
    Rng rng(2);
    std::vector<SummaryRow> rows;
    for (long n : grid) {
      const double noise = 1.0 + 0.1 * (2.0 * rng.uniform() - 1.0);
      rows.push_back(row(n, noise * 2.0 / std::sqrt(static_cast<double>(n))));
    }
    const SlopeFit fit = fit_loglog_slope(rows);
    CHECK(fit.slope >= -0.65);
    CHECK(fit.slope <= -0.35);
  }

  SUBCASE("degenerate grids are rejected") {
    std::vector<SummaryRow> rows{row(10, 0.1), row(20, 0.05)};
    CHECK_THROWS_AS(fit_loglog_slope(rows), std::invalid_argument);
  }
}

TEST_CASE("scenario serialization round trip") {
  ScenarioSpec scenario = shifted_1d_scenario(0.5);
  scenario.tail_bound_hint = TailBoundHint{20.0, 0.01};
  scenario.measurements["r2_tr_te"] = 1.2840254166877414;
  const json j = scenario_to_json(scenario);
  const ScenarioSpec back = scenario_from_json(j);
  CHECK(scenario_to_json(back) == j);
  CHECK(back.id == scenario.id);
  CHECK(back.assumptions->mean_shift_norm ==
        doctest::Approx(scenario.assumptions->mean_shift_norm));

  json broken = j;
  broken["surprise"] = 1;
  CHECK_THROWS_WITH_AS(scenario_from_json(broken), doctest::Contains("surprise"), ConfigError);
}

TEST_CASE("plan and model serialization round trips") {
  ExperimentPlan plan{"roundtrip",
                      shifted_1d_scenario(0.4),
                      EstimatorKind::Logistic,
                      RunConfig{},
                      {100, 200},
                      2,
                      99,
                      0.02};
  plan.config.estimator.batch_count = 1;
  plan.config.estimator.kernel = KernelSpec::polynomial(2, 1.0);
  const json pj = plan_to_json(plan);
  const ExperimentPlan back = plan_from_json(pj);
  CHECK(plan_to_json(back) == pj);

  LogisticModel lm;
  lm.theta = vec1(0.7);
  lm.intercept = -0.125;
  lm.norm_bound = 10.0;
  lm.info = {12, 0.64, 1e-9, true};
  const DensityRatioModel model =
      truncate_ratio(DensityRatioModel::logistic(lm, FeatureMap{}), 20.0);
  const json mj = ratio_model_to_json(model);
  const DensityRatioModel restored = ratio_model_from_json(mj);
  CHECK(ratio_model_to_json(restored) == mj);
  CHECK(restored.log_ratio(vec1(1.0)) == doctest::Approx(0.575).epsilon(1e-12));
  CHECK(restored.bound() == 20.0);

  CHECK_THROWS_AS(
      ratio_model_to_json(DensityRatioModel::exact([](const Eigen::VectorXd&) { return 0.0; })),
      ConfigError);
}

TEST_CASE("sample CSV dumps carry the dim column and labels") {
  const Eigen::MatrixXd points = GaussianModel::standard(Eigen::VectorXd::Zero(2)).sample(3, 1);
  const std::string dir = std::filesystem::temp_directory_path().string();
  const std::string upath = dir + "/covshift_test_unlabeled.csv";
  const std::string lpath = dir + "/covshift_test_labeled.csv";
  write_unlabeled_csv(upath, points);
  write_labeled_csv(lpath, points, Eigen::VectorXd::Constant(3, 0.5));

  std::ifstream uin(upath);
  std::string header;
  std::getline(uin, header);
  CHECK(header == "dim,x0,x1");
  std::string row;
  std::getline(uin, row);
  CHECK(row.substr(0, 2) == "2,");

  std::ifstream lin(lpath);
  std::getline(lin, header);
  CHECK(header == "dim,x0,x1,f_value");
}
