#include "covshift/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace covshift {

namespace {

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Eigen::VectorXd vector_from_json(const json& j, const std::string& context) {
  if (!j.is_array()) throw ConfigError(context + ": expected an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

// Matrices travel as arrays of columns (one point per entry).
json matrix_to_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(vector_to_json(m.col(c)));
  return out;
}

Eigen::MatrixXd matrix_from_json(const json& j, const std::string& context) {
  if (!j.is_array()) throw ConfigError(context + ": expected an array of columns");
  if (j.empty()) return Eigen::MatrixXd(0, 0);
  const Eigen::Index rows = static_cast<Eigen::Index>(j[0].size());
  Eigen::MatrixXd m(rows, static_cast<Eigen::Index>(j.size()));
  for (std::size_t c = 0; c < j.size(); ++c) {
    const Eigen::VectorXd col = vector_from_json(j[c], context);
    if (col.size() != rows) throw ConfigError(context + ": ragged matrix");
    m.col(static_cast<Eigen::Index>(c)) = col;
  }
  return m;
}

void check_version(const json& j, const std::string& context) {
  if (!j.contains("format_version")) throw ConfigError(context + ": missing format_version");
  if (j.at("format_version").get<int>() != kFormatVersion)
    throw ConfigError(context + ": unsupported format_version");
}

}  // namespace

void require_keys(const json& j, std::initializer_list<const char*> allowed,
                  const std::string& context) {
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* k : allowed)
      if (item.key() == k) {
        ok = true;
        break;
      }
    if (!ok) throw ConfigError(context + ": unknown key '" + item.key() + "'");
  }
}

json kernel_to_json(const KernelSpec& kernel) {
  switch (kernel.kind) {
    case KernelSpec::Kind::Rbf:
      return {{"kind", "rbf"}, {"bandwidth", kernel.bandwidth}};
    case KernelSpec::Kind::Linear:
      return {{"kind", "linear"}};
    case KernelSpec::Kind::Polynomial:
      return {{"kind", "polynomial"}, {"degree", kernel.degree}, {"offset", kernel.offset}};
  }
  throw std::logic_error("unreachable kernel kind");
}

KernelSpec kernel_from_json(const json& j) {
  require_keys(j, {"kind", "bandwidth", "degree", "offset"}, "kernel");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "rbf") return KernelSpec::rbf(j.value("bandwidth", 1.0));
  if (kind == "linear") return KernelSpec::linear();
  if (kind == "polynomial") return KernelSpec::polynomial(j.value("degree", 1), j.value("offset", 0.0));
  throw ConfigError("kernel: unknown kind '" + kind + "'");
}

json distribution_to_json(const Distribution& dist) {
  if (const GaussianModel* g = dist.as_gaussian()) {
    return {{"type", "gaussian"},
            {"mean", vector_to_json(g->mean())},
            {"cov", matrix_to_json(g->cov())},
            {"isotropic", g->isotropic()}};
  }
  if (const auto* u = std::get_if<UniformBox>(&dist.variant())) {
    return {{"type", "uniform_box"}, {"lo", vector_to_json(u->lo)}, {"hi", vector_to_json(u->hi)}};
  }
  if (const RkhsReweightedModel* r = dist.as_rkhs()) {
    json base;
    if (const auto* g = std::get_if<GaussianModel>(&r->base()))
      base = distribution_to_json(Distribution(*g));
    else
      base = distribution_to_json(Distribution(std::get<UniformBox>(r->base())));
    return {{"type", "rkhs_reweighted"},
            {"base", base},
            {"kernel", kernel_to_json(r->kernel())},
            {"centers", matrix_to_json(r->centers())},
            {"alphas", vector_to_json(r->alphas())},
            {"log_ratio_bound", r->log_ratio_bound()}};
  }
  const DiscreteAtoms* a = dist.as_discrete();
  return {{"type", "discrete"},
          {"atoms", matrix_to_json(a->atoms)},
          {"probs", vector_to_json(a->probs)}};
}

Distribution distribution_from_json(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "gaussian") {
    require_keys(j, {"type", "mean", "cov", "isotropic"}, "distribution");
    return Distribution(GaussianModel(vector_from_json(j.at("mean"), "mean"),
                                      matrix_from_json(j.at("cov"), "cov"),
                                      j.value("isotropic", false)));
  }
  if (type == "uniform_box") {
    require_keys(j, {"type", "lo", "hi"}, "distribution");
    return Distribution(UniformBox(vector_from_json(j.at("lo"), "lo"),
                                   vector_from_json(j.at("hi"), "hi")));
  }
  if (type == "rkhs_reweighted") {
    require_keys(j, {"type", "base", "kernel", "centers", "alphas", "log_ratio_bound"},
                 "distribution");
    const Distribution base = distribution_from_json(j.at("base"));
    RkhsReweightedModel::Base base_variant = [&]() -> RkhsReweightedModel::Base {
      if (const GaussianModel* g = base.as_gaussian()) return *g;
      if (const auto* u = std::get_if<UniformBox>(&base.variant())) return *u;
      throw ConfigError("rkhs_reweighted: base must be gaussian or uniform_box");
    }();
    return Distribution(RkhsReweightedModel(std::move(base_variant),
                                            kernel_from_json(j.at("kernel")),
                                            matrix_from_json(j.at("centers"), "centers"),
                                            vector_from_json(j.at("alphas"), "alphas"),
                                            j.at("log_ratio_bound").get<double>()));
  }
  if (type == "discrete") {
    require_keys(j, {"type", "atoms", "probs"}, "distribution");
    return Distribution(DiscreteAtoms(matrix_from_json(j.at("atoms"), "atoms"),
                                      vector_from_json(j.at("probs"), "probs")));
  }
  throw ConfigError("distribution: unknown type '" + type + "'");
}

json target_to_json(const TargetFunction& f) {
  if (const auto* h = std::get_if<TargetFunction::IndicatorHalfspace>(&f.variant()))
    return {{"type", "indicator_halfspace"}, {"w", vector_to_json(h->w)}, {"b", h->b}};
  if (const auto* t = std::get_if<TargetFunction::TanhCoordinate>(&f.variant()))
    return {{"type", "tanh_coordinate"}, {"index", t->index}};
  if (const auto* p = std::get_if<TargetFunction::PlantedRkhs>(&f.variant()))
    return {{"type", "planted_rkhs"},
            {"kernel", kernel_to_json(p->kernel)},
            {"centers", matrix_to_json(p->centers)},
            {"alphas", vector_to_json(p->alphas)}};
  if (const auto* b = std::get_if<TargetFunction::IndicatorBall>(&f.variant()))
    return {{"type", "indicator_ball"}, {"center", vector_to_json(b->center)}, {"radius", b->radius}};
  return {{"type", "zero"}};
}

TargetFunction target_from_json(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "indicator_halfspace") {
    require_keys(j, {"type", "w", "b"}, "target");
    return TargetFunction(TargetFunction::IndicatorHalfspace{vector_from_json(j.at("w"), "w"),
                                                             j.value("b", 0.0)});
  }
  if (type == "tanh_coordinate") {
    require_keys(j, {"type", "index"}, "target");
    return TargetFunction(TargetFunction::TanhCoordinate{j.value("index", 0)});
  }
  if (type == "planted_rkhs") {
    require_keys(j, {"type", "kernel", "centers", "alphas"}, "target");
    return TargetFunction(TargetFunction::PlantedRkhs{kernel_from_json(j.at("kernel")),
                                                      matrix_from_json(j.at("centers"), "centers"),
                                                      vector_from_json(j.at("alphas"), "alphas")});
  }
  if (type == "indicator_ball") {
    require_keys(j, {"type", "center", "radius"}, "target");
    return TargetFunction(TargetFunction::IndicatorBall{vector_from_json(j.at("center"), "center"),
                                                        j.at("radius").get<double>()});
  }
  if (type == "zero") return TargetFunction(TargetFunction::Zero{});
  throw ConfigError("target: unknown type '" + type + "'");
}

json scenario_to_json(const ScenarioSpec& scenario) {
  json j{{"format_version", kFormatVersion},
         {"id", scenario.id},
         {"p_tr", distribution_to_json(scenario.p_tr)},
         {"p_te", distribution_to_json(scenario.p_te)},
         {"f", target_to_json(scenario.f)}};
  if (const auto* cf = std::get_if<ClosedFormTruth>(&scenario.truth))
    j["truth"] = {{"type", "closed_form"}, {"value", cf->value}};
  else {
    const auto& mc = std::get<MonteCarloTruth>(scenario.truth);
    j["truth"] = {{"type", "monte_carlo"}, {"budget", mc.budget}, {"seed", mc.seed}};
  }
  if (scenario.tail_bound_hint)
    j["tail_bound_hint"] = {{"B", scenario.tail_bound_hint->bound},
                            {"eps", scenario.tail_bound_hint->epsilon}};
  if (scenario.assumptions) {
    const AssumptionRecord& a = *scenario.assumptions;
    j["assumptions"] = {{"mean_shift_norm", a.mean_shift_norm},
                        {"mean_tr_norm", a.mean_tr_norm},
                        {"sigma_tr_inv_op", a.sigma_tr_inv_op},
                        {"sigma_inv_diff_frobenius", a.sigma_inv_diff_frobenius},
                        {"limit", a.limit},
                        {"satisfied", a.satisfied}};
  }
  if (scenario.expfam_truth)
    j["expfam_truth"] = {{"theta_star", vector_to_json(scenario.expfam_truth->theta_star)},
                         {"s_star", scenario.expfam_truth->s_star}};
  if (!scenario.measurements.empty()) j["measurements"] = scenario.measurements;
  if (!scenario.flags.empty()) j["flags"] = scenario.flags;
  return j;
}

ScenarioSpec scenario_from_json(const json& j) {
  check_version(j, "scenario");
  require_keys(j,
               {"format_version", "id", "p_tr", "p_te", "f", "truth", "tail_bound_hint",
                "assumptions", "expfam_truth", "measurements", "flags"},
               "scenario");

  TruthSpec truth = MonteCarloTruth{};
  const json& tj = j.at("truth");
  require_keys(tj, {"type", "value", "budget", "seed"}, "truth");
  if (tj.at("type") == "closed_form")
    truth = ClosedFormTruth{tj.at("value").get<double>()};
  else if (tj.at("type") == "monte_carlo")
    truth = MonteCarloTruth{tj.value("budget", 10000000L), tj.value("seed", std::uint64_t{1})};
  else
    throw ConfigError("truth: unknown type");

  ScenarioSpec scenario{j.at("id").get<std::string>(),
                        distribution_from_json(j.at("p_tr")),
                        distribution_from_json(j.at("p_te")),
                        target_from_json(j.at("f")),
                        truth,
                        std::nullopt,
                        std::nullopt,
                        std::nullopt,
                        {},
                        {}};
  if (j.contains("tail_bound_hint")) {
    require_keys(j.at("tail_bound_hint"), {"B", "eps"}, "tail_bound_hint");
    scenario.tail_bound_hint =
        TailBoundHint{j.at("tail_bound_hint").at("B").get<double>(),
                      j.at("tail_bound_hint").at("eps").get<double>()};
  }
  if (j.contains("assumptions")) {
    const json& aj = j.at("assumptions");
    require_keys(aj,
                 {"mean_shift_norm", "mean_tr_norm", "sigma_tr_inv_op",
                  "sigma_inv_diff_frobenius", "limit", "satisfied"},
                 "assumptions");
    AssumptionRecord a;
    a.mean_shift_norm = aj.value("mean_shift_norm", 0.0);
    a.mean_tr_norm = aj.value("mean_tr_norm", 0.0);
    a.sigma_tr_inv_op = aj.value("sigma_tr_inv_op", 0.0);
    a.sigma_inv_diff_frobenius = aj.value("sigma_inv_diff_frobenius", 0.0);
    a.limit = aj.value("limit", 1.0);
    a.satisfied = aj.value("satisfied", true);
    scenario.assumptions = a;
  }
  if (j.contains("expfam_truth")) {
    require_keys(j.at("expfam_truth"), {"theta_star", "s_star"}, "expfam_truth");
    scenario.expfam_truth =
        ExpfamTruth{vector_from_json(j.at("expfam_truth").at("theta_star"), "theta_star"),
                    j.at("expfam_truth").at("s_star").get<double>()};
  }
  if (j.contains("measurements"))
    scenario.measurements = j.at("measurements").get<std::map<std::string, double>>();
  if (j.contains("flags")) scenario.flags = j.at("flags").get<std::vector<std::string>>();
  return scenario;
}

ScenarioSpec load_scenario(const std::string& path) {
  return scenario_from_json(load_json_file(path));
}

void save_scenario(const ScenarioSpec& scenario, const std::string& path) {
  save_json_file(scenario_to_json(scenario), path);
}

namespace {

json solver_to_json(const SolverOptions& s) {
  return {{"tol", s.tol},
          {"tol_relative", s.tol_relative},
          {"plateau_tol", s.plateau_tol},
          {"plateau_window", s.plateau_window},
          {"max_iters", s.max_iters}};
}

SolverOptions solver_from_json(const json& j, const SolverOptions& defaults) {
  require_keys(j, {"tol", "tol_relative", "plateau_tol", "plateau_window", "max_iters"}, "solver");
  SolverOptions s = defaults;
  s.tol = j.value("tol", defaults.tol);
  s.tol_relative = j.value("tol_relative", defaults.tol_relative);
  s.plateau_tol = j.value("plateau_tol", defaults.plateau_tol);
  s.plateau_window = j.value("plateau_window", defaults.plateau_window);
  s.max_iters = j.value("max_iters", defaults.max_iters);
  return s;
}

}  // namespace

json run_config_to_json(const RunConfig& config) {
  const EstimatorConfig& e = config.estimator;
  const KmmConfig& k = config.kmm;
  return {{"estimator",
           {{"epsilon", e.epsilon},
            {"delta", e.delta},
            {"ratio_bound", e.ratio_bound},
            {"batch_size", e.batch_size},
            {"batch_count", e.batch_count},
            {"c_K", e.c_K},
            {"c_m", e.c_m},
            {"c_t", e.c_t},
            {"truncate_plugin", e.truncate_plugin},
            {"norm_bound", e.norm_bound},
            {"kernel", kernel_to_json(e.kernel)},
            {"klr_intercept", e.klr_intercept},
            {"klr_train_cap", e.klr_train_cap},
            {"solver", solver_to_json(e.solver)},
            {"klr_solver", solver_to_json(e.klr_solver)}}},
          {"kmm",
           {{"kernel", kernel_to_json(k.kernel)},
            {"weight_bound", k.weight_bound},
            {"mean_match_tol", k.mean_match_tol},
            {"f_norm_bound", k.f_norm_bound},
            {"solver", solver_to_json(k.solver)},
            {"subgradient_iters", k.subgradient_iters},
            {"subgradient_scale", k.subgradient_scale},
            {"support_cap", k.support_cap}}}};
}

RunConfig run_config_from_json(const json& j) {
  require_keys(j, {"estimator", "kmm"}, "config");
  RunConfig config;
  if (j.contains("estimator")) {
    const json& e = j.at("estimator");
    require_keys(e,
                 {"epsilon", "delta", "ratio_bound", "batch_size", "batch_count", "c_K", "c_m",
                  "c_t", "truncate_plugin", "norm_bound", "kernel", "klr_intercept",
                  "klr_train_cap", "solver", "klr_solver"},
                 "config.estimator");
    EstimatorConfig& c = config.estimator;
    c.epsilon = e.value("epsilon", c.epsilon);
    c.delta = e.value("delta", c.delta);
    c.ratio_bound = e.value("ratio_bound", c.ratio_bound);
    c.batch_size = e.value("batch_size", c.batch_size);
    c.batch_count = e.value("batch_count", c.batch_count);
    c.c_K = e.value("c_K", c.c_K);
    c.c_m = e.value("c_m", c.c_m);
    c.c_t = e.value("c_t", c.c_t);
    c.truncate_plugin = e.value("truncate_plugin", c.truncate_plugin);
    c.norm_bound = e.value("norm_bound", c.norm_bound);
    if (e.contains("kernel")) c.kernel = kernel_from_json(e.at("kernel"));
    c.klr_intercept = e.value("klr_intercept", c.klr_intercept);
    c.klr_train_cap = e.value("klr_train_cap", c.klr_train_cap);
    if (e.contains("solver")) c.solver = solver_from_json(e.at("solver"), c.solver);
    if (e.contains("klr_solver")) c.klr_solver = solver_from_json(e.at("klr_solver"), c.klr_solver);
  }
  if (j.contains("kmm")) {
    const json& k = j.at("kmm");
    require_keys(k,
                 {"kernel", "weight_bound", "mean_match_tol", "f_norm_bound", "solver",
                  "subgradient_iters", "subgradient_scale", "support_cap"},
                 "config.kmm");
    KmmConfig& c = config.kmm;
    if (k.contains("kernel")) c.kernel = kernel_from_json(k.at("kernel"));
    c.weight_bound = k.value("weight_bound", c.weight_bound);
    c.mean_match_tol = k.value("mean_match_tol", c.mean_match_tol);
    c.f_norm_bound = k.value("f_norm_bound", c.f_norm_bound);
    if (k.contains("solver")) c.solver = solver_from_json(k.at("solver"), c.solver);
    c.subgradient_iters = k.value("subgradient_iters", c.subgradient_iters);
    c.subgradient_scale = k.value("subgradient_scale", c.subgradient_scale);
    c.support_cap = k.value("support_cap", c.support_cap);
  }
  return config;
}

json plan_to_json(const ExperimentPlan& plan) {
  return {{"format_version", kFormatVersion},
          {"id", plan.id},
          {"scenario", scenario_to_json(plan.scenario)},
          {"estimator", to_string(plan.estimator)},
          {"config", run_config_to_json(plan.config)},
          {"n_grid", plan.n_grid},
          {"trials_per_n", plan.trials_per_n},
          {"root_seed", plan.root_seed},
          {"truth_precision", plan.truth_precision}};
}

ExperimentPlan plan_from_json(const json& j, const std::string& base_dir) {
  check_version(j, "plan");
  require_keys(j,
               {"format_version", "id", "scenario", "estimator", "config", "n_grid",
                "trials_per_n", "root_seed", "truth_precision"},
               "plan");
  const json& sj = j.at("scenario");
  ScenarioSpec scenario = [&] {
    if (sj.is_object() && sj.contains("ref")) {
      require_keys(sj, {"ref"}, "plan.scenario");
      const std::filesystem::path ref = sj.at("ref").get<std::string>();
      const auto resolved = ref.is_absolute() ? ref : std::filesystem::path(base_dir) / ref;
      return load_scenario(resolved.string());
    }
    return scenario_from_json(sj);
  }();

  ExperimentPlan plan{j.value("id", std::string("plan")),
                      std::move(scenario),
                      estimator_from_string(j.at("estimator").get<std::string>()),
                      j.contains("config") ? run_config_from_json(j.at("config")) : RunConfig{},
                      j.at("n_grid").get<std::vector<long>>(),
                      j.value("trials_per_n", 1),
                      j.value("root_seed", std::uint64_t{0}),
                      j.value("truth_precision", 0.01)};
  plan.validate();
  return plan;
}

ExperimentPlan load_plan(const std::string& path) {
  return plan_from_json(load_json_file(path),
                        std::filesystem::path(path).parent_path().string());
}

namespace {

json gaussian_params_to_json(const GaussianModel& g) {
  return {{"mean", vector_to_json(g.mean())},
          {"cov", matrix_to_json(g.cov())},
          {"isotropic", g.isotropic()}};
}

GaussianModel gaussian_params_from_json(const json& j) {
  require_keys(j, {"mean", "cov", "isotropic"}, "gaussian");
  return GaussianModel(vector_from_json(j.at("mean"), "mean"),
                       matrix_from_json(j.at("cov"), "cov"), j.value("isotropic", false));
}

json train_info_to_json(const TrainInfo& info) {
  return {{"iterations", info.iterations},
          {"final_loss", info.final_loss},
          {"projected_gradient_norm", info.projected_gradient_norm},
          {"converged", info.converged}};
}

TrainInfo train_info_from_json(const json& j) {
  require_keys(j, {"iterations", "final_loss", "projected_gradient_norm", "converged"},
               "diagnostics");
  TrainInfo info;
  info.iterations = j.value("iterations", 0);
  info.final_loss = j.value("final_loss", 0.0);
  info.projected_gradient_norm = j.value("projected_gradient_norm", 0.0);
  info.converged = j.value("converged", false);
  return info;
}

}  // namespace

json ratio_model_to_json(const DensityRatioModel& model) {
  json j{{"format_version", kFormatVersion}};
  if (model.has_bound()) j["truncation_bound"] = model.bound();
  if (const LogisticModel* lm = model.logistic_model()) {
    j["variant"] = "logistic";
    j["theta"] = vector_to_json(lm->theta);
    j["intercept"] = lm->intercept;
    j["norm_bound"] = lm->norm_bound;
    j["diagnostics"] = train_info_to_json(lm->info);
    return j;
  }
  if (const KernelLogisticModel* km = model.kernel_logistic_model()) {
    j["variant"] = "kernel_logistic";
    j["support_points"] = matrix_to_json(km->support_points);
    j["gammas"] = vector_to_json(km->gammas);
    j["kernel"] = kernel_to_json(km->kernel);
    j["intercept"] = km->intercept;
    j["rkhs_norm_bound"] = km->rkhs_norm_bound;
    j["rkhs_norm"] = km->rkhs_norm;
    j["diagnostics"] = train_info_to_json(km->info);
    return j;
  }
  if (const GaussianModel* num = model.numerator()) {
    j["variant"] = "gaussian_ratio";
    j["num"] = gaussian_params_to_json(*num);
    j["den"] = gaussian_params_to_json(*model.denominator());
    return j;
  }
  throw ConfigError("ratio_model_to_json: exact closures cannot be serialized");
}

DensityRatioModel ratio_model_from_json(const json& j) {
  check_version(j, "model");
  require_keys(j,
               {"format_version", "variant", "truncation_bound", "theta", "intercept",
                "norm_bound", "support_points", "gammas", "kernel", "rkhs_norm_bound",
                "rkhs_norm", "num", "den", "diagnostics"},
               "model");
  const std::string variant = j.at("variant").get<std::string>();
  DensityRatioModel model = [&] {
    if (variant == "logistic") {
      LogisticModel lm;
      lm.theta = vector_from_json(j.at("theta"), "theta");
      lm.intercept = j.value("intercept", 0.0);
      lm.norm_bound = j.value("norm_bound", 0.0);
      if (j.contains("diagnostics")) lm.info = train_info_from_json(j.at("diagnostics"));
      return DensityRatioModel::logistic(std::move(lm), FeatureMap{});
    }
    if (variant == "kernel_logistic") {
      KernelLogisticModel km;
      km.support_points = matrix_from_json(j.at("support_points"), "support_points");
      km.gammas = vector_from_json(j.at("gammas"), "gammas");
      km.kernel = kernel_from_json(j.at("kernel"));
      km.intercept = j.value("intercept", 0.0);
      km.rkhs_norm_bound = j.value("rkhs_norm_bound", 0.0);
      km.rkhs_norm = j.value("rkhs_norm", 0.0);
      if (j.contains("diagnostics")) km.info = train_info_from_json(j.at("diagnostics"));
      return DensityRatioModel::kernel_logistic(std::move(km));
    }
    if (variant == "gaussian_ratio")
      return DensityRatioModel::gaussian_ratio(gaussian_params_from_json(j.at("num")),
                                               gaussian_params_from_json(j.at("den")));
    throw ConfigError("model: unknown variant '" + variant + "'");
  }();
  if (j.contains("truncation_bound"))
    model = truncate_ratio(std::move(model), j.at("truncation_bound").get<double>());
  return model;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

void open_or_throw(std::ofstream& out, const std::string& path) {
  out.open(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
}

}  // namespace

void write_trials_csv(const std::string& path, const std::vector<TrialRecord>& records,
                      bool include_timing) {
  std::ofstream out;
  open_or_throw(out, path);
  out << "n,trial_index,seed,estimate,truth,abs_error,truncated_count,converged,failed";
  if (include_timing) out << ",wall_ms";
  out << "\n";
  for (const auto& r : records) {
    out << r.n << ',' << r.trial_index << ',' << r.seed << ',' << format_double(r.estimate) << ','
        << format_double(r.truth) << ',' << format_double(r.abs_error) << ',' << r.truncated_count
        << ',' << (r.converged ? 1 : 0) << ',' << (r.failed ? 1 : 0);
    if (include_timing) out << ',' << format_double(r.wall_ms);
    out << '\n';
    out.flush();  // keep partial files row-complete
  }
}

void write_summary_csv(const std::string& path, const std::vector<SummaryRow>& rows,
                       const std::string& estimator, const std::string& scenario) {
  std::ofstream out;
  open_or_throw(out, path);
  out << "estimator,scenario,n,trials,failed,valid,median_abs_error,p10_abs_error,"
         "p90_abs_error,success_rate,epsilon,mean_truncated_fraction\n";
  for (const auto& r : rows) {
    out << estimator << ',' << scenario << ',' << r.n << ',' << r.trials << ',' << r.failed << ','
        << (r.valid ? 1 : 0) << ',' << format_double(r.median_abs_error) << ','
        << format_double(r.p10_abs_error) << ',' << format_double(r.p90_abs_error) << ','
        << format_double(r.success_rate) << ',' << format_double(r.epsilon) << ','
        << format_double(r.mean_truncated_fraction) << '\n';
  }
}

std::vector<SummaryRecord> read_summary_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty summary '" + path + "'");
  const std::string expected =
      "estimator,scenario,n,trials,failed,valid,median_abs_error,p10_abs_error,"
      "p90_abs_error,success_rate,epsilon,mean_truncated_fraction";
  if (line != expected) throw ConfigError("summary '" + path + "': unexpected schema");

  std::vector<SummaryRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 12) throw ConfigError("summary '" + path + "': malformed row");
    SummaryRecord rec;
    rec.estimator = fields[0];
    rec.scenario = fields[1];
    SummaryRow& r = rec.row;
    r.n = std::stol(fields[2]);
    r.trials = std::stoi(fields[3]);
    r.failed = std::stoi(fields[4]);
    r.valid = fields[5] == "1";
    r.median_abs_error = std::stod(fields[6]);
    r.p10_abs_error = std::stod(fields[7]);
    r.p90_abs_error = std::stod(fields[8]);
    r.success_rate = std::stod(fields[9]);
    r.epsilon = std::stod(fields[10]);
    r.mean_truncated_fraction = std::stod(fields[11]);
    records.push_back(std::move(rec));
  }
  return records;
}

void write_unlabeled_csv(const std::string& path, const Eigen::MatrixXd& points) {
  std::ofstream out;
  open_or_throw(out, path);
  out << "dim";
  for (Eigen::Index i = 0; i < points.rows(); ++i) out << ",x" << i;
  out << "\n";
  for (Eigen::Index c = 0; c < points.cols(); ++c) {
    out << points.rows();
    for (Eigen::Index i = 0; i < points.rows(); ++i) out << ',' << format_double(points(i, c));
    out << '\n';
  }
}

void write_labeled_csv(const std::string& path, const Eigen::MatrixXd& points,
                       const Eigen::VectorXd& f_values) {
  if (points.cols() != f_values.size())
    throw std::invalid_argument("write_labeled_csv: one f value per point required");
  std::ofstream out;
  open_or_throw(out, path);
  out << "dim";
  for (Eigen::Index i = 0; i < points.rows(); ++i) out << ",x" << i;
  out << ",f_value\n";
  for (Eigen::Index c = 0; c < points.cols(); ++c) {
    out << points.rows();
    for (Eigen::Index i = 0; i < points.rows(); ++i) out << ',' << format_double(points(i, c));
    out << ',' << format_double(f_values[c]) << '\n';
  }
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("'" + path + "': " + e.what());
  }
  return j;
}

void save_json_file(const json& j, const std::string& path) {
  std::ofstream out;
  open_or_throw(out, path);
  out << j.dump(2) << '\n';
}

}  // namespace covshift
