#include "covshift/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "covshift/rng.hpp"

namespace covshift {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double TargetFunction::operator()(const Eigen::VectorXd& x) const {
  if (const auto* h = std::get_if<IndicatorHalfspace>(&v_))
    return h->w.dot(x) > h->b ? 1.0 : 0.0;
  if (const auto* t = std::get_if<TanhCoordinate>(&v_)) {
    if (t->index < 0 || t->index >= x.size())
      throw std::invalid_argument("TargetFunction: coordinate index out of range");
    return std::tanh(x[t->index]);
  }
  if (const auto* p = std::get_if<PlantedRkhs>(&v_)) {
    double value = 0.0;
    for (Eigen::Index i = 0; i < p->alphas.size(); ++i)
      value += p->alphas[i] * p->kernel(p->centers.col(i), x);
    return value;
  }
  if (const auto* b = std::get_if<IndicatorBall>(&v_))
    return (x - b->center).norm() <= b->radius ? 1.0 : 0.0;
  return 0.0;  // Zero
}

bool ScenarioSpec::has_flag(const std::string& flag) const {
  return std::find(flags.begin(), flags.end(), flag) != flags.end();
}

void ScenarioSpec::validate_probe(std::uint64_t seed) const {
  constexpr int kProbe = 50000;  // per distribution
  for (int side = 0; side < 2; ++side) {
    const Distribution& dist = side == 0 ? p_tr : p_te;
    const Eigen::MatrixXd samples = dist.sample(kProbe, derive_seed(seed, 0xf00d, side));
    for (int j = 0; j < kProbe; ++j) {
      const double value = f(samples.col(j));
      if (!(std::abs(value) <= 1.0 + 1e-9)) {
        std::ostringstream os;
        os << "scenario '" << id << "': |f| > 1 at a probe sample (" << value << ")";
        throw std::invalid_argument(os.str());
      }
    }
  }
}

namespace {

std::optional<double> closed_form_truth(const Distribution& p_te, const TargetFunction& f) {
  // Halfspace indicator under a Gaussian: Phi of the standardized margin.
  const auto* h = std::get_if<TargetFunction::IndicatorHalfspace>(&f.variant());
  const GaussianModel* g = p_te.as_gaussian();
  if (h != nullptr && g != nullptr) {
    const double scale = std::sqrt(h->w.dot(g->cov() * h->w));
    if (scale <= 0.0) return std::nullopt;
    return normal_cdf((h->w.dot(g->mean()) - h->b) / scale);
  }
  // Finite support: exact expectation.
  if (const DiscreteAtoms* atoms = p_te.as_discrete()) {
    double value = 0.0;
    for (Eigen::Index i = 0; i < atoms->probs.size(); ++i)
      value += atoms->probs[i] * f(atoms->atoms.col(i));
    return value;
  }
  if (std::holds_alternative<TargetFunction::Zero>(f.variant())) return 0.0;
  return std::nullopt;
}

double operator_norm(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (m + m.transpose()));
  return std::max(std::abs(eig.eigenvalues().minCoeff()), std::abs(eig.eigenvalues().maxCoeff()));
}

}  // namespace

ScenarioSpec make_gaussian_scenario(int d, const Eigen::VectorXd& mean_shift,
                                    const Eigen::MatrixXd& cov_tr, const Eigen::MatrixXd& cov_te,
                                    TargetFunction f, const GaussianScenarioOptions& opts) {
  if (mean_shift.size() != d) throw std::invalid_argument("make_gaussian_scenario: shift dimension mismatch");
  GaussianModel p_tr(Eigen::VectorXd::Zero(d), cov_tr);
  GaussianModel p_te(mean_shift, cov_te);

  AssumptionRecord record;
  record.limit = opts.assumption_limit;
  record.mean_shift_norm = mean_shift.norm();
  record.mean_tr_norm = 0.0;
  const Eigen::MatrixXd inv_tr = p_tr.cov_inverse();
  const Eigen::MatrixXd inv_te = p_te.cov_inverse();
  record.sigma_tr_inv_op = operator_norm(inv_tr);
  record.sigma_inv_diff_frobenius = (inv_tr - inv_te).norm();
  record.satisfied = record.mean_shift_norm <= opts.assumption_limit + 1e-12 &&
                     record.sigma_inv_diff_frobenius <= opts.assumption_limit + 1e-12;
  if (!record.satisfied && !opts.warn_and_proceed)
    throw std::invalid_argument(
        "make_gaussian_scenario: closeness assumptions violated (pass warn_and_proceed for stress tests)");

  const bool null_shift = record.mean_shift_norm == 0.0 && (cov_tr - cov_te).norm() == 0.0;

  ScenarioSpec scenario{opts.id,
                        Distribution(std::move(p_tr)),
                        Distribution(std::move(p_te)),
                        std::move(f),
                        MonteCarloTruth{opts.mc_budget, opts.mc_seed},
                        std::nullopt,
                        record,
                        std::nullopt,
                        {},
                        {}};
  if (const auto exact = closed_form_truth(scenario.p_te, scenario.f))
    scenario.truth = ClosedFormTruth{*exact};
  if (null_shift) scenario.flags.push_back("null-shift");
  return scenario;
}

ScenarioSpec make_expfam_scenario(const Eigen::VectorXd& theta_tr, const Eigen::VectorXd& theta_te,
                                  TargetFunction f, const GaussianScenarioOptions& opts) {
  if (theta_tr.size() != theta_te.size())
    throw std::invalid_argument("make_expfam_scenario: parameter dimension mismatch");
  if (!theta_tr.allFinite() || !theta_te.allFinite())
    throw std::invalid_argument("make_expfam_scenario: non-finite natural parameters");

  ScenarioSpec scenario{opts.id,
                        Distribution(GaussianModel::standard(theta_tr)),
                        Distribution(GaussianModel::standard(theta_te)),
                        std::move(f),
                        MonteCarloTruth{opts.mc_budget, opts.mc_seed},
                        std::nullopt,
                        std::nullopt,
                        std::nullopt,
                        {},
                        {}};

  // A(theta) = |theta|^2 / 2 for the unit-covariance mean family, so the
  // intercept of ln(p_te/p_tr) is A(theta_tr) - A(theta_te).
  ExpfamTruth truth;
  truth.theta_star = theta_te - theta_tr;
  truth.s_star = 0.5 * (theta_tr.squaredNorm() - theta_te.squaredNorm());
  scenario.expfam_truth = std::move(truth);

  AssumptionRecord record;
  record.mean_shift_norm = (theta_te - theta_tr).norm();
  record.mean_tr_norm = theta_tr.norm();
  record.sigma_tr_inv_op = 1.0;
  record.sigma_inv_diff_frobenius = 0.0;
  record.satisfied = true;
  scenario.assumptions = record;

  if (const auto exact = closed_form_truth(scenario.p_te, scenario.f))
    scenario.truth = ClosedFormTruth{*exact};
  if (record.mean_shift_norm == 0.0) scenario.flags.push_back("null-shift");
  return scenario;
}

ScenarioSpec make_rkhs_scenario(GaussianModel base, const KernelSpec& kernel,
                                const Eigen::MatrixXd& centers, const Eigen::VectorXd& alphas,
                                TargetFunction f, const RkhsScenarioOptions& opts) {
  // |log ratio| <= sum_i |alpha_i| * sup K, and both rbf and offset
  // polynomials peak on the diagonal for our planted instances.
  const double bound = alphas.cwiseAbs().sum();
  const bool null_shift = alphas.size() == 0 || alphas.cwiseAbs().maxCoeff() == 0.0;
  RkhsReweightedModel p_te(base, kernel, centers, alphas, bound);

  ScenarioSpec scenario{opts.id,
                        Distribution(std::move(base)),
                        Distribution(std::move(p_te)),
                        std::move(f),
                        MonteCarloTruth{opts.mc_budget, opts.mc_seed},
                        std::nullopt,
                        std::nullopt,
                        std::nullopt,
                        {},
                        {}};
  if (null_shift) scenario.flags.push_back("null-shift");
  return scenario;
}

std::pair<ScenarioSpec, ScenarioSpec> make_lower_bound_instance(double ratio_bound,
                                                                double epsilon) {
  if (!(ratio_bound >= 1.0)) throw std::invalid_argument("make_lower_bound_instance: B must be >= 1");
  if (!(epsilon > 0.0 && 2.0 * epsilon <= 1.0))
    throw std::invalid_argument("make_lower_bound_instance: need 0 < 2*eps <= 1");

  Eigen::MatrixXd atoms(1, 3);
  atoms << 1.0, 0.0, 2.0;  // first atom is the heavy-ratio region S

  const double te_in = 2.0 * epsilon;
  const double tr_in = 2.0 * epsilon / ratio_bound;
  Eigen::VectorXd probs_te(3), probs_tr(3);
  probs_te << te_in, (1.0 - te_in) / 2.0, (1.0 - te_in) / 2.0;
  probs_tr << tr_in, (1.0 - tr_in) / 2.0, (1.0 - tr_in) / 2.0;

  DiscreteAtoms p_tr(atoms, probs_tr);
  DiscreteAtoms p_te(atoms, probs_te);

  TargetFunction f_indicator(
      TargetFunction::IndicatorBall{Eigen::VectorXd::Constant(1, 1.0), 0.25});
  TargetFunction f_zero{TargetFunction::Zero{}};

  ScenarioSpec a{"lower-bound-A",
                 Distribution(p_tr),
                 Distribution(p_te),
                 std::move(f_indicator),
                 ClosedFormTruth{te_in},
                 TailBoundHint{ratio_bound, epsilon},
                 std::nullopt,
                 std::nullopt,
                 {},
                 {}};
  ScenarioSpec b{"lower-bound-B",
                 Distribution(std::move(p_tr)),
                 Distribution(std::move(p_te)),
                 std::move(f_zero),
                 ClosedFormTruth{0.0},
                 TailBoundHint{ratio_bound, epsilon},
                 std::nullopt,
                 std::nullopt,
                 {},
                 {}};
  if (ratio_bound == 1.0) {
    a.flags.push_back("degenerate-lower-bound");
    b.flags.push_back("degenerate-lower-bound");
  }
  return {std::move(a), std::move(b)};
}

GroundTruth ground_truth(const ScenarioSpec& scenario, double precision) {
  const auto* mc = std::get_if<MonteCarloTruth>(&scenario.truth);
  return ground_truth(scenario, precision, mc != nullptr ? mc->seed : 1);
}

GroundTruth ground_truth(const ScenarioSpec& scenario, double precision, std::uint64_t seed) {
  if (const auto* cf = std::get_if<ClosedFormTruth>(&scenario.truth)) return {cf->value, 0.0};
  if (!(precision > 0.0)) throw std::invalid_argument("ground_truth: precision must be > 0");
  const auto& mc = std::get<MonteCarloTruth>(scenario.truth);

  const long floor_budget = static_cast<long>(std::ceil(9.0 / (precision * precision)));
  const long budget = std::max(mc.budget, floor_budget);

  double sum = 0.0;
  double sum_sq = 0.0;
  long done = 0;
  constexpr long kBlock = 65536;
  std::uint64_t block_index = 0;
  while (done < budget) {
    const long len = std::min(kBlock, budget - done);
    const Eigen::MatrixXd samples =
        scenario.p_te.sample(static_cast<int>(len), derive_seed(seed, 0x7e57, block_index));
    for (long j = 0; j < len; ++j) {
      const double v = scenario.f(samples.col(j));
      sum += v;
      sum_sq += v * v;
    }
    done += len;
    ++block_index;
  }
  const double n = static_cast<double>(budget);
  const double mean = sum / n;
  const double var = std::max(0.0, sum_sq / n - mean * mean);
  return {mean, std::sqrt(var / n)};
}

}  // namespace covshift
