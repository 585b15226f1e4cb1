#include "covshift/kmm.hpp"

#include <cmath>
#include <stdexcept>

#include "covshift/rng.hpp"

namespace covshift {

namespace {

// Euclidean projection onto {0 <= x <= hi} intersect {lo_sum <= sum(x) <= hi_sum}
// via Dykstra's alternating scheme.
Eigen::VectorXd project_box_slab(const Eigen::VectorXd& x, double hi, double lo_sum,
                                 double hi_sum) {
  const Eigen::Index n = x.size();
  Eigen::VectorXd y = x;
  Eigen::VectorXd p_box = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd p_slab = Eigen::VectorXd::Zero(n);
  for (int it = 0; it < 1000; ++it) {
    const Eigen::VectorXd box_in = y + p_box;
    const Eigen::VectorXd box_out = box_in.cwiseMax(0.0).cwiseMin(hi);
    p_box = box_in - box_out;

    const Eigen::VectorXd slab_in = box_out + p_slab;
    const double total = slab_in.sum();
    Eigen::VectorXd slab_out = slab_in;
    if (total < lo_sum)
      slab_out.array() += (lo_sum - total) / static_cast<double>(n);
    else if (total > hi_sum)
      slab_out.array() += (hi_sum - total) / static_cast<double>(n);
    p_slab = slab_in - slab_out;

    const double shift = (slab_out - y).lpNorm<Eigen::Infinity>();
    y = slab_out;
    if (shift < 1e-13 && it > 0) break;
  }
  return y;
}

// Row sums of the train/test kernel block and the total test-test kernel
// mass, computed blockwise so the cross Gram is never fully materialized.
void cross_terms(const KernelSpec& kernel, const Eigen::MatrixXd& train,
                 const Eigen::MatrixXd& test, Eigen::VectorXd& cross_row_sums,
                 double& test_total) {
  const Eigen::Index n_te = test.cols();
  cross_row_sums = Eigen::VectorXd::Zero(train.cols());
  test_total = 0.0;
  constexpr Eigen::Index kBlock = 2048;
  for (Eigen::Index start = 0; start < n_te; start += kBlock) {
    const Eigen::Index len = std::min(kBlock, n_te - start);
    const auto block = test.middleCols(start, len);
    cross_row_sums += kernel_cross(kernel, train, block).rowwise().sum();
    for (Eigen::Index s2 = 0; s2 < n_te; s2 += kBlock) {
      const Eigen::Index len2 = std::min(kBlock, n_te - s2);
      if (s2 < start) continue;  // symmetric halves counted once, doubled below
      const Eigen::MatrixXd kb = kernel_cross(kernel, block, test.middleCols(s2, len2));
      test_total += (s2 == start) ? kb.sum() : 2.0 * kb.sum();
    }
  }
}

}  // namespace

KmmResult kmm_weights(const Eigen::MatrixXd& train_points, const Eigen::MatrixXd& test_points,
                      const KmmConfig& config) {
  const Eigen::Index n_tr = train_points.cols();
  const Eigen::Index n_te = test_points.cols();
  if (n_tr < 1 || n_te < 1) throw std::invalid_argument("kmm_weights: empty point set");
  if (train_points.rows() != test_points.rows())
    throw std::invalid_argument("kmm_weights: dimension mismatch");
  if (!(config.weight_bound > 0.0)) throw std::invalid_argument("kmm_weights: weight bound must be > 0");
  if (!(config.mean_match_tol >= 0.0))
    throw std::invalid_argument("kmm_weights: mean_match_tol must be >= 0");
  if (config.weight_bound < 1.0 - config.mean_match_tol)
    throw std::invalid_argument("kmm_weights: box and slab constraints are jointly infeasible");

  const Eigen::MatrixXd gram = gram_matrix(config.kernel, train_points);
  Eigen::VectorXd cross_sums;
  double test_total = 0.0;
  cross_terms(config.kernel, train_points, test_points, cross_sums, test_total);

  const double inv_tr = 1.0 / static_cast<double>(n_tr);
  const double inv_te = 1.0 / static_cast<double>(n_te);
  const double constant = test_total * inv_te * inv_te;
  const double lo_sum = static_cast<double>(n_tr) * (1.0 - config.mean_match_tol);
  const double hi_sum = static_cast<double>(n_tr) * (1.0 + config.mean_match_tol);

  auto objective = [&](const Eigen::VectorXd& beta) {
    const Eigen::VectorXd gram_beta = gram.selfadjointView<Eigen::Lower>() * beta;
    const double quad = beta.dot(gram_beta) * inv_tr * inv_tr;
    const double lin = -2.0 * inv_tr * inv_te * beta.dot(cross_sums);
    return quad + lin + constant;
  };
  auto gradient = [&](const Eigen::VectorXd& beta) {
    Eigen::VectorXd g = gram.selfadjointView<Eigen::Lower>() * beta;
    g *= 2.0 * inv_tr * inv_tr;
    g -= (2.0 * inv_tr * inv_te) * cross_sums;
    return g;
  };
  auto project = [&](const Eigen::VectorXd& beta) {
    return project_box_slab(beta, config.weight_bound, lo_sum, hi_sum);
  };

  // The Hessian scales like 2|K|/n^2, so seed the line search near 1/L.
  SolverOptions opts = config.solver;
  const double row_sum_bound = gram.cwiseAbs().rowwise().sum().maxCoeff();
  opts.init_step = 0.5 * static_cast<double>(n_tr) * static_cast<double>(n_tr) /
                   std::max(row_sum_bound, 1e-12);

  const Eigen::VectorXd beta0 =
      Eigen::VectorXd::Constant(n_tr, std::min(1.0, config.weight_bound));
  const SolverResult res = projected_gradient(objective, gradient, project, beta0, opts);

  KmmResult out;
  out.beta = project(res.x);  // final clean projection
  out.objective = objective(out.beta);
  out.iterations = res.iterations;
  out.converged = res.converged;

  const double box_gap = std::max(0.0, std::max(-out.beta.minCoeff(),
                                                out.beta.maxCoeff() - config.weight_bound));
  const double mean = out.beta.sum() * inv_tr;
  const double slab_gap = std::max(0.0, std::abs(mean - 1.0) - config.mean_match_tol);
  out.feasibility_gap = std::max(box_gap, slab_gap);
  return out;
}

NaivePluginFit naive_plugin_regress(const Eigen::MatrixXd& points, const Eigen::VectorXd& values,
                                    const KernelSpec& kernel, double f_norm_bound,
                                    const KmmConfig& config, std::uint64_t seed) {
  const Eigen::Index n = points.cols();
  if (n < 1) throw std::invalid_argument("naive_plugin_regress: empty sample");
  if (values.size() != n) throw std::invalid_argument("naive_plugin_regress: one value per point required");
  if (!(f_norm_bound >= 0.0))
    throw std::invalid_argument("naive_plugin_regress: norm bound must be >= 0");

  // Support points carry the expansion; residuals always use every sample.
  const std::uint64_t sub_seed = derive_seed(seed, 0x5e9f);
  const std::vector<int> sup_idx =
      subsample_indices(static_cast<int>(n), config.support_cap, sub_seed);
  const Eigen::Index n_sup = static_cast<Eigen::Index>(sup_idx.size());
  Eigen::MatrixXd support(points.rows(), n_sup);
  for (Eigen::Index i = 0; i < n_sup; ++i)
    support.col(i) = points.col(sup_idx[static_cast<std::size_t>(i)]);

  const Eigen::MatrixXd k_rect = kernel_cross(kernel, points, support);  // n x n_sup
  const Eigen::MatrixXd k_sup = gram_matrix(kernel, support);
  const double b2 = f_norm_bound * f_norm_bound;

  auto project = [&](Eigen::VectorXd lambda) {
    const double q = lambda.dot(k_sup.selfadjointView<Eigen::Lower>() * lambda);
    if (q > b2) lambda *= (q > 0.0 ? f_norm_bound / std::sqrt(q) : 0.0);
    return lambda;
  };

  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(n_sup);
  Eigen::VectorXd residual = -values;
  double objective = residual.lpNorm<1>();

  Eigen::VectorXd best_lambda = lambda;
  double best_objective = objective;
  double best_at_midpoint = objective;
  int steps_taken = 0;

  // Step scale calibrated from the first subgradient so c/sqrt(k) starts at
  // a useful magnitude regardless of the kernel scaling.
  double c = 0.0;
  for (int k = 1; k <= config.subgradient_iters; ++k) {
    const Eigen::VectorXd sign = residual.array().sign();
    const Eigen::VectorXd g = k_rect.transpose() * sign;
    const double g_norm = g.norm();
    if (g_norm < 1e-14) break;
    if (k == 1) c = config.subgradient_scale * objective / (g_norm * g_norm);
    lambda = project(lambda - (c / std::sqrt(static_cast<double>(k))) * g);
    residual = k_rect * lambda - values;
    objective = residual.lpNorm<1>();
    steps_taken = k;
    if (objective < best_objective) {
      best_objective = objective;
      best_lambda = lambda;
    }
    if (k == config.subgradient_iters / 2) best_at_midpoint = best_objective;
  }

  NaivePluginFit fit;
  fit.regressor.support_points = std::move(support);
  fit.regressor.gammas = std::move(best_lambda);
  fit.regressor.kernel = kernel;
  fit.regressor.intercept = 0.0;
  fit.regressor.rkhs_norm_bound = f_norm_bound;
  {
    const Eigen::VectorXd kg =
        k_sup.selfadjointView<Eigen::Lower>() * fit.regressor.gammas;
    fit.regressor.rkhs_norm = std::sqrt(std::max(0.0, fit.regressor.gammas.dot(kg)));
  }
  fit.objective = best_objective;
  fit.iterations = steps_taken;
  // Converged when the best iterate stopped improving meaningfully over the
  // trailing half of the run.
  fit.converged = (best_at_midpoint - best_objective) <= config.solver.tol * static_cast<double>(n) ||
                  best_objective <= config.solver.tol * static_cast<double>(n);
  fit.subsample_seed = sub_seed;
  return fit;
}

EstimateResult estimate_naive_plugin(const LabeledSample& labeled,
                                     const Eigen::MatrixXd& test_unlabeled,
                                     const KernelSpec& kernel, double f_norm_bound,
                                     const KmmConfig& config, std::uint64_t seed) {
  if (test_unlabeled.cols() < 1)
    throw std::invalid_argument("estimate_naive_plugin: empty test sample");
  const NaivePluginFit fit =
      naive_plugin_regress(labeled.x, labeled.f, kernel, f_norm_bound, config, seed);

  const Eigen::VectorXd predictions = fit.regressor.score_batch(test_unlabeled);

  EstimateResult result;
  result.value = predictions.mean();
  result.batch_means = {result.value};
  result.n_labeled_used = labeled.count();
  result.n_unlabeled_used = test_unlabeled.cols();
  result.diagnostics["l1_objective"] = fit.objective;
  result.diagnostics["l1_objective_per_sample"] =
      fit.objective / static_cast<double>(labeled.count());
  result.diagnostics["regressor_rkhs_norm"] = fit.regressor.rkhs_norm;
  result.diagnostics["subgradient_iterations"] = fit.iterations;
  result.diagnostics["solver_converged"] = fit.converged ? 1.0 : 0.0;
  result.fitted_kernel_logistic = fit.regressor;
  return result;
}

EstimateResult estimate_kmm(const LabeledSample& labeled, const Eigen::MatrixXd& test_unlabeled,
                            const KmmConfig& config) {
  if (labeled.count() < 1) throw std::invalid_argument("estimate_kmm: empty labeled set");
  if (test_unlabeled.cols() < 1) throw std::invalid_argument("estimate_kmm: empty test sample");
  const KmmResult weights = kmm_weights(labeled.x, test_unlabeled, config);

  EstimateResult result;
  result.value = weights.beta.dot(labeled.f) / static_cast<double>(labeled.count());
  result.batch_means = {result.value};
  result.n_labeled_used = labeled.count();
  result.n_unlabeled_used = test_unlabeled.cols();
  result.diagnostics["kmm_objective"] = weights.objective;
  result.diagnostics["kmm_feasibility_gap"] = weights.feasibility_gap;
  result.diagnostics["solver_iterations"] = weights.iterations;
  result.diagnostics["solver_converged"] = weights.converged ? 1.0 : 0.0;
  return result;
}

}  // namespace covshift
