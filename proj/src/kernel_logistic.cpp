#include "covshift/kernel_logistic.hpp"

#include <cmath>
#include <stdexcept>

namespace covshift {

namespace {

inline double log1p_exp_neg(double m) {
  return m >= 0.0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m));
}

inline double sigmoid_neg(double m) {
  if (m >= 0.0) {
    const double e = std::exp(-m);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(m));
}

double mean_nll(const Eigen::VectorXd& y, const Eigen::VectorXd& scores, double s) {
  double loss = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) loss += log1p_exp_neg(y[i] * (scores[i] + s));
  return loss / static_cast<double>(y.size());
}

}  // namespace

double KernelLogisticModel::score(const Eigen::VectorXd& x) const {
  double value = intercept;
  for (Eigen::Index i = 0; i < gammas.size(); ++i)
    value += gammas[i] * kernel(support_points.col(i), x);
  return value;
}

Eigen::VectorXd KernelLogisticModel::score_batch(const Eigen::MatrixXd& points) const {
  const Eigen::Index n = points.cols();
  Eigen::VectorXd out(n);
  constexpr Eigen::Index kBlock = 4096;
  for (Eigen::Index start = 0; start < n; start += kBlock) {
    const Eigen::Index len = std::min(kBlock, n - start);
    out.segment(start, len) =
        kernel_cross(kernel, support_points, points.middleCols(start, len)).transpose() * gammas;
  }
  out.array() += intercept;
  return out;
}

KernelLogisticModel train_kernel_logistic(const Eigen::MatrixXd& points,
                                          const Eigen::VectorXd& labels,
                                          const KernelSpec& kernel, double rkhs_norm_bound,
                                          const KernelLogisticTrainOptions& opts) {
  LabeledDataset probe{points, labels};
  probe.validate(/*require_both_labels=*/false);
  if (!(rkhs_norm_bound >= 0.0))
    throw std::invalid_argument("train_kernel_logistic: norm bound must be >= 0");
  const Eigen::Index n = points.cols();
  if (n > opts.support_cap)
    throw std::invalid_argument("train_kernel_logistic: sample exceeds the dense Gram cap; subsample first");

  const Eigen::MatrixXd gram = gram_matrix(kernel, points);
  const double b2 = rkhs_norm_bound * rkhs_norm_bound;
  const bool with_s = opts.fit_intercept;
  const double inv_n = 1.0 / static_cast<double>(n);

  // Same step rule as the shared projected-gradient solver, with K gamma
  // carried along so each iteration costs two Gram products.
  Eigen::VectorXd gamma = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(n);  // gram * gamma
  double s = 0.0;
  double f = mean_nll(labels, u, s);
  double step = opts.solver.init_step;
  double threshold = opts.solver.tol;
  double window_start_loss = f;

  TrainInfo info;
  for (int it = 1; it <= opts.solver.max_iters; ++it) {
    info.iterations = it;

    Eigen::VectorXd w(n);
    for (Eigen::Index i = 0; i < n; ++i) w[i] = -labels[i] * sigmoid_neg(labels[i] * (u[i] + s));
    const Eigen::VectorXd grad = (gram.selfadjointView<Eigen::Lower>() * w) * inv_n;
    const double grad_s = with_s ? w.sum() * inv_n : 0.0;
    const Eigen::VectorXd gram_grad = gram.selfadjointView<Eigen::Lower>() * grad;

    // Candidate at step alpha, rescaled onto the ball when it leaves it.
    auto candidate = [&](double alpha, Eigen::VectorXd& cg, Eigen::VectorXd& cu, double& cs) {
      cg = gamma - alpha * grad;
      cu = u - alpha * gram_grad;
      const double q = cg.dot(cu);
      if (q > b2 && q > 0.0) {
        const double scale = rkhs_norm_bound / std::sqrt(q);
        cg *= scale;
        cu *= scale;
      }
      cs = with_s ? std::clamp(s - alpha * grad_s, -rkhs_norm_bound, rkhs_norm_bound) : 0.0;
    };

    Eigen::VectorXd pg_g, pg_u;
    double pg_s;
    candidate(1.0, pg_g, pg_u, pg_s);
    double pg_norm2 = (gamma - pg_g).squaredNorm();
    if (with_s) pg_norm2 += (s - pg_s) * (s - pg_s);
    info.projected_gradient_norm = std::sqrt(pg_norm2);
    if (it == 1 && opts.solver.tol_relative > 0.0)
      threshold = std::max(opts.solver.tol, opts.solver.tol_relative * info.projected_gradient_norm);
    if (info.projected_gradient_norm <= threshold) {
      info.converged = true;
      break;
    }

    step = std::min(step * 2.0, 1e12);
    bool accepted = false;
    while (step >= 1e-18) {
      Eigen::VectorXd cg, cu;
      double cs;
      candidate(step, cg, cu, cs);
      double dx2 = (gamma - cg).squaredNorm();
      if (with_s) dx2 += (s - cs) * (s - cs);
      if (dx2 > 0.0) {
        const double fc = mean_nll(labels, cu, cs);
        if (fc <= f - (opts.solver.armijo_c / step) * dx2) {
          gamma = std::move(cg);
          u = std::move(cu);
          s = cs;
          f = fc;
          accepted = true;
          break;
        }
      }
      step *= opts.solver.backtrack;
    }
    if (!accepted) {
      info.converged = std::isfinite(f);  // stalled at double precision
      break;
    }

    if (opts.solver.plateau_tol > 0.0 && it % opts.solver.plateau_window == 0) {
      if (window_start_loss - f <= opts.solver.plateau_tol * (1.0 + std::abs(f))) {
        info.converged = true;
        break;
      }
      window_start_loss = f;
    }
  }
  info.final_loss = f;

  KernelLogisticModel model;
  model.support_points = points;
  model.gammas = std::move(gamma);
  model.kernel = kernel;
  model.intercept = s;
  model.rkhs_norm_bound = rkhs_norm_bound;
  model.rkhs_norm = std::sqrt(std::max(0.0, model.gammas.dot(u)));
  model.info = info;
  return model;
}

}  // namespace covshift
