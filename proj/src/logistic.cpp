#include "covshift/logistic.hpp"

#include <cmath>
#include <stdexcept>

namespace covshift {

namespace {

// ln(1 + exp(-m)) without overflow on either sign of the margin.
inline double log1p_exp_neg(double m) {
  return m >= 0.0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m));
}

// sigma(-m) = 1 / (1 + exp(m))
inline double sigmoid_neg(double m) {
  if (m >= 0.0) {
    const double e = std::exp(-m);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(m));
}

}  // namespace

void LabeledDataset::validate(bool require_both_labels) const {
  if (y.size() == 0) throw std::invalid_argument("dataset is empty");
  if (z.cols() != y.size()) throw std::invalid_argument("dataset: one label per feature column required");
  if (!z.allFinite()) throw std::invalid_argument("dataset: non-finite features");
  bool has_pos = false, has_neg = false;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] == 1.0)
      has_pos = true;
    else if (y[i] == -1.0)
      has_neg = true;
    else
      throw std::invalid_argument("dataset: labels must be -1 or +1");
  }
  if (require_both_labels && (!has_pos || !has_neg))
    throw std::invalid_argument("dataset: both labels must be present");
}

NllValue nll_loss_grad(const Eigen::VectorXd& theta, double intercept,
                       const LabeledDataset& data) {
  if (data.y.size() == 0) throw std::invalid_argument("nll_loss_grad: empty dataset");
  if (theta.size() != data.feature_dim())
    throw std::invalid_argument("nll_loss_grad: feature dimension mismatch");
  if (!data.z.allFinite()) throw std::invalid_argument("nll_loss_grad: non-finite features");

  const Eigen::Index n = data.count();
  const Eigen::VectorXd margins =
      data.y.array() * ((data.z.transpose() * theta).array() + intercept);

  double loss = 0.0;
  Eigen::VectorXd w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    loss += log1p_exp_neg(margins[i]);
    w[i] = -data.y[i] * sigmoid_neg(margins[i]);
  }
  const double inv_n = 1.0 / static_cast<double>(n);

  NllValue out;
  out.loss = loss * inv_n;
  out.grad_theta = (data.z * w) * inv_n;
  out.grad_intercept = w.sum() * inv_n;
  return out;
}

LogisticModel train_logistic(const LabeledDataset& data, double norm_bound,
                             const LogisticTrainOptions& opts) {
  data.validate();
  if (!(norm_bound >= 0.0)) throw std::invalid_argument("train_logistic: norm bound must be >= 0");
  const Eigen::Index d = data.feature_dim();
  const bool with_s = opts.fit_intercept;
  const Eigen::Index nv = d + (with_s ? 1 : 0);

  auto split = [&](const Eigen::VectorXd& x) {
    return std::pair<Eigen::VectorXd, double>(x.head(d), with_s ? x[d] : 0.0);
  };

  auto loss = [&](const Eigen::VectorXd& x) {
    auto [theta, s] = split(x);
    return nll_loss_grad(theta, s, data).loss;
  };
  auto gradient = [&](const Eigen::VectorXd& x) {
    auto [theta, s] = split(x);
    const NllValue v = nll_loss_grad(theta, s, data);
    Eigen::VectorXd g(nv);
    g.head(d) = v.grad_theta;
    if (with_s) g[d] = v.grad_intercept;
    return g;
  };
  auto project = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd p = x;
    const double norm = p.head(d).norm();
    if (norm > norm_bound) p.head(d) *= (norm_bound / norm);
    if (with_s) p[d] = std::clamp(p[d], -norm_bound, norm_bound);
    return p;
  };

  const SolverResult res =
      projected_gradient(loss, gradient, project, Eigen::VectorXd::Zero(nv), opts.solver);

  LogisticModel model;
  model.theta = res.x.head(d);
  model.intercept = with_s ? res.x[d] : 0.0;
  model.norm_bound = norm_bound;
  model.info = {res.iterations, res.loss, res.projected_gradient_norm, res.converged};
  return model;
}

}  // namespace covshift
