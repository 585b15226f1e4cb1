#include "covshift/gaussian.hpp"

#include <cmath>
#include <sstream>

#include "covshift/rng.hpp"

namespace covshift {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;  // ln(2*pi)

void check_finite(const Eigen::MatrixXd& m, const char* what) {
  if (!m.allFinite()) {
    std::ostringstream os;
    os << what << " contains non-finite entries";
    throw std::invalid_argument(os.str());
  }
}

}  // namespace

GaussianModel::GaussianModel(Eigen::VectorXd mean, Eigen::MatrixXd cov, bool isotropic)
    : mean_(std::move(mean)), isotropic_(isotropic) {
  const Eigen::Index d = mean_.size();
  if (d < 1) throw std::invalid_argument("GaussianModel: dimension must be >= 1");
  check_finite(mean_, "mean");
  if (isotropic_) {
    cov_ = Eigen::MatrixXd::Identity(d, d);
  } else {
    if (cov.rows() != d || cov.cols() != d)
      throw std::invalid_argument("GaussianModel: covariance shape does not match mean");
    check_finite(cov, "cov");
    cov_ = 0.5 * (cov + cov.transpose());
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov_);
  if (eig.info() != Eigen::Success)
    throw FactorizationError("GaussianModel: eigendecomposition failed");
  const Eigen::VectorXd& evals = eig.eigenvalues();
  const double op_norm = std::max(std::abs(evals.minCoeff()), std::abs(evals.maxCoeff()));
  if (evals.minCoeff() < -1e-10 * std::max(op_norm, 1e-300))
    throw std::invalid_argument("GaussianModel: covariance is not positive semidefinite");
  sample_factor_ = eig.eigenvectors() * evals.cwiseMax(0.0).cwiseSqrt().asDiagonal();

  // Cholesky with a relative jitter ladder; failure is deferred until a
  // density is actually requested so degenerate fits stay representable.
  const double scale = cov_.trace() / static_cast<double>(d);
  for (double rel : {0.0, 1e-10, 1e-8, 1e-6}) {
    const double jitter = rel * scale;
    Eigen::MatrixXd shifted = cov_;
    if (jitter > 0.0) shifted.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(shifted);
    if (llt.info() == Eigen::Success) {
      const double min_diag = llt.matrixLLT().diagonal().minCoeff();
      if (min_diag > 0.0) {
        llt_ = std::move(llt);
        jitter_used_ = jitter;
        log_det_ = 2.0 * llt_->matrixLLT().diagonal().array().log().sum();
        break;
      }
    }
    if (scale <= 0.0) break;  // zero matrix: jitter cannot help
  }
}

GaussianModel GaussianModel::standard(Eigen::VectorXd mean) {
  const Eigen::Index d = mean.size();
  return GaussianModel(std::move(mean), Eigen::MatrixXd::Identity(d, d), false);
}

void GaussianModel::require_factorized() const {
  if (!llt_)
    throw FactorizationError("GaussianModel: covariance not factorizable (jitter up to 1e-6 relative)");
}

double GaussianModel::mahalanobis_sq(const Eigen::VectorXd& x) const {
  require_factorized();
  if (x.size() != dim()) throw std::invalid_argument("GaussianModel: dimension mismatch");
  const Eigen::VectorXd diff = x - mean_;
  return diff.dot(llt_->solve(diff));
}

double GaussianModel::log_det() const {
  require_factorized();
  return log_det_;
}

double GaussianModel::log_density(const Eigen::VectorXd& x) const {
  return -0.5 * mahalanobis_sq(x) - 0.5 * (log_det_ + static_cast<double>(dim()) * kLog2Pi);
}

Eigen::MatrixXd GaussianModel::sample(int n, std::uint64_t seed) const {
  if (n < 0) throw std::invalid_argument("sample: n must be >= 0");
  Rng rng(seed);
  const Eigen::Index d = dim();
  Eigen::MatrixXd z(d, n);
  for (int j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < d; ++i) z(i, j) = rng.normal();
  Eigen::MatrixXd out = sample_factor_ * z;
  out.colwise() += mean_;
  return out;
}

Eigen::MatrixXd GaussianModel::cov_inverse() const {
  require_factorized();
  return llt_->solve(Eigen::MatrixXd::Identity(dim(), dim()));
}

GaussianFit fit_gaussian(const Eigen::MatrixXd& samples, bool isotropic) {
  const Eigen::Index d = samples.rows();
  Eigen::Index n = samples.cols();
  if (n < 2) throw std::invalid_argument("fit_gaussian: need at least 2 samples");
  if (d < 1) throw std::invalid_argument("fit_gaussian: empty input");
  check_finite(samples, "samples");

  int dropped = 0;
  if (n % 2 != 0) {
    --n;
    dropped = 1;
  }
  const Eigen::Index m = n / 2;

  const Eigen::VectorXd mean = samples.leftCols(m).rowwise().mean();

  if (isotropic) {
    return {GaussianModel(mean, Eigen::MatrixXd::Identity(d, d), true), dropped};
  }

  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::VectorXd diff = samples.col(2 * i + 1) - samples.col(2 * i);
    cov.selfadjointView<Eigen::Lower>().rankUpdate(diff, 1.0);
  }
  cov = cov.selfadjointView<Eigen::Lower>();
  cov /= static_cast<double>(2 * m);
  return {GaussianModel(mean, std::move(cov), false), dropped};
}

double log_density_ratio_gaussian(const GaussianModel& num, const GaussianModel& den,
                                  const Eigen::VectorXd& x) {
  if (num.dim() != den.dim()) throw std::invalid_argument("log_density_ratio_gaussian: dimension mismatch");
  return 0.5 * (den.mahalanobis_sq(x) - num.mahalanobis_sq(x)) + 0.5 * (den.log_det() - num.log_det());
}

double kl_gaussian(const GaussianModel& p, const GaussianModel& q) {
  if (p.dim() != q.dim()) throw std::invalid_argument("kl_gaussian: dimension mismatch");
  const Eigen::Index d = p.dim();
  const Eigen::MatrixXd q_inv = q.cov_inverse();
  const double trace_term = (q_inv * p.cov()).trace();
  const Eigen::VectorXd diff = q.mean() - p.mean();
  const double quad = diff.dot(q_inv * diff);
  return 0.5 * (trace_term + quad - static_cast<double>(d) + q.log_det() - p.log_det());
}

double tv_upper_pinsker(const GaussianModel& p, const GaussianModel& q) {
  const double kl = std::min(kl_gaussian(p, q), kl_gaussian(q, p));
  const double bound = std::sqrt(2.0 * std::max(kl, 0.0));
  return std::clamp(bound, 0.0, 1.0);
}

}  // namespace covshift
