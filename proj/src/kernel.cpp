#include "covshift/kernel.hpp"

#include <cmath>

#include "covshift/gaussian.hpp"

namespace covshift {

double KernelSpec::operator()(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
  switch (kind) {
    case Kind::Rbf:
      return std::exp(-(a - b).squaredNorm() / (2.0 * bandwidth * bandwidth));
    case Kind::Linear:
      return a.dot(b);
    case Kind::Polynomial:
      return std::pow(a.dot(b) + offset, degree);
  }
  throw std::logic_error("unreachable kernel kind");
}

namespace {

// Squared pairwise distances via the Gram of inner products.
Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const Eigen::VectorXd a2 = a.colwise().squaredNorm();
  const Eigen::VectorXd b2 = b.colwise().squaredNorm();
  Eigen::MatrixXd d2 = -2.0 * (a.transpose() * b);
  d2.colwise() += a2;
  d2.rowwise() += b2.transpose();
  return d2.cwiseMax(0.0);
}

}  // namespace

Eigen::MatrixXd kernel_cross(const KernelSpec& kernel, const Eigen::MatrixXd& rows,
                             const Eigen::MatrixXd& cols) {
  if (rows.rows() != cols.rows()) throw std::invalid_argument("kernel_cross: dimension mismatch");
  switch (kernel.kind) {
    case KernelSpec::Kind::Rbf: {
      const double inv = -1.0 / (2.0 * kernel.bandwidth * kernel.bandwidth);
      return (squared_distances(rows, cols) * inv).array().exp();
    }
    case KernelSpec::Kind::Linear:
      return rows.transpose() * cols;
    case KernelSpec::Kind::Polynomial: {
      Eigen::ArrayXXd base = (rows.transpose() * cols).array() + kernel.offset;
      Eigen::ArrayXXd out = base;
      for (int k = 1; k < kernel.degree; ++k) out *= base;
      return out.matrix();
    }
  }
  throw std::logic_error("unreachable kernel kind");
}

Eigen::MatrixXd gram_matrix(const KernelSpec& kernel, const Eigen::MatrixXd& points) {
  const Eigen::Index n = points.cols();
  if (n < 1) throw std::invalid_argument("gram_matrix: need at least one point");
  Eigen::MatrixXd gram = kernel_cross(kernel, points, points);
  gram = 0.5 * (gram + gram.transpose());

  bool certified = false;
  for (double jitter : {0.0, 1e-10 * static_cast<double>(n), 1e-8 * static_cast<double>(n),
                        1e-6 * static_cast<double>(n)}) {
    Eigen::MatrixXd shifted = gram;
    shifted.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(shifted);
    if (llt.info() == Eigen::Success) {
      certified = true;
      break;
    }
  }
  if (!certified)
    throw FactorizationError("gram_matrix: kernel matrix not PSD after jitter escalation");
  return gram;
}

}  // namespace covshift
