#pragma once

#include <stdexcept>

#include <Eigen/Dense>

namespace covshift {

/// Positive semidefinite kernel: rbf (unit diagonal), linear, or polynomial.
struct KernelSpec {
  enum class Kind { Rbf, Linear, Polynomial };

  Kind kind = Kind::Rbf;
  double bandwidth = 1.0;  // rbf
  int degree = 1;          // polynomial
  double offset = 0.0;     // polynomial

  static KernelSpec rbf(double bandwidth) {
    if (!(bandwidth > 0.0)) throw std::invalid_argument("rbf bandwidth must be > 0");
    return {Kind::Rbf, bandwidth, 1, 0.0};
  }
  static KernelSpec linear() { return {Kind::Linear, 1.0, 1, 0.0}; }
  static KernelSpec polynomial(int degree, double offset) {
    if (degree < 1) throw std::invalid_argument("polynomial degree must be >= 1");
    if (offset < 0.0) throw std::invalid_argument("polynomial offset must be >= 0");
    return {Kind::Polynomial, 1.0, degree, offset};
  }

  double operator()(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;
};

/// n x n kernel matrix on the given points (columns). Symmetric by
/// construction; positive semidefiniteness is certified by a Cholesky with
/// an escalating diagonal jitter, and failure after escalation throws.
Eigen::MatrixXd gram_matrix(const KernelSpec& kernel, const Eigen::MatrixXd& points);

/// Rectangular kernel block K(rows_i, cols_j), rows x cols.
Eigen::MatrixXd kernel_cross(const KernelSpec& kernel, const Eigen::MatrixXd& rows,
                             const Eigen::MatrixXd& cols);

}  // namespace covshift
