#pragma once

#include <complex>

#include <Eigen/Dense>

namespace kypc {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

/// Throws Error(invalid_argument) if any entry of `m` is NaN or infinite.
void require_finite(const char* name, const Matrix& m);

/// Deterministic plant x' = Ax + Bu.
struct LinearPlant {
  Matrix A;  // n x n
  Matrix B;  // n x m

  /// Validates dimensions and finiteness.
  static LinearPlant make(Matrix A, Matrix B);

  Eigen::Index states() const { return A.rows(); }
  Eigen::Index inputs() const { return B.cols(); }
};

/// Ito plant dx = (Ax + Bu) dt + Nx dw driven by a scalar Wiener process.
struct StochPlant {
  Matrix A;  // n x n
  Matrix N;  // n x n
  Matrix B;  // n x m

  static StochPlant make(Matrix A, Matrix N, Matrix B);

  Eigen::Index states() const { return A.rows(); }
  Eigen::Index inputs() const { return B.cols(); }
  LinearPlant drift() const { return LinearPlant{A, B}; }
};

/// Hermitian cost weight M = [[W, V*], [V, R]] with R positive definite.
/// W and M may be indefinite.
struct CostWeight {
  Matrix W;  // n x n
  Matrix V;  // m x n
  Matrix R;  // m x m

  /// Symmetrizes W and R and checks R > 0. Throws on dimension mismatch,
  /// on asymmetry larger than `hermitian_tol` and on R not positive definite.
  static CostWeight make(Matrix W, Matrix V, Matrix R,
                         double hermitian_tol = 1e-8);
  /// M = I_{n+m}.
  static CostWeight identity(Eigen::Index n, Eigen::Index m);

  Eigen::Index states() const { return W.rows(); }
  Eigen::Index inputs() const { return R.rows(); }

  Matrix assembled() const;
};

}  // namespace kypc
