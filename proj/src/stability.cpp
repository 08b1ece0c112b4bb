#include "kypc/stability.hpp"

#include <algorithm>
#include <limits>

#include <Eigen/SVD>

#include "kypc/error.hpp"
#include "kypc/linmat.hpp"
#include "kypc/stoch_lq.hpp"

namespace kypc::stability {

double spectral_abscissa(const Matrix& A) {
  if (A.rows() == 0) return -std::numeric_limits<double>::infinity();
  return linmat::eigenvalues(A).real().maxCoeff();
}

Matrix ms_lift(const Matrix& A, const Matrix& N) {
  if (A.rows() != N.rows() || A.cols() != N.cols()) {
    throw Error(ErrorCode::dimension_mismatch, "ms_lift: A and N sizes differ");
  }
  const Eigen::Index n = A.rows();
  const Matrix I = Matrix::Identity(n, n);
  return linmat::kron(I, A) + linmat::kron(A.conjugate(), I) +
         linmat::kron(N.conjugate(), N);
}

double ms_abscissa(const Matrix& A, const Matrix& N) {
  return spectral_abscissa(ms_lift(A, N));
}

bool is_stabilizable_det(const LinearPlant& plant) {
  const Matrix& A = plant.A;
  const Eigen::Index n = plant.states();
  if (n == 0) return true;
  const double tol = 1e-10 * std::max(1.0, A.norm());
  const Vector ev = linmat::eigenvalues(A);
  Matrix hautus(n, n + plant.inputs());
  hautus.rightCols(plant.inputs()) = plant.B;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i).real() < -tol) continue;
    hautus.leftCols(n) = ev(i) * Matrix::Identity(n, n) - A;
    if (linmat::rank(hautus, 1e-9) < n) return false;
  }
  return true;
}

Matrix stabilize_det(const LinearPlant& plant) {
  if (!is_stabilizable_det(plant)) {
    throw Error(ErrorCode::precondition, "stabilize_det: (A, B) not stabilizable");
  }
  const Eigen::Index n = plant.states();
  const Matrix I = Matrix::Identity(n, n);
  const Matrix BB2 = 2.0 * plant.B * plant.B.adjoint();
  double beta = plant.A.norm() + 1.0;
  for (int attempt = 0; attempt <= 8; ++attempt, beta *= 2.0) {
    // (A + beta I) X + X (A + beta I)* = 2 BB*
    const Matrix shifted = plant.A + Complex(beta, 0.0) * I;
    const Matrix X = linmat::solve_lyapunov(shifted.adjoint(), -BB2);
    const Matrix F = -plant.B.adjoint() * linmat::pinv(X);
    if (spectral_abscissa(plant.A + plant.B * F) < 0.0) return F;
  }
  throw Error(ErrorCode::not_converged, "stabilization failed");
}

std::optional<Matrix> certify_stabilizable_stoch(const StochPlant& plant) {
  const Eigen::Index n = plant.states();
  const Eigen::Index m = plant.inputs();
  Matrix F = Matrix::Zero(m, n);
  if (ms_abscissa(plant.A, plant.N) < 0.0) return F;
  if (m == 0) return std::nullopt;
  auto wonham = stoch_lq::wonham_homotopy(plant, Matrix::Identity(n, n));
  if (wonham && ms_abscissa(plant.A + plant.B * *wonham, plant.N) < 0.0) {
    return wonham;
  }
  return std::nullopt;
}

}  // namespace kypc::stability
