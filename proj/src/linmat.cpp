#include "kypc/linmat.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

#include "kypc/error.hpp"

namespace kypc {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::precondition: return "precondition";
    case ErrorCode::singular_system: return "singular_system";
    case ErrorCode::pole_on_grid: return "pole_on_grid";
    case ErrorCode::not_converged: return "not_converged";
    case ErrorCode::schema: return "schema";
    case ErrorCode::dimension_mismatch: return "dimension_mismatch";
    case ErrorCode::not_hermitian: return "not_hermitian";
    case ErrorCode::r_not_positive_definite: return "r_not_positive_definite";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

void require_finite(const char* name, const Matrix& m) {
  if (!m.allFinite()) {
    throw Error(ErrorCode::invalid_argument,
                std::string(name) + " has non-finite entries");
  }
}

namespace {

void require_square(const char* name, const Matrix& m) {
  if (m.rows() != m.cols()) {
    std::ostringstream os;
    os << name << " must be square, got " << m.rows() << "x" << m.cols();
    throw Error(ErrorCode::dimension_mismatch, os.str());
  }
}

}  // namespace

LinearPlant LinearPlant::make(Matrix A, Matrix B) {
  require_square("A", A);
  if (B.rows() != A.rows()) {
    throw Error(ErrorCode::dimension_mismatch, "dimension mismatch: B rows");
  }
  require_finite("A", A);
  require_finite("B", B);
  return LinearPlant{std::move(A), std::move(B)};
}

StochPlant StochPlant::make(Matrix A, Matrix N, Matrix B) {
  require_square("A", A);
  require_square("N", N);
  if (N.rows() != A.rows()) {
    throw Error(ErrorCode::dimension_mismatch, "dimension mismatch: N rows");
  }
  if (B.rows() != A.rows()) {
    throw Error(ErrorCode::dimension_mismatch, "dimension mismatch: B rows");
  }
  require_finite("A", A);
  require_finite("N", N);
  require_finite("B", B);
  return StochPlant{std::move(A), std::move(N), std::move(B)};
}

CostWeight CostWeight::make(Matrix W, Matrix V, Matrix R, double hermitian_tol) {
  require_square("W", W);
  require_square("R", R);
  if (V.rows() != R.rows() || V.cols() != W.rows()) {
    throw Error(ErrorCode::dimension_mismatch, "dimension mismatch: V");
  }
  require_finite("W", W);
  require_finite("V", V);
  require_finite("R", R);
  auto check = [&](const char* name, const Matrix& X) {
    const double scale = std::max(1.0, X.norm());
    if ((X - X.adjoint()).norm() > hermitian_tol * scale) {
      throw Error(ErrorCode::not_hermitian, std::string(name) + " not Hermitian");
    }
  };
  check("W", W);
  check("R", R);
  CostWeight c{linmat::hermitian_part(W), std::move(V), linmat::hermitian_part(R)};
  if (c.R.rows() == 0 || linmat::min_hermitian_eigenvalue(c.R) <= 0.0) {
    throw Error(ErrorCode::r_not_positive_definite, "R not positive definite");
  }
  return c;
}

CostWeight CostWeight::identity(Eigen::Index n, Eigen::Index m) {
  return CostWeight{Matrix::Identity(n, n), Matrix::Zero(m, n),
                    Matrix::Identity(m, m)};
}

Matrix CostWeight::assembled() const {
  const Eigen::Index n = states();
  const Eigen::Index m = inputs();
  Matrix M(n + m, n + m);
  M.topLeftCorner(n, n) = W;
  M.topRightCorner(n, m) = V.adjoint();
  M.bottomLeftCorner(m, n) = V;
  M.bottomRightCorner(m, m) = R;
  return linmat::hermitian_part(M);
}

namespace linmat {

Matrix hermitian_part(const Matrix& X) {
  require_square("X", X);
  return 0.5 * (X + X.adjoint());
}

double frobenius(const Matrix& X) { return X.norm(); }

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Vector vec(const Matrix& X) {
  return Eigen::Map<const Vector>(X.data(), X.size());
}

Matrix unvec(const Vector& v, Eigen::Index rows, Eigen::Index cols) {
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

namespace {

// Lift of P -> A*P + PA (+ N*PN) acting on vec(P).
Matrix lyapunov_lift(const Matrix& A, const Matrix* N) {
  const Eigen::Index n = A.rows();
  const Matrix I = Matrix::Identity(n, n);
  Matrix L = kron(I, A.adjoint()) + kron(A.transpose(), I);
  if (N != nullptr && N->size() > 0) L += kron(N->transpose(), N->adjoint());
  return L;
}

Matrix solve_lifted(const Matrix& L, const Matrix& Q) {
  const Eigen::Index n = Q.rows();
  if (n == 0) return Matrix(0, 0);
  const double scale = L.cwiseAbs().maxCoeff();
  if (scale == 0.0) {
    throw Error(ErrorCode::singular_system,
                "no unique solution: singular lifted system");
  }
  Eigen::PartialPivLU<Matrix> lu(L);
  if (!(lu.rcond() > 1e-14)) {
    throw Error(ErrorCode::singular_system,
                "no unique solution: singular lifted system");
  }
  Vector p = lu.solve(-vec(Q));
  if (!p.allFinite()) {
    throw Error(ErrorCode::singular_system,
                "no unique solution: singular lifted system");
  }
  return hermitian_part(unvec(p, n, n));
}

}  // namespace

Matrix solve_lyapunov(const Matrix& A, const Matrix& Q) {
  require_square("A", A);
  require_square("Q", Q);
  if (Q.rows() != A.rows()) {
    throw Error(ErrorCode::dimension_mismatch, "dimension mismatch: Q");
  }
  return solve_lifted(lyapunov_lift(A, nullptr), Q);
}

Matrix solve_glyap(const Matrix& A, const Matrix& N, const Matrix& Q) {
  require_square("A", A);
  require_square("N", N);
  require_square("Q", Q);
  if (Q.rows() != A.rows() || N.rows() != A.rows()) {
    throw Error(ErrorCode::dimension_mismatch, "dimension mismatch: N or Q");
  }
  return solve_lifted(lyapunov_lift(A, &N), Q);
}

Matrix glyap_residual(const Matrix& A, const Matrix& N, const Matrix& Q,
                      const Matrix& P) {
  Matrix r = A.adjoint() * P + P * A + Q;
  if (N.size() > 0) r += N.adjoint() * P * N;
  return r;
}

Matrix matexp(const Matrix& A, double t) {
  require_square("A", A);
  if (A.rows() == 0) return Matrix(0, 0);
  const Matrix At = A * Complex(t, 0.0);
  return At.exp();
}

Matrix matexp_integral(const Matrix& A, double t) {
  const Eigen::Index n = A.rows();
  Matrix aug = Matrix::Zero(2 * n, 2 * n);
  aug.topLeftCorner(n, n) = A;
  aug.topRightCorner(n, n) = Matrix::Identity(n, n);
  return matexp(aug, t).topRightCorner(n, n);
}

Matrix finite_gramian(const Matrix& A, const Matrix& B, double tau) {
  require_square("A", A);
  if (B.rows() != A.rows()) {
    throw Error(ErrorCode::dimension_mismatch, "dimension mismatch: B rows");
  }
  if (!(tau > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "finite_gramian: tau must be > 0");
  }
  const Eigen::Index n = A.rows();
  const Matrix BB = B * B.adjoint();

  // 5-point Gauss-Legendre on [-1, 1].
  const double a = std::sqrt(5.0 - 2.0 * std::sqrt(10.0 / 7.0)) / 3.0;
  const double b = std::sqrt(5.0 + 2.0 * std::sqrt(10.0 / 7.0)) / 3.0;
  const double wa = (322.0 + 13.0 * std::sqrt(70.0)) / 900.0;
  const double wb = (322.0 - 13.0 * std::sqrt(70.0)) / 900.0;
  const std::array<double, 5> nodes{-b, -a, 0.0, a, b};
  const std::array<double, 5> weights{wb, wa, 128.0 / 225.0, wa, wb};

  auto integrate = [&](int panels) {
    const double h = tau / panels;
    std::array<Matrix, 5> node_exp;
    for (int k = 0; k < 5; ++k) node_exp[k] = matexp(A, 0.5 * h * (1.0 + nodes[k]));
    const Matrix step = matexp(A, h);
    Matrix start = Matrix::Identity(n, n);
    Matrix sum = Matrix::Zero(n, n);
    for (int p = 0; p < panels; ++p) {
      for (int k = 0; k < 5; ++k) {
        const Matrix E = start * node_exp[k];
        sum += (0.5 * h * weights[k]) * (E * BB * E.adjoint());
      }
      start = start * step;
    }
    return hermitian_part(sum);
  };

  int panels = 64;
  Matrix current = integrate(panels);
  constexpr int kMaxPanels = 1 << 16;
  while (panels < kMaxPanels) {
    panels *= 2;
    Matrix refined = integrate(panels);
    const double diff = (refined - current).norm();
    current = std::move(refined);
    if (diff <= 1e-12 * std::max(current.norm(), 1e-300)) break;
  }
  return current;
}

Matrix pinv(const Matrix& X, double rel_tol) {
  if (X.size() == 0) return Matrix(X.cols(), X.rows());
  Eigen::JacobiSVD<Matrix> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  const double cutoff = rel_tol * (s.size() > 0 ? s(0) : 0.0);
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff && s(i) > 0.0) inv(i) = 1.0 / s(i);
  }
  return svd.matrixV() * inv.cast<Complex>().asDiagonal() *
         svd.matrixU().adjoint();
}

Vector eigenvalues(const Matrix& A) {
  require_square("A", A);
  if (A.rows() == 0) return Vector(0);
  Eigen::ComplexEigenSolver<Matrix> es(A, false);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::not_converged, "eigenvalue iteration failed");
  }
  return es.eigenvalues();
}

RealVector hermitian_eigenvalues(const Matrix& X) {
  require_square("X", X);
  if (X.rows() == 0) return RealVector(0);
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(X),
                                           Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

double min_hermitian_eigenvalue(const Matrix& X) {
  const RealVector ev = hermitian_eigenvalues(X);
  return ev.size() ? ev(0) : 0.0;
}

Eigen::Index rank(const Matrix& X, double rel_tol) {
  if (X.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(X);
  const auto& s = svd.singularValues();
  if (s(0) == 0.0) return 0;
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > rel_tol * s(0)) ++r;
  }
  return r;
}

}  // namespace linmat
}  // namespace kypc
