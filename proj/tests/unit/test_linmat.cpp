#include <cmath>

#include <gtest/gtest.h>

#include "generators.hpp"
#include "kypc/error.hpp"
#include "kypc/linmat.hpp"

using namespace kypc;
using kypc::testing::Gen;
using kypc::testing::scalar;

TEST(Kron, VecIdentity) {
  // vec(AXB) = (B^T (x) A) vec(X)
  Gen g(1);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix A = g.matrix(3, 2, true);
    const Matrix X = g.matrix(2, 4, true);
    const Matrix B = g.matrix(4, 3, true);
    const Vector lhs = linmat::vec(A * X * B);
    const Vector rhs = linmat::kron(B.transpose(), A) * linmat::vec(X);
    EXPECT_LT((lhs - rhs).norm(), 1e-12 * (1.0 + lhs.norm()));
  }
}

TEST(Kron, UnvecInvertsVec) {
  Gen g(2);
  const Matrix X = g.matrix(3, 5, true);
  EXPECT_EQ(linmat::unvec(linmat::vec(X), 3, 5), X);
}

TEST(Lyapunov, ScalarClosedForm) {
  // -2p + q = 0 for A = -1
  const Matrix P = linmat::solve_lyapunov(scalar(-1.0), scalar(3.0));
  EXPECT_NEAR(P(0, 0).real(), 1.5, 1e-14);
}

TEST(Lyapunov, ResidualOnRandomStableData) {
  Gen g(3);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = g.integer(1, 5);
    const bool cplx = trial % 2 == 0;
    const Matrix A = g.matrix(n, n, cplx) - 3.0 * Matrix::Identity(n, n);
    const Matrix Q = g.hermitian(n, cplx);
    const Matrix P = linmat::solve_lyapunov(A, Q);
    const Matrix res = A.adjoint() * P + P * A + Q;
    EXPECT_LT(res.norm(), 1e-10 * (1.0 + P.norm()));
    EXPECT_LT((P - P.adjoint()).norm(), 1e-10 * (1.0 + P.norm()));
  }
}

TEST(Lyapunov, SingularSpectrumThrows) {
  // A and -A* share the eigenvalue 0.
  Matrix A = Matrix::Zero(2, 2);
  A(0, 1) = 1.0;
  try {
    linmat::solve_lyapunov(A, Matrix::Identity(2, 2));
    FAIL() << "expected singular_system";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::singular_system);
  }
}

TEST(GeneralizedLyapunov, ScalarClosedForm) {
  // -2p + p + 1 = 0 for A = -1, N = 1
  const Matrix P = linmat::solve_glyap(scalar(-1.0), scalar(1.0), scalar(1.0));
  EXPECT_NEAR(P(0, 0).real(), 1.0, 1e-14);
}

TEST(GeneralizedLyapunov, ResidualMatchesDirectEvaluation) {
  Gen g(4);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = g.integer(1, 4);
    const Matrix A = g.matrix(n, n, true) - 3.0 * Matrix::Identity(n, n);
    const Matrix N = 0.3 * g.matrix(n, n, true);
    const Matrix Q = g.hermitian(n, true);
    const Matrix P = linmat::solve_glyap(A, N, Q);
    const Matrix direct = A.adjoint() * P + P * A + N.adjoint() * P * N + Q;
    EXPECT_LT(direct.norm(), 1e-10 * (1.0 + P.norm()));
    EXPECT_LT((linmat::glyap_residual(A, N, Q, P) - direct).norm(), 1e-12 * (1.0 + P.norm()));
  }
}

TEST(Matexp, DiagonalAndRotation) {
  const Matrix E = linmat::matexp(scalar(-2.0), 0.75);
  EXPECT_NEAR(E(0, 0).real(), std::exp(-1.5), 1e-15);
  Matrix J(2, 2);
  J << 0.0, 1.0, -1.0, 0.0;
  const Matrix R = linmat::matexp(J, 0.3);
  EXPECT_NEAR(R(0, 0).real(), std::cos(0.3), 1e-15);
  EXPECT_NEAR(R(0, 1).real(), std::sin(0.3), 1e-15);
}

TEST(Matexp, IntegralMatchesInverseFormula) {
  // int_0^t e^{As} ds = A^{-1}(e^{At} - I) for invertible A
  Gen g(5);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = g.integer(1, 4);
    const Matrix A = g.matrix(n, n, true) - 2.0 * Matrix::Identity(n, n);
    const double t = g.uniform(0.01, 2.0);
    const Matrix oracle =
        A.partialPivLu().solve(linmat::matexp(A, t) - Matrix::Identity(n, n));
    EXPECT_LT((linmat::matexp_integral(A, t) - oracle).norm(), 1e-11 * (1.0 + oracle.norm()));
  }
}

TEST(Gramian, MatchesVanLoanBlockExponential) {
  // exp([[-A, BB*], [0, A*]] tau) = [[F11, F12], [0, F22]],  Gram = F22* F12
  Gen g(6);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = g.integer(1, 4);
    const int m = g.integer(1, 2);
    const Matrix A = g.matrix(n, n, trial % 2 == 0);
    const Matrix B = g.matrix(n, m, trial % 2 == 0);
    const double tau = g.uniform(0.2, 2.0);
    Matrix H = Matrix::Zero(2 * n, 2 * n);
    H.topLeftCorner(n, n) = -A;
    H.topRightCorner(n, n) = B * B.adjoint();
    H.bottomRightCorner(n, n) = A.adjoint();
    const Matrix F = linmat::matexp(H, tau);
    const Matrix oracle = F.bottomRightCorner(n, n).adjoint() * F.topRightCorner(n, n);
    const Matrix P = linmat::finite_gramian(A, B, tau);
    EXPECT_LT((P - oracle).norm(), 1e-9 * (1.0 + oracle.norm()));
  }
}

TEST(Gramian, ScalarClosedForm) {
  // A = -1, B = 1: (1 - e^{-2 tau}) / 2
  const Matrix P = linmat::finite_gramian(scalar(-1.0), scalar(1.0), 1.3);
  EXPECT_NEAR(P(0, 0).real(), 0.5 * (1.0 - std::exp(-2.6)), 1e-13);
}

TEST(Pinv, MoorePenroseConditions) {
  Gen g(7);
  const Matrix X = g.matrix(4, 2, true) * g.matrix(2, 3, true);  // rank 2
  const Matrix Y = linmat::pinv(X);
  EXPECT_LT((X * Y * X - X).norm(), 1e-10);
  EXPECT_LT((Y * X * Y - Y).norm(), 1e-10);
  EXPECT_LT(((X * Y).adjoint() - X * Y).norm(), 1e-10);
  EXPECT_LT(((Y * X).adjoint() - Y * X).norm(), 1e-10);
  EXPECT_EQ(linmat::rank(X, 1e-9), 2);
}

TEST(Eigen, HermitianAscending) {
  Matrix X(2, 2);
  X << 2.0, Complex(0.0, 1.0), Complex(0.0, -1.0), 2.0;
  const RealVector ev = linmat::hermitian_eigenvalues(X);
  EXPECT_NEAR(ev(0), 1.0, 1e-14);
  EXPECT_NEAR(ev(1), 3.0, 1e-14);
  EXPECT_NEAR(linmat::min_hermitian_eigenvalue(X), 1.0, 1e-14);
}
