#include <gtest/gtest.h>

#include "generators.hpp"
#include "kypc/error.hpp"
#include "kypc/linmat.hpp"
#include "kypc/stability.hpp"

using namespace kypc;
using kypc::testing::Gen;
using kypc::testing::scalar;

TEST(MsAbscissa, ScalarLiftRate) {
  // scalar lift: 2 Re(a) + |n|^2
  EXPECT_NEAR(stability::ms_abscissa(scalar(-1.0), scalar(1.0)), -1.0, 1e-14);
  EXPECT_NEAR(stability::ms_abscissa(scalar(-0.4), scalar(1.0)), 0.2, 1e-14);
  EXPECT_NEAR(stability::ms_abscissa(scalar(-1.0), scalar(0.0)), -2.0, 1e-14);
}

TEST(MsLift, ActsAsSecondMomentOperator) {
  // unvec(lift vec(P)) = AP + PA* + NPN*
  Gen g(11);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = g.integer(1, 4);
    const Matrix A = g.matrix(n, n, true);
    const Matrix N = g.matrix(n, n, true);
    const Matrix P = g.matrix(n, n, true);
    const Matrix direct = A * P + P * A.adjoint() + N * P * N.adjoint();
    const Matrix lifted =
        linmat::unvec(stability::ms_lift(A, N) * linmat::vec(P), n, n);
    EXPECT_LT((direct - lifted).norm(), 1e-11 * (1.0 + direct.norm()));
  }
}

TEST(MsAbscissa, HurwitzButMeanSquareUnstable) {
  EXPECT_LT(stability::spectral_abscissa(scalar(-0.4)), 0.0);
  EXPECT_GT(stability::ms_abscissa(scalar(-0.4), scalar(1.0)), 0.0);
}

TEST(MsAbscissa, AgreesWithGeneralizedLyapunovSolvability) {
  // MS-stable iff glyap with Q = I has a positive definite solution.
  Gen g(12);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = g.integer(1, 3);
    const Matrix A = g.matrix(n, n, true) - 1.5 * Matrix::Identity(n, n);
    const Matrix N = g.uniform(0.1, 1.5) * g.matrix(n, n, true);
    const double a = stability::ms_abscissa(A, N);
    if (std::abs(a) < 1e-6) continue;
    const Matrix P = linmat::solve_glyap(A, N, Matrix::Identity(n, n));
    EXPECT_EQ(a < 0.0, linmat::min_hermitian_eigenvalue(P) > 0.0) << "trial " << trial;
  }
}

TEST(Stabilizable, HautusCases) {
  EXPECT_FALSE(stability::is_stabilizable_det(LinearPlant{scalar(1.0), scalar(0.0)}));
  EXPECT_TRUE(stability::is_stabilizable_det(LinearPlant{scalar(-1.0), scalar(0.0)}));
  Matrix A(2, 2);
  A << 1.0, 0.0, 0.0, -1.0;
  Matrix B(2, 1);
  B << 1.0, 0.0;
  EXPECT_TRUE(stability::is_stabilizable_det(LinearPlant{A, B}));
  B << 0.0, 1.0;
  EXPECT_FALSE(stability::is_stabilizable_det(LinearPlant{A, B}));
}

TEST(StabilizeDet, ClosedLoopIsHurwitzOnRandomPlants) {
  Gen g(13);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = g.integer(1, 5);
    const int m = g.integer(1, 2);
    const LinearPlant p{g.matrix(n, n, trial % 2 == 0) + Matrix::Identity(n, n),
                        g.matrix(n, m, trial % 2 == 0)};
    const Matrix F = stability::stabilize_det(p);
    EXPECT_LT(stability::spectral_abscissa(p.A + p.B * F), 0.0);
  }
}

TEST(StabilizeDet, UnstabilizableThrowsPrecondition) {
  try {
    stability::stabilize_det(LinearPlant{scalar(1.0), scalar(0.0)});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::precondition);
  }
}

TEST(CertifyStoch, ReturnsMeanSquareStabilizingGain) {
  // A = -0.4, N = 1 is MS-unstable in open loop; B = 1 stabilizes.
  const StochPlant p{scalar(-0.4), scalar(1.0), scalar(1.0)};
  const auto F = stability::certify_stabilizable_stoch(p);
  ASSERT_TRUE(F.has_value());
  EXPECT_LT(stability::ms_abscissa(p.A + p.B * *F, p.N), 0.0);
}

TEST(CertifyStoch, ZeroGainWhenAlreadyStable) {
  const StochPlant p{scalar(-1.0), scalar(1.0), scalar(1.0)};
  const auto F = stability::certify_stabilizable_stoch(p);
  ASSERT_TRUE(F.has_value());
  EXPECT_EQ(F->norm(), 0.0);
}

TEST(CertifyStoch, NotCertifiedWithoutInput) {
  const StochPlant p{scalar(1.0), scalar(1.0), scalar(0.0)};
  EXPECT_FALSE(stability::certify_stabilizable_stoch(p).has_value());
}

TEST(CertifyStoch, RandomCertificatesAreSound) {
  Gen g(14);
  int certified = 0;
  for (int trial = 0; trial < 30; ++trial) {
    const int n = g.integer(1, 3);
    const StochPlant p = g.stoch_plant(n, g.integer(1, 2), trial % 2 == 0, 1.0);
    const auto F = stability::certify_stabilizable_stoch(p);
    if (!F) continue;
    ++certified;
    EXPECT_LT(stability::ms_abscissa(p.A + p.B * *F, p.N), 0.0);
  }
  EXPECT_GT(certified, 15);
}
