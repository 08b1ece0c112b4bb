#include <cmath>

#include <gtest/gtest.h>

#include "generators.hpp"
#include "kypc/error.hpp"
#include "kypc/riccati.hpp"
#include "kypc/stability.hpp"

using namespace kypc;
using kypc::testing::Gen;
using kypc::testing::scalar;

namespace {

CostWeight scalar_cost(double w, double v, double r) {
  return CostWeight::make(scalar(w), scalar(v), scalar(r));
}

}  // namespace

TEST(SolveAre, ScalarBenchmark) {
  // -2p + 1 - p^2 = 0  ->  p = sqrt(2) - 1
  const auto r = riccati::solve_are(LinearPlant{scalar(-1.0), scalar(1.0)},
                                    CostWeight::identity(1, 1));
  ASSERT_TRUE(r.P);
  EXPECT_NEAR((*r.P)(0, 0).real(), std::sqrt(2.0) - 1.0, 1e-12);
  EXPECT_EQ(r.classification, Classification::stabilizing);
  EXPECT_NEAR(r.closed_loop_measure, -std::sqrt(2.0), 1e-12);
}

TEST(SolveAre, UnstableScalarWithCrossTerm) {
  // 2ap + w - (p + v)^2 / r = 0 with a = 1, w = 3, v = 0.5, r = 2
  const double a = 1.0, w = 3.0, v = 0.5, r = 2.0;
  const auto rep = riccati::solve_are(LinearPlant{scalar(a), scalar(1.0)},
                                      scalar_cost(w, v, r));
  // p^2 + (2v - 2ar) p + v^2 - wr = 0, larger root
  const double bq = 2.0 * v - 2.0 * a * r;
  const double cq = v * v - w * r;
  const double p = (-bq + std::sqrt(bq * bq - 4.0 * cq)) / 2.0;
  ASSERT_TRUE(rep.P);
  EXPECT_NEAR((*rep.P)(0, 0).real(), p, 1e-11);
  EXPECT_EQ(rep.classification, Classification::stabilizing);
}

TEST(SolveAre, NoRealRootGivesNoSolution) {
  // -2p - 2 - p^2 = 0 has no real root
  const auto r = riccati::solve_are(LinearPlant{scalar(-1.0), scalar(1.0)},
                                    scalar_cost(-2.0, 0.0, 1.0));
  EXPECT_FALSE(r.P.has_value());
  EXPECT_EQ(r.classification, Classification::no_solution);
}

TEST(SolveAre, DoubleRootIsAlmostStabilizing) {
  // A = 0, W = 0: -p^2 = 0, closed loop 0
  const auto r = riccati::solve_are(LinearPlant{scalar(0.0), scalar(1.0)},
                                    scalar_cost(0.0, 0.0, 1.0));
  ASSERT_TRUE(r.P);
  EXPECT_NEAR((*r.P)(0, 0).real(), 0.0, 1e-7);
  EXPECT_EQ(r.classification, Classification::almost_stabilizing);
}

TEST(SolveAre, UnstabilizableThrows) {
  try {
    riccati::solve_are(LinearPlant{scalar(1.0), scalar(0.0)}, CostWeight::identity(1, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::precondition);
  }
}

TEST(SolveAre, RandomDefiniteInstancesAreStabilizing) {
  Gen g(21);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = g.integer(1, 4);
    const int m = g.integer(1, 2);
    const bool cplx = trial % 2 == 0;
    const LinearPlant p{g.matrix(n, n, cplx), g.matrix(n, m, cplx)};
    const CostWeight M = CostWeight::make(g.positive_definite(n, cplx), Matrix::Zero(m, n),
                                          g.positive_definite(m, cplx, 0.5));
    const auto r = riccati::solve_are(p, M);
    ASSERT_TRUE(r.P) << "trial " << trial;
    EXPECT_EQ(r.classification, Classification::stabilizing);
    EXPECT_LT(r.residual, 1e-9 * (1.0 + r.P->norm() * r.P->norm()));
    EXPECT_LT(((*r.P) - r.P->adjoint()).norm(), 1e-12);
  }
}

TEST(NewtonKleinman, AgreesWithHamiltonianRoute) {
  Gen g(22);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = g.integer(1, 4);
    const int m = g.integer(1, 2);
    const LinearPlant p{g.matrix(n, n, true), g.matrix(n, m, true)};
    const CostWeight M = CostWeight::make(g.positive_definite(n, true), Matrix::Zero(m, n),
                                          Matrix::Identity(m, m));
    const auto ham = riccati::solve_are(p, M);
    const auto nk = riccati::newton_kleinman(p, M, stability::stabilize_det(p));
    ASSERT_TRUE(ham.P && nk.P);
    EXPECT_LT((*ham.P - *nk.P).norm(), 1e-8 * (1.0 + ham.P->norm()));
  }
}

TEST(NewtonKleinman, RejectsNonStabilizingStart) {
  try {
    riccati::newton_kleinman(LinearPlant{scalar(1.0), scalar(1.0)}, CostWeight::identity(1, 1),
                             scalar(0.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::precondition);
  }
}

TEST(AreOperator, FeedbackMinimizesHamiltonianForm) {
  // At the solution, F = -R^{-1}(B*P + V) closes the loop with the same P:
  // (A+BF)*P + P(A+BF) + [I;F]* M [I;F] = 0.
  Gen g(23);
  const LinearPlant p{g.matrix(3, 3, true), g.matrix(3, 2, true)};
  const CostWeight M = CostWeight::make(g.positive_definite(3, true), 0.2 * g.matrix(2, 3, true),
                                        g.positive_definite(2, true, 1.0));
  const auto r = riccati::solve_are(p, M);
  ASSERT_TRUE(r.P);
  const Matrix F = riccati::feedback(p, M, *r.P);
  Matrix IF(5, 3);
  IF << Matrix::Identity(3, 3), F;
  const Matrix Acl = p.A + p.B * F;
  const Matrix lyap = Acl.adjoint() * *r.P + *r.P * Acl + IF.adjoint() * M.assembled() * IF;
  EXPECT_LT(lyap.norm(), 1e-9 * (1.0 + r.P->norm()));
}
