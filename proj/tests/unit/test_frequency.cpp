#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "generators.hpp"
#include "kypc/error.hpp"
#include "kypc/frequency.hpp"

using namespace kypc;
using kypc::testing::Gen;
using kypc::testing::scalar;

namespace {

LinearPlant scalar_plant() { return LinearPlant{scalar(-1.0), scalar(1.0)}; }

Matrix rotation_generator() {
  Matrix A(2, 2);
  A << 0.0, 1.0, -1.0, 0.0;
  return A;
}

}  // namespace

TEST(Grid, ContainsZeroAndIsSymmetric) {
  frequency::GridOptions opts;
  opts.points = 20;
  const auto g = frequency::default_grid(opts);
  ASSERT_EQ(g.size(), 21u);
  EXPECT_EQ(g[10], 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_DOUBLE_EQ(g[i], -g[g.size() - 1 - i]);
  EXPECT_DOUBLE_EQ(g.back(), opts.max_omega);
  EXPECT_DOUBLE_EQ(g[11], opts.min_omega);
}

TEST(Popov, ScalarClosedForm) {
  // Phi(w) = 1/(1 + w^2) + 1 for A = -1, B = 1, M = I
  for (double w : {0.0, 0.5, 3.0}) {
    const Matrix Phi = frequency::popov(scalar_plant(), CostWeight::identity(1, 1), w);
    EXPECT_NEAR(Phi(0, 0).real(), 1.0 / (1.0 + w * w) + 1.0, 1e-14);
    EXPECT_NEAR(Phi(0, 0).imag(), 0.0, 1e-15);
  }
}

TEST(Popov, HermitianForComplexData) {
  Gen g(31);
  for (int trial = 0; trial < 10; ++trial) {
    auto d = g.det_instance();
    const Matrix Phi = frequency::popov(d.plant, d.cost, g.uniform(-5.0, 5.0));
    EXPECT_LT((Phi - Phi.adjoint()).norm(), 1e-12 * (1.0 + Phi.norm()));
  }
}

TEST(StrictRatio, ScalarClosedForm) {
  // Phi / |G|^2 = 2 + w^2
  for (double w : {0.0, 0.7, 2.0}) {
    EXPECT_NEAR(frequency::strict_ratio(scalar_plant(), CostWeight::identity(1, 1), w),
                2.0 + w * w, 1e-10);
  }
}

TEST(StrictMargin, ScalarBenchmarkIsSqrtTwo) {
  const auto s = frequency::fdc_scan(scalar_plant(), CostWeight::identity(1, 1));
  EXPECT_TRUE(s.nonstrict_ok);
  ASSERT_TRUE(s.strict_margin);
  EXPECT_NEAR(*s.strict_margin, std::sqrt(2.0), 1e-6);
  EXPECT_NEAR(s.strict_argmin_omega, 0.0, 1e-9);
  EXPECT_NEAR(s.min_eig, 1.0, 1e-6);  // Phi -> 1 as |w| -> inf
  EXPECT_FALSE(frequency::in_boundary_band(s));
}

TEST(StrictMargin, ViolationReportsMinimizer) {
  // W = -2: Phi(w) = 1 - 2/(1 + w^2) < 0 for |w| < 1, minimum -1 at w = 0
  const CostWeight M = CostWeight::make(scalar(-2.0), scalar(0.0), scalar(1.0));
  const auto s = frequency::fdc_scan(scalar_plant(), M);
  EXPECT_FALSE(s.nonstrict_ok);
  EXPECT_FALSE(s.strict_margin.has_value());
  EXPECT_NEAR(s.min_eig, -1.0, 1e-9);
  EXPECT_NEAR(s.argmin_omega, 0.0, 1e-6);
  EXPECT_NEAR(std::abs(s.argmin_eta(0)), 1.0, 1e-12);
  EXPECT_FALSE(frequency::in_boundary_band(s));
}

TEST(StrictMargin, ShiftByMarginLandsOnBoundary) {
  // M_eps with eps = sqrt(2) makes Phi - 2|G|^2 >= 0 tight at w = 0.
  const CostWeight M = frequency::shift_weight(CostWeight::identity(1, 1), std::sqrt(2.0));
  EXPECT_NEAR(M.W(0, 0).real(), -1.0, 1e-15);
  const auto s = frequency::fdc_scan(scalar_plant(), M);
  EXPECT_TRUE(frequency::in_boundary_band(s));
}

TEST(StrictMargin, RatioMatchesPencilOracleOnRandomInstances) {
  // Oracle: smallest eigenvalue of H^{-1/2} Phi H^{-1/2}, H = G*G.
  Gen g(32);
  for (int trial = 0; trial < 20; ++trial) {
    auto d = g.det_instance();
    const double w = g.uniform(-3.0, 3.0);
    Matrix G;
    try {
      G = frequency::transfer(d.plant, w);
    } catch (const Error&) {
      continue;
    }
    const Matrix Phi = frequency::popov(d.plant, d.cost, w);
    const Matrix H = G.adjoint() * G;
    if (Eigen::SelfAdjointEigenSolver<Matrix>(H).eigenvalues()(0) < 1e-6) continue;
    const Matrix L = H.llt().matrixL();
    const Matrix Li = L.inverse();
    const Matrix S = Li * Phi * Li.adjoint();
    const double oracle =
        Eigen::SelfAdjointEigenSolver<Matrix>(0.5 * (S + S.adjoint())).eigenvalues()(0);
    EXPECT_NEAR(frequency::strict_ratio(d.plant, d.cost, w), oracle, 1e-8 * (1.0 + std::abs(oracle)));
  }
}

TEST(Transfer, PoleOnGridThrows) {
  const LinearPlant p{rotation_generator(), Matrix::Identity(2, 1)};
  try {
    frequency::transfer(p, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::pole_on_grid);
    EXPECT_NE(std::string(e.what()).find("pole on grid"), std::string::npos);
  }
}

TEST(Scan, NudgesPolesOnGrid) {
  const LinearPlant p{rotation_generator(), Matrix::Identity(2, 1)};
  const CostWeight M = CostWeight::identity(2, 1);
  const auto s = frequency::fdc_scan(p, M, {-1.0, 0.5, 1.0, 2.0}, {}, false);
  ASSERT_EQ(s.nudges.size(), 2u);
  for (const auto& nd : s.nudges) {
    EXPECT_NEAR(std::abs(nd.used - nd.requested), 1e-6, 1e-12);
  }
}

TEST(Scan, CsvHasOneRowPerGridPoint) {
  const auto s = frequency::fdc_scan(scalar_plant(), CostWeight::identity(1, 1),
                                     {-1.0, 0.0, 1.0}, {}, false);
  std::ostringstream os;
  frequency::write_csv(os, s);
  const std::string text = os.str();
  EXPECT_EQ(text.rfind("omega,min_eig\n", 0), 0u);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 4);
}

TEST(Scan, DimensionMismatchThrows) {
  try {
    frequency::fdc_scan(scalar_plant(), CostWeight::identity(2, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::dimension_mismatch);
  }
}
