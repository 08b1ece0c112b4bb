#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "generators.hpp"
#include "kypc/error.hpp"
#include "kypc/linmat.hpp"
#include "kypc/sim.hpp"

using namespace kypc;
using kypc::testing::Gen;
using kypc::testing::scalar;
using kypc::testing::vec1;

namespace {

sim::SimConfig small_config() {
  sim::SimConfig cfg;
  cfg.dt = 1e-3;
  cfg.horizon = 1.0;
  cfg.paths = 4000;
  cfg.seed = 7;
  cfg.samples = 100;
  return cfg;
}

double interpolate(const sim::MomentTrajectory& m, double t) {
  for (std::size_t i = 1; i < m.t.size(); ++i) {
    if (m.t[i] >= t) {
      const double a = (t - m.t[i - 1]) / (m.t[i] - m.t[i - 1]);
      return (1.0 - a) * m.second_moment[i - 1] + a * m.second_moment[i];
    }
  }
  return m.second_moment.back();
}

}  // namespace

TEST(Sim, ConfigValidation) {
  sim::SimConfig cfg = small_config();
  cfg.dt = 0.0;
  EXPECT_THROW(sim::validate(cfg), Error);
  cfg = small_config();
  cfg.horizon = 50 * cfg.dt;
  EXPECT_THROW(sim::validate(cfg), Error);
  cfg = small_config();
  cfg.paths = 3;
  cfg.antithetic = true;
  EXPECT_THROW(sim::validate(cfg), Error);
  EXPECT_NO_THROW(sim::validate(small_config()));
}

TEST(Sim, Mix64SeparatesStreams) {
  EXPECT_NE(sim::mix64(1, 0), sim::mix64(1, 1));
  EXPECT_NE(sim::mix64(1, 0), sim::mix64(2, 0));
  EXPECT_EQ(sim::mix64(5, 9), sim::mix64(5, 9));
}

TEST(Sim, RealifyPreservesProducts) {
  Gen g(61);
  const Matrix A = g.matrix(3, 3, true);
  const Vector x = g.vector(3, true);
  const Eigen::VectorXd lhs = sim::realify(Vector(A * x));
  const Eigen::VectorXd rhs = sim::realify(A) * sim::realify(x);
  EXPECT_LT((lhs - rhs).norm(), 1e-12);
  EXPECT_NEAR(sim::realify(x).squaredNorm(), x.squaredNorm(), 1e-12);
}

TEST(Sim, DeterministicDecayWithoutNoise) {
  // E|x|^2 = e^{-2t} exactly up to the Euler factor
  const StochPlant p{scalar(-1.0), scalar(0.0), scalar(1.0)};
  const auto m = sim::simulate(p, scalar(0.0), vec1(1.0), small_config());
  EXPECT_NEAR(interpolate(m, 1.0), std::exp(-2.0), 1e-3);
  EXPECT_EQ(m.half_width.back(), 0.0);
}

TEST(Sim, SecondMomentFollowsLyapunovFlow) {
  // A = -1, N = 1: d/dt E|x|^2 = (2a + n^2) E|x|^2 = -E|x|^2
  const StochPlant p{scalar(-1.0), scalar(1.0), scalar(1.0)};
  const auto m = sim::simulate(p, scalar(0.0), vec1(1.0), small_config());
  for (double t : {0.25, 0.5, 1.0}) {
    const std::size_t i = static_cast<std::size_t>(std::round(t / (m.t[1] - m.t[0])));
    ASSERT_LT(i, m.t.size());
    EXPECT_NEAR(m.second_moment[i], std::exp(-m.t[i]), 3.0 * m.half_width[i] + 1e-3) << "t = " << t;
  }
}

TEST(Sim, ZeroInitialStateStaysAtZero) {
  const StochPlant p{scalar(-1.0), scalar(1.0), scalar(1.0)};
  const auto m = sim::simulate(p, scalar(0.0), vec1(0.0), small_config());
  for (double v : m.second_moment) EXPECT_EQ(v, 0.0);
}

TEST(Sim, CostMatchesGeneralizedLyapunov) {
  // J = x0* P x0 with A*P + PA + N*PN + W + F*F = 0; for A = -1, N = 1, F = 0, W = 1: P = 1
  const StochPlant p{scalar(-1.0), scalar(1.0), scalar(1.0)};
  sim::SimConfig cfg = small_config();
  cfg.horizon = 8.0;
  cfg.paths = 4000;
  const auto est = sim::estimate_cost(p, scalar(0.0), scalar(1.0), vec1(1.0), cfg);
  EXPECT_FALSE(est.unstable);
  EXPECT_NEAR(est.truncation, std::exp(-8.0), 1e-9);
  EXPECT_NEAR(est.mean + est.truncation, 1.0, 3.0 * est.half_width + 2e-3);
}

TEST(Sim, ComplexPlantCostMatchesGeneralizedLyapunov) {
  Gen g(62);
  const Matrix A = g.matrix(2, 2, true) - 2.0 * Matrix::Identity(2, 2);
  const Matrix N = 0.4 * g.matrix(2, 2, true);
  const Matrix B = g.matrix(2, 1, true);
  const Matrix F = -0.3 * B.adjoint();
  const Matrix W = g.positive_definite(2, true);
  const Vector x0 = g.vector(2, true);
  const Matrix Acl = A + B * F;
  const Matrix P = linmat::solve_glyap(Acl, N, W + F.adjoint() * F);
  const double exact = (x0.adjoint() * P * x0)(0).real();
  sim::SimConfig cfg = small_config();
  cfg.horizon = 6.0;
  const auto est = sim::estimate_cost(StochPlant{A, N, B}, F, W, x0, cfg);
  EXPECT_NEAR(est.mean + est.truncation, exact, 3.0 * est.half_width + 0.01 * exact);
}

TEST(Sim, ThreadCountDoesNotChangeResults) {
  const StochPlant p{scalar(-1.0), scalar(1.0), scalar(1.0)};
  sim::SimConfig cfg = small_config();
  cfg.paths = 1000;
  cfg.threads = 1;
  const auto a = sim::simulate(p, scalar(0.0), vec1(1.0), cfg);
  cfg.threads = 3;
  const auto b = sim::simulate(p, scalar(0.0), vec1(1.0), cfg);
  ASSERT_EQ(a.second_moment.size(), b.second_moment.size());
  for (std::size_t i = 0; i < a.second_moment.size(); ++i) {
    EXPECT_EQ(a.second_moment[i], b.second_moment[i]);
    EXPECT_EQ(a.half_width[i], b.half_width[i]);
  }
  cfg.seed = 8;
  const auto c = sim::simulate(p, scalar(0.0), vec1(1.0), cfg);
  EXPECT_NE(a.second_moment.back(), c.second_moment.back());
}

TEST(Sim, AntitheticPairsTightenMonotoneIntegrand) {
  // |x(t)|^2 is monotone in the driving path here, so pairs reduce variance
  // at the same number of simulated paths.
  const StochPlant p{scalar(-1.0), scalar(1.0), scalar(1.0)};
  sim::SimConfig cfg = small_config();
  cfg.paths = 2000;
  const auto plain = sim::estimate_cost(p, scalar(0.0), scalar(1.0), vec1(1.0), cfg);
  cfg.antithetic = true;
  const auto anti = sim::estimate_cost(p, scalar(0.0), scalar(1.0), vec1(1.0), cfg);
  EXPECT_EQ(anti.paths_used, cfg.paths / 2);
  const double exact = 1.0 - std::exp(-1.0);
  EXPECT_NEAR(anti.mean, exact, 3.0 * anti.half_width + 2e-3);
  EXPECT_LE(anti.half_width, plain.half_width * 1.05);
}

TEST(Sim, UnstableClosedLoopIsFlagged) {
  const StochPlant p{scalar(-0.4), scalar(1.0), scalar(1.0)};
  const auto est = sim::estimate_cost(p, scalar(0.0), scalar(1.0), vec1(1.0), small_config());
  EXPECT_TRUE(est.unstable);
}

TEST(Sim, EmpiricalSlopeOnStableSystem) {
  // A = -1, N = 0.5: ms_abscissa = -2 + 0.25
  const StochPlant p{scalar(-1.0), scalar(0.5), scalar(1.0)};
  sim::SimConfig cfg = small_config();
  cfg.paths = 20000;
  cfg.horizon = 0.5;
  const auto ms = sim::empirical_ms_check(p, scalar(0.0), cfg);
  EXPECT_NEAR(ms.reference, -1.75, 1e-12);
  EXPECT_TRUE(ms.stable);
  EXPECT_NEAR(ms.decay_rate_estimate, ms.reference, 3.0 * ms.half_width + 0.05);
}

TEST(Sim, MomentsCsv) {
  const StochPlant p{scalar(-1.0), scalar(0.0), scalar(1.0)};
  const auto m = sim::simulate(p, scalar(0.0), vec1(1.0), small_config());
  std::ostringstream os;
  sim::write_moments_csv(os, m);
  const std::string text = os.str();
  EXPECT_EQ(text.rfind("t,second_moment,half_width\n", 0), 0u);
  EXPECT_EQ(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')), m.t.size() + 1);
}
