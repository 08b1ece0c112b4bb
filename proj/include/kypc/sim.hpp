#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "kypc/types.hpp"

// Euler-Maruyama Monte Carlo for dx = (A + BF) x dt + N x dw.
//
// Complex data is realified first (x = xr + i xi, doubled dimension); the
// Wiener increment is real. Each path draws its increments from a generator
// seeded with mix64(seed, index), where index is the path index, or the pair
// index when antithetic pairs share one stream with opposite signs.
// Paths are grouped into fixed blocks and block partial sums are combined by
// pairwise summation in block order, so results do not depend on the number
// of worker threads.
namespace kypc::sim {

struct SimConfig {
  double dt = 1e-3;
  double horizon = 10.0;
  std::size_t paths = 10000;
  std::uint64_t seed = 1;
  bool antithetic = false;
  unsigned threads = 0;     // 0: hardware concurrency
  std::size_t samples = 1000;  // recorded time points (approximate)
};

/// Throws Error(invalid_argument) unless dt > 0, horizon >= 100 dt,
/// paths >= 2 (even when antithetic).
void validate(const SimConfig& cfg);

std::uint64_t mix64(std::uint64_t seed, std::uint64_t index);

/// Real 2n x 2n form of a complex n x n matrix.
Eigen::MatrixXd realify(const Matrix& X);
Eigen::VectorXd realify(const Vector& x);

struct MomentTrajectory {
  std::vector<double> t;
  std::vector<double> second_moment;  // E |x(t)|^2
  std::vector<double> half_width;     // 95% normal CI
  std::size_t paths_used = 0;
  bool exploded = false;              // truncated at the first overflow
};

MomentTrajectory simulate(const StochPlant& plant, const Matrix& F,
                          const Vector& x0, const SimConfig& cfg);

struct CostEstimate {
  double mean = 0.0;
  double half_width = 0.0;
  std::size_t paths_used = 0;
  double truncation = 0.0;  // E x(T)* P_Q x(T) from the exact moment flow
  bool exploded = false;
  bool unstable = false;    // closed loop not mean-square stable
};

/// Trapezoidal E int_0^T x*Wx + |Fx|^2 dt over the sampled paths.
CostEstimate estimate_cost(const StochPlant& plant, const Matrix& F,
                           const Matrix& W, const Vector& x0,
                           const SimConfig& cfg);

struct MsCheck {
  double decay_rate_estimate = 0.0;  // slope of log E|X(t)|_F^2
  double half_width = 0.0;           // batch-means 95% CI on the slope
  double reference = 0.0;            // ms_abscissa(A + BF, N)
  bool stable = false;
  bool exploded = false;
};

/// Least-squares slope of log E|X(t)|_F^2 over the last half of the horizon,
/// X(0) = I (all canonical initial states, one noise path each).
MsCheck empirical_ms_check(const StochPlant& plant, const Matrix& F,
                           const SimConfig& cfg);

/// Writes "t,second_moment,half_width" rows.
void write_moments_csv(std::ostream& os, const MomentTrajectory& m);

}  // namespace kypc::sim
