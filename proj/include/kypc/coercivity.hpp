#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "kypc/types.hpp"

// Time-domain side of the frequency criterion: a discretized quadratic-form
// oracle for J(0, u) >= eps^2 |x|^2, the resonance witness, minimum-energy
// steering and the Fourier coefficient relation.
//
// Admissible inputs are approximated by zero-order-hold inputs on [0, T]
// followed by a stabilizing feedback u = F x on (T, inf). The tail cost is
// evaluated exactly through Lyapunov equations, so every discretized input
// corresponds to a genuine admissible input.
namespace kypc::coercivity {

/// Time samples t_k with rows of `u` holding u(t_k).
struct SampledControl {
  std::vector<double> t;
  Matrix u;  // samples x m
};

/// Writes "t,re_u0,im_u0,..." rows.
void write_control_csv(std::ostream& os, const SampledControl& control);

/// Tail feedback: LQR gain for identity weights.
Matrix tail_feedback(const LinearPlant& plant);

/// Smallest doubling of T from 1 with |e^{(A+BF)T}|_F <= 1e-8.
double decay_horizon(const LinearPlant& plant, const Matrix& F);

/// Default horizon used when T <= 0 is passed: max(20, decay_horizon).
double auto_horizon(const LinearPlant& plant);

/// Dense quadratic forms over the stacked input (stages * m):
///   hessian:        u -> J(0, u)
///   state_map_gram: u -> |x(., 0, u)|^2_{L2}
/// Stage costs use trapezoidal weights on ZOH state samples; the tail on
/// (T, inf) is exact. Dense assembly is limited to stages * m <= 4000.
struct DiscretizedCost {
  double T = 0.0;
  double dt = 0.0;
  int stages = 0;
  Matrix hessian;
  Matrix state_map_gram;
  Matrix tail_gain;
};

DiscretizedCost discretize_cost(const LinearPlant& plant, const CostWeight& M,
                                double T, double dt);

enum class CoercivityVerdict { coercive, nonstrict_only, not_coercive };
const char* to_string(CoercivityVerdict v);

struct CoercivityCertificate {
  CoercivityVerdict verdict = CoercivityVerdict::nonstrict_only;
  double eps_hat = 0.0;     // signed: sign(e2) sqrt(|e2|)
  double eps_hat_sq = 0.0;  // generalized eigenvalue of (hessian, gram + 1e-12 I)
  double T = 0.0;
  double dt = 0.0;
  int stages = 0;
  double tol = 1e-6;
  bool saturated = false;  // |eps_hat_sq| hit the search cap
  /// Negative-cost input on [0, T] (unit L2 norm); the feedback tail
  /// u = tail_gain x follows after T.
  std::optional<SampledControl> witness;
  double witness_cost = 0.0;
  Matrix tail_gain;
};

/// Generalized minimum eigenvalue of (hessian, state_map_gram + 1e-12 I),
/// computed by bisection on the inertia of the stagewise (Riccati
/// recursion) factorization of hessian - s (gram + 1e-12 I). T <= 0 selects
/// auto_horizon. Throws Error(precondition) if (A, B) is not stabilizable.
CoercivityCertificate check_coercivity(const LinearPlant& plant,
                                       const CostWeight& M, double T = 0.0,
                                       double dt = 1e-2);

/// Minimum-energy control on [0, tau].
struct SteeringControl {
  SampledControl control;
  double energy = 0.0;             // Gramian formula
  double energy_quadrature = 0.0;  // Simpson on the samples
  double endpoint_error = 0.0;     // |x(tau) - target endpoint|
};

/// Steers x(0) = x_target to x(tau) = 0 with
///   u(t) = -B* e^{A*(tau - t)} P^+ e^{A tau} x_target,
/// P the Gramian over [0, tau]. Throws Error(precondition) ("target outside
/// controllable subspace") when the projection residual exceeds 1e-8 |x|.
SteeringControl steering_control(const LinearPlant& plant, const Vector& x_target,
                                 double tau, int samples = 1000);

/// Reaches x(tau) = x_target from x(0) = 0 with
///   u(t) = B* e^{A*(tau - t)} P^+ x_target.
SteeringControl reach_control(const LinearPlant& plant, const Vector& x_target,
                              double tau, int samples = 1000);

/// Three-segment input: reach xi = G(omega) eta on [0, r], oscillate
/// eta e^{i omega (t - r)} on [r, T_k], stabilize with u = F x afterwards.
/// r = 1 unless a longer reach time in {2, 4, 8} lowers the constant cost.
/// On the middle segment the deviation x - xi e^{i omega (t - r)} (zero in
/// exact arithmetic) is fed back through F, keeping long periods of unstable
/// plants numerically bounded. F is the identity-weight LQR gain.
struct WitnessControl {
  double omega = 0.0;
  Vector eta;
  Vector xi;
  int ramp_cycles = 0;
  double T_k = 0.0;
  double cycle_length = 0.0;
  double cycle_cost = 0.0;
  double popov_value = 0.0;  // eta* Phi(omega) eta
  double slope = 0.0;        // cycle_cost / cycle_length
  double reach_time = 1.0;
  double constant_cost = 0.0;  // reach segment + tail
  double total_cost = 0.0;
  double periodicity_error = 0.0;
  Matrix tail_gain;
  Vector end_state;  // state after one period
  SampledControl u0_samples;
  SampledControl cycle_samples;  // one period of the middle segment
  SampledControl uinf_samples;
};

/// T_k = 2 k pi / |omega| + r (T_k = k + r for omega = 0). k starts at
/// `cycles` and doubles until total_cost < 0 (cap 1e4). Throws
/// Error(precondition) ("eta not violating") when eta* Phi eta >= 0 and
/// Error(not_converged) past the cap.
WitnessControl resonance_witness(const LinearPlant& plant, const CostWeight& M,
                                 double omega, const Vector& eta, int cycles = 1,
                                 double dt = 1e-3);

/// Same construction with a fixed cycle count (no auto-increase).
WitnessControl resonance_input(const LinearPlant& plant, const CostWeight& M,
                               double omega, const Vector& eta, int cycles,
                               double dt = 1e-3);

/// Full time series of a witness (segments concatenated).
SampledControl witness_timeline(const WitnessControl& w, std::size_t max_rows = 200000);

/// max_k |(i 2 pi k / T I - A) xi_k - B eta_k| over |k| <= K/4 for discrete
/// Fourier coefficients of K+1 equispaced samples on [0, T] (first and last
/// state sample must agree to 1e-6, else Error(precondition)).
double fourier_check(const LinearPlant& plant, const Matrix& input_samples,
                     const Matrix& state_samples, double T);

}  // namespace kypc::coercivity
