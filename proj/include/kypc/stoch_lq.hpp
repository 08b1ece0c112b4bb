#pragma once

#include <optional>
#include <string>

#include "kypc/riccati.hpp"
#include "kypc/types.hpp"

// Indefinite LQ control of dx = (Ax + Bu) dt + Nx dw with cost
// E int x*Wx + u*Ru dt. Inputs are normalised internally to R = I through
// B <- B L^{-*}, R = L L*.
namespace kypc::stoch_lq {

struct WeightSplit {
  Matrix W1;  // W + c I, positive definite
  Matrix W2;  // c I, positive definite
  double shift = 0.0;
};

/// W = W1 - W2 with c = max(0, -lambda_min(W)) + 1 + extra_shift.
WeightSplit split_weight(const Matrix& W, double extra_shift = 0.0);

/// Residual A*P + PA + N*PN + W - PBB*P.
Matrix stoch_riccati_operator(const StochPlant& plant, const Matrix& W,
                              const Matrix& P);

/// Newton-Kleinman on the stochastic Riccati equation from an MS-stabilizing
/// gain F0: P_k solves the generalized Lyapunov equation of A + B F_k with
/// weight W + F_k* F_k, then F_{k+1} = -B* P_k. Throws
/// Error(precondition) for a non-stabilizing F0 and Error(not_converged) if
/// an iterate leaves the MS-stabilizing set.
RiccatiReport newton_stoch(const StochPlant& plant, const Matrix& W,
                           const Matrix& F0, int max_iter = 50);

/// MS-stabilizing feedback for the definite problem with weight W1 > 0,
/// found by continuation from the noise-free problem (N scaled from 0 to 1).
std::optional<Matrix> wonham_homotopy(const StochPlant& plant, const Matrix& W1);

/// Stabilizing solution of A*P + PA + N*PN + W1 - PBB*P = 0 for W1 > 0.
/// Throws Error(precondition) if no MS-stabilizing gain is certified.
RiccatiReport solve_wonham(const StochPlant& plant, const Matrix& W1);

/// Stabilizing solution of A*P + PA + N*PN + W - PBB*P = 0 for indefinite W,
/// via split / Wonham / bounded-real composition, then direct Newton from
/// 20 seed-indexed MS-stabilizing starts if that route is infeasible.
RiccatiReport solve_stoch_riccati(const StochPlant& plant, const Matrix& W);

/// Mean-square L2 gain from u to y = Cx of dx = (A x + B u) dt + N x dw:
/// the least g for which A*X + XA + N*XN + C*C + g^{-2} XBB*X = 0 has a
/// stabilizing solution. Bisection on [1e-6, 1e6], relative tolerance 1e-10.
struct GainResult {
  double gain = 0.0;
  bool upper_bound_only = false;  // bracket exhausted
};
GainResult l2_gain(const Matrix& A_cl, const Matrix& N, const Matrix& B,
                   const Matrix& C);

/// Input-to-state gain (C = I instance of l2_gain).
GainResult input_state_gain(const Matrix& A_cl, const Matrix& N, const Matrix& B);

/// Bounded-real margin for J_{W2}(0, u) = |u|^2 - |C2 x|^2 on the closed loop.
struct BrlSolution {
  double delta = 0.0;  // sqrt(1 - g^2)
  double gain = 0.0;   // g
  Matrix P2;           // stabilizing, negative semidefinite
};
/// std::nullopt when g >= 1. P2 solves
///   A_cl*P + P A_cl + N*PN - C2*C2 - PBB*P = 0
/// with (A_cl - BB*P, N) MS-stable. Throws Error(precondition) if
/// (A_cl, N) is not MS-stable.
std::optional<BrlSolution> brl_margin(const Matrix& A_cl, const Matrix& N,
                                      const Matrix& B, const Matrix& C2);

enum class Verdict { coercive, not_coercive, not_certified };
const char* to_string(Verdict v);

struct StochCoercivityReport {
  std::optional<Matrix> stabilizing_P;
  Matrix P1;
  std::optional<Matrix> P2;
  Matrix W1;
  Matrix W2;
  std::optional<double> delta;
  double bounded_real_gain = 0.0;  // g of the W2 channel
  double gamma = 0.0;
  bool gamma_upper_bound_only = false;
  std::optional<double> eps;  // delta / gamma
  double composition_residual = 0.0;  // |Ric(P1 + P2)|_F, when P2 exists
  double closed_loop_ms_abscissa = 0.0;
  Verdict verdict = Verdict::not_certified;
  std::string input_transform;  // documents B <- B L^{-*}
};

/// Decides the stochastic coercivity condition through the constructive
/// Riccati chain. R defaults to the identity when empty.
/// Throws Error(precondition) when stabilizability is not certified.
StochCoercivityReport coercivity_stoch(const StochPlant& plant, const Matrix& W,
                                       const Matrix& R = Matrix());

}  // namespace kypc::stoch_lq
