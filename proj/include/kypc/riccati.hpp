#pragma once

#include <optional>
#include <string>

#include "kypc/types.hpp"

namespace kypc {

enum class Classification {
  stabilizing,
  almost_stabilizing,
  non_stabilizing,
  no_solution,
};

const char* to_string(Classification c);

/// Outcome of a Riccati solve, shared by the deterministic and stochastic
/// solvers. closed_loop_measure is the spectral abscissa of the closed loop
/// (deterministic) or its mean-square abscissa (stochastic).
struct RiccatiReport {
  std::optional<Matrix> P;
  double residual = 0.0;
  double closed_loop_measure = 0.0;
  Classification classification = Classification::no_solution;
  int iterations = 0;
  std::string note;
};

// Deterministic equation A*P + PA + W - (B*P + V)* R^{-1} (B*P + V) = 0.
namespace riccati {

/// Classification bands on the closed-loop abscissa.
inline constexpr double kStableBand = -1e-9;
inline constexpr double kAlmostBand = 1e-7;

Matrix are_operator(const LinearPlant& plant, const CostWeight& M,
                    const Matrix& P);

/// Frobenius norm of are_operator.
double are_residual(const LinearPlant& plant, const CostWeight& M,
                    const Matrix& P);

/// F = -R^{-1}(B*P + V), so that the closed loop is A + BF.
Matrix feedback(const LinearPlant& plant, const CostWeight& M, const Matrix& P);

/// Hamiltonian invariant-subspace solve followed by Newton-Kleinman
/// refinement. Throws Error(precondition) when (A, B) is not stabilizable
/// and Error(singular_system) ("subspace not graph") when the stable
/// invariant subspace has no graph representation.
RiccatiReport solve_are(const LinearPlant& plant, const CostWeight& M);

/// Newton-Kleinman from a stabilizing gain F0 (A + B F0 Hurwitz).
/// Stops at residual <= 1e-11 (1 + |P|) or after max_iter steps.
/// Throws Error(precondition) if F0 is not stabilizing and
/// Error(not_converged) ("iteration left stabilizing set") if an iterate
/// loses stability.
RiccatiReport newton_kleinman(const LinearPlant& plant, const CostWeight& M,
                              const Matrix& F0, int max_iter = 50);

}  // namespace riccati
}  // namespace kypc
