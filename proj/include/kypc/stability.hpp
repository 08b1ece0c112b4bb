#pragma once

#include <optional>

#include "kypc/types.hpp"

namespace kypc::stability {

/// max Re(lambda) over the spectrum of A.
double spectral_abscissa(const Matrix& A);

/// Lift of P -> AP + PA* + NPN* acting on column-major vec(P):
///   I (x) A + conj(A) (x) I + conj(N) (x) N.
Matrix ms_lift(const Matrix& A, const Matrix& N);

/// Spectral abscissa of ms_lift(A, N); negative iff (A, N) is mean-square
/// asymptotically stable.
double ms_abscissa(const Matrix& A, const Matrix& N);

/// Hautus test over eigenvalues with Re >= 0; rank tolerance 1e-9 * sigma_max.
bool is_stabilizable_det(const LinearPlant& plant);

/// Bass construction: beta = |A|_F + 1, solve
/// (A + beta I) X + X (A + beta I)* = 2 B B*, F = -B* X^+.
/// Verified a posteriori; beta doubles on failure (up to 8 retries).
/// Throws Error(precondition) for unstabilizable input and
/// Error(not_converged) when verification keeps failing.
Matrix stabilize_det(const LinearPlant& plant);

/// One-sided certificate: returns F with ms_abscissa(A + BF, N) < 0, trying
/// F = 0 first and then the Wonham feedback obtained by homotopy in the
/// noise intensity. std::nullopt means "not certified", not "unstabilizable".
std::optional<Matrix> certify_stabilizable_stoch(const StochPlant& plant);

}  // namespace kypc::stability
