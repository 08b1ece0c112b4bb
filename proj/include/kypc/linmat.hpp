#pragma once

#include "kypc/types.hpp"

// Dense complex linear-algebra kernel. Matrix equations are solved through
// the explicit Kronecker lift (column-major vec), which is adequate at desk
// scale (n up to ~20).
namespace kypc::linmat {

/// (X + X*) / 2.
Matrix hermitian_part(const Matrix& X);

double frobenius(const Matrix& X);

/// Kronecker product a (x) b.
Matrix kron(const Matrix& a, const Matrix& b);

/// Column-major vectorization and its inverse.
Vector vec(const Matrix& X);
Matrix unvec(const Vector& v, Eigen::Index rows, Eigen::Index cols);

/// Solves A*P + PA + Q = 0.
/// Throws Error(singular_system) when A and -A* share an eigenvalue.
Matrix solve_lyapunov(const Matrix& A, const Matrix& Q);

/// Solves A*P + PA + N*PN + Q = 0 (generalized Lyapunov equation of the
/// Ito system dx = Ax dt + Nx dw). Throws Error(singular_system).
Matrix solve_glyap(const Matrix& A, const Matrix& N, const Matrix& Q);

/// Residual A*P + PA + N*PN + Q (N may be empty for the plain equation).
Matrix glyap_residual(const Matrix& A, const Matrix& N, const Matrix& Q,
                      const Matrix& P);

/// e^{At}.
Matrix matexp(const Matrix& A, double t);

/// Integral of e^{As} ds over [0, t] (used for zero-order-hold input maps).
Matrix matexp_integral(const Matrix& A, double t);

/// Finite-time controllability Gramian over [0, tau]:
///   int_0^tau e^{At} B B* e^{A*t} dt.
/// Composite 5-point Gauss-Legendre, starting at 64 panels and doubling the
/// panel count until successive values agree to 1e-12 relative.
Matrix finite_gramian(const Matrix& A, const Matrix& B, double tau);

/// Moore-Penrose pseudoinverse. Singular values below 1e-12 * sigma_max
/// count as zero.
Matrix pinv(const Matrix& X, double rel_tol = 1e-12);

/// Eigenvalues of a general complex square matrix.
Vector eigenvalues(const Matrix& A);

/// Ascending eigenvalues of a Hermitian matrix (the Hermitian part of X is
/// used).
RealVector hermitian_eigenvalues(const Matrix& X);

double min_hermitian_eigenvalue(const Matrix& X);

/// Numerical rank with singular values above rel_tol * sigma_max.
Eigen::Index rank(const Matrix& X, double rel_tol);

}  // namespace kypc::linmat
