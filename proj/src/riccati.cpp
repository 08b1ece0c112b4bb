#include "kypc/riccati.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "kypc/error.hpp"
#include "kypc/linmat.hpp"
#include "kypc/stability.hpp"

namespace kypc {

const char* to_string(Classification c) {
  switch (c) {
    case Classification::stabilizing: return "stabilizing";
    case Classification::almost_stabilizing: return "almost_stabilizing";
    case Classification::non_stabilizing: return "non_stabilizing";
    case Classification::no_solution: return "no_solution";
  }
  return "unknown";
}

namespace riccati {
namespace {

void check_dims(const LinearPlant& plant, const CostWeight& M) {
  if (M.states() != plant.states() || M.inputs() != plant.inputs()) {
    throw Error(ErrorCode::dimension_mismatch,
                "dimension mismatch: cost weight vs plant");
  }
}

Classification classify(double abscissa) {
  if (abscissa < kStableBand) return Classification::stabilizing;
  if (abscissa <= kAlmostBand) return Classification::almost_stabilizing;
  return Classification::non_stabilizing;
}

double converged_tol(const Matrix& P) { return 1e-11 * (1.0 + P.norm()); }

}  // namespace

Matrix are_operator(const LinearPlant& plant, const CostWeight& M,
                    const Matrix& P) {
  check_dims(plant, M);
  const Matrix K = plant.B.adjoint() * P + M.V;
  return plant.A.adjoint() * P + P * plant.A + M.W -
         K.adjoint() * M.R.llt().solve(K);
}

double are_residual(const LinearPlant& plant, const CostWeight& M,
                    const Matrix& P) {
  return are_operator(plant, M, P).norm();
}

Matrix feedback(const LinearPlant& plant, const CostWeight& M, const Matrix& P) {
  return -M.R.llt().solve(plant.B.adjoint() * P + M.V);
}

RiccatiReport newton_kleinman(const LinearPlant& plant, const CostWeight& M,
                              const Matrix& F0, int max_iter) {
  check_dims(plant, M);
  if (F0.rows() != plant.inputs() || F0.cols() != plant.states()) {
    throw Error(ErrorCode::dimension_mismatch, "dimension mismatch: F0");
  }
  if (!(stability::spectral_abscissa(plant.A + plant.B * F0) < 0.0)) {
    throw Error(ErrorCode::precondition,
                "newton_kleinman: initial gain is not stabilizing");
  }
  RiccatiReport best;
  double best_res = std::numeric_limits<double>::infinity();
  double prev_res = best_res;
  Matrix F = F0;
  for (int k = 1; k <= max_iter; ++k) {
    const Matrix Acl = plant.A + plant.B * F;
    const Matrix Q = M.W + M.V.adjoint() * F + F.adjoint() * M.V +
                     F.adjoint() * M.R * F;
    Matrix P;
    try {
      P = linmat::solve_lyapunov(Acl, Q);
    } catch (const Error&) {
      throw Error(ErrorCode::not_converged, "iteration left stabilizing set");
    }
    const double res = are_residual(plant, M, P);
    if (res < best_res) {
      best_res = res;
      best.P = P;
      best.residual = res;
      best.iterations = k;
    }
    if (res <= converged_tol(P)) break;
    // Residual floor reached: further sweeps only reshuffle rounding error.
    if (k > 2 && res >= prev_res) break;
    prev_res = res;
    F = feedback(plant, M, P);
    if (!(stability::spectral_abscissa(plant.A + plant.B * F) < 0.0)) {
      throw Error(ErrorCode::not_converged, "iteration left stabilizing set");
    }
  }
  best.closed_loop_measure = stability::spectral_abscissa(
      plant.A + plant.B * feedback(plant, M, *best.P));
  best.classification = classify(best.closed_loop_measure);
  return best;
}

RiccatiReport solve_are(const LinearPlant& plant, const CostWeight& M) {
  check_dims(plant, M);
  if (!stability::is_stabilizable_det(plant)) {
    throw Error(ErrorCode::precondition, "solve_are: (A, B) not stabilizable");
  }
  const Eigen::Index n = plant.states();
  const auto Rllt = M.R.llt();
  const Matrix At = plant.A - plant.B * Rllt.solve(M.V);
  const Matrix S = plant.B * Rllt.solve(plant.B.adjoint());
  const Matrix Wt = M.W - M.V.adjoint() * Rllt.solve(M.V);

  Matrix H(2 * n, 2 * n);
  H << At, -S, -Wt, -At.adjoint();
  Eigen::ComplexEigenSolver<Matrix> es(H, true);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::not_converged, "Hamiltonian eigensolver failed");
  }
  const Vector& ev = es.eigenvalues();
  const double axis_tol = 1e-6 * std::max(1.0, H.norm());

  std::vector<Eigen::Index> order(2 * n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) {
    return ev(a).real() < ev(b).real();
  });
  Eigen::Index n_stable = 0;
  Eigen::Index n_axis = 0;
  for (Eigen::Index i = 0; i < 2 * n; ++i) {
    if (ev(i).real() < -axis_tol) {
      ++n_stable;
    } else if (ev(i).real() <= axis_tol) {
      ++n_axis;
    }
  }

  Matrix X(2 * n, n);
  for (Eigen::Index j = 0; j < n; ++j) X.col(j) = es.eigenvectors().col(order[j]);
  const Matrix X1 = X.topRows(n);
  const Matrix X2 = X.bottomRows(n);
  Eigen::JacobiSVD<Matrix> svd(X1);
  const auto& sv = svd.singularValues();
  const bool graph = n == 0 || (sv(n - 1) > 1e-12 * sv(0));

  RiccatiReport report;
  if (n_axis == 0) {
    if (n_stable != n) {
      report.note = "Hamiltonian spectrum not split";
      return report;
    }
    if (!graph) {
      throw Error(ErrorCode::singular_system, "subspace not graph");
    }
    const Matrix P = linmat::hermitian_part(X2 * X1.inverse());
    report.P = P;
    report.residual = are_residual(plant, M, P);
    report.closed_loop_measure =
        stability::spectral_abscissa(plant.A + plant.B * feedback(plant, M, P));
    report.classification = classify(report.closed_loop_measure);
    report.note = "hamiltonian";
    if (report.closed_loop_measure < 0.0) {
      try {
        RiccatiReport refined = newton_kleinman(plant, M, feedback(plant, M, P));
        if (refined.residual <= report.residual) {
          refined.note = "hamiltonian+newton";
          report = std::move(refined);
        }
      } catch (const Error&) {
        // keep the unrefined Hamiltonian solution
      }
    }
    return report;
  }

  // Eigenvalues on the imaginary axis: no stabilizing solution. An almost
  // stabilizing one exists when the n leftmost eigenvectors span a
  // Lagrangian graph subspace.
  if (!graph) {
    report.note = "imaginary-axis Hamiltonian eigenvalues; subspace not graph";
    return report;
  }
  const Matrix Praw = X2 * X1.inverse();
  const Matrix P = linmat::hermitian_part(Praw);
  const double scale = std::max(1.0, P.norm());
  const double asym = (Praw - Praw.adjoint()).norm();
  const double res = are_residual(plant, M, P);
  const double abscissa =
      stability::spectral_abscissa(plant.A + plant.B * feedback(plant, M, P));
  const double data_scale = std::max(1.0, H.norm());
  if (asym <= 1e-6 * scale && res <= 1e-6 * scale * data_scale &&
      abscissa <= axis_tol) {
    report.P = P;
    report.residual = res;
    // The selected imaginary-axis Hamiltonian eigenvalues are closed-loop
    // eigenvalues; they are snapped onto the axis.
    report.closed_loop_measure = 0.0;
    report.classification = Classification::almost_stabilizing;
    report.note = "numerically marginal: imaginary-axis Hamiltonian eigenvalues";
    return report;
  }
  report.note = "imaginary-axis Hamiltonian eigenvalues; no Hermitian solution";
  return report;
}

}  // namespace riccati
}  // namespace kypc
