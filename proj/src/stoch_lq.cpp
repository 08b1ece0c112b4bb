#include "kypc/stoch_lq.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Cholesky>

#include "kypc/error.hpp"
#include "kypc/linmat.hpp"
#include "kypc/stability.hpp"

namespace kypc::stoch_lq {
namespace {

constexpr double kGainLo = 1e-6;
constexpr double kGainHi = 1e6;
constexpr double kGainRelTol = 1e-10;
constexpr double kBoundaryBand = 1e-6;
constexpr int kStarts = 20;

Classification classify_ms(double abscissa) {
  if (abscissa < riccati::kStableBand) return Classification::stabilizing;
  if (abscissa <= riccati::kAlmostBand) return Classification::almost_stabilizing;
  return Classification::non_stabilizing;
}

bool ms_stable(const Matrix& A, const Matrix& N) {
  return stability::ms_abscissa(A, N) < 0.0;
}

bool all_finite(const Matrix& X) { return X.allFinite(); }

StochPlant scaled_noise(const StochPlant& plant, double s) {
  return StochPlant{plant.A, s * plant.N, plant.B};
}

// Stabilizing solution of A*X + XA + N*XN + C*C + g^{-2} XSX = 0 by Newton
// from X = 0. Returns nullopt when an iterate loses mean-square stability,
// blows up or stalls.
std::optional<Matrix> bounded_real_solution(const Matrix& A, const Matrix& N,
                                            const Matrix& S, const Matrix& CC,
                                            double g) {
  const double w = 1.0 / (g * g);
  Matrix X = Matrix::Zero(A.rows(), A.cols());
  for (int k = 0; k < 200; ++k) {
    const Matrix Acl = A + w * S * X;
    if (k > 0 && !ms_stable(Acl, N)) return std::nullopt;
    Matrix next;
    try {
      next = linmat::solve_glyap(Acl, N, CC - w * X * S * X);
    } catch (const Error&) {
      return std::nullopt;
    }
    next = linmat::hermitian_part(next);
    if (!all_finite(next) || next.norm() > 1e12) return std::nullopt;
    const double step = (next - X).norm();
    X = std::move(next);
    if (step <= 1e-13 * (1.0 + X.norm())) {
      return ms_stable(A + w * S * X, N) ? std::optional<Matrix>(X) : std::nullopt;
    }
  }
  return std::nullopt;
}

Matrix input_transform(const Matrix& B, const Matrix& R) {
  const Eigen::LLT<Matrix> llt(R);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::r_not_positive_definite, "R not positive definite");
  }
  // B L^{-*}: solve L X = B* for X = L^{-1} B*, then take X*.
  const Matrix L = llt.matrixL();
  return L.triangularView<Eigen::Lower>().solve(B.adjoint()).adjoint();
}

Matrix upper_factor(const Matrix& W2) {
  const Eigen::LLT<Matrix> llt(linmat::hermitian_part(W2));
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::not_hermitian, "split block not positive definite");
  }
  return llt.matrixU();
}

void check_plant_weight(const StochPlant& plant, const Matrix& W) {
  if (W.rows() != plant.states() || W.cols() != plant.states()) {
    throw Error(ErrorCode::dimension_mismatch, "dimension mismatch: W");
  }
  if ((W - W.adjoint()).norm() > 1e-8 * std::max(1.0, W.norm())) {
    throw Error(ErrorCode::not_hermitian, "W not Hermitian");
  }
}

RiccatiReport finish_report(const StochPlant& plant, const Matrix& W, Matrix P,
                            int iterations, std::string note) {
  RiccatiReport r;
  r.residual = stoch_riccati_operator(plant, W, P).norm();
  r.closed_loop_measure = stability::ms_abscissa(
      plant.A - plant.B * plant.B.adjoint() * P, plant.N);
  r.classification = classify_ms(r.closed_loop_measure);
  r.iterations = iterations;
  r.note = std::move(note);
  r.P = std::move(P);
  return r;
}

// Random MS-stabilizing start: Wonham gain for a random PD weight of
// log-uniform scale, drawn from a seed-indexed stream.
std::optional<Matrix> seeded_start(const StochPlant& plant, int index) {
  std::mt19937_64 rng(0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(index));
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> expo(-2.0, 2.0);
  const Eigen::Index n = plant.states();
  Matrix G(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) G(i, j) = Complex(normal(rng), 0.0);
  }
  const Matrix Q = std::pow(10.0, expo(rng)) *
                   (G * G.adjoint() + 0.1 * Matrix::Identity(n, n));
  try {
    const RiccatiReport w = solve_wonham(plant, Q);
    if (!w.P) return std::nullopt;
    return Matrix(-plant.B.adjoint() * *w.P);
  } catch (const Error&) {
    return std::nullopt;
  }
}

bool is_stabilizing_solution(const RiccatiReport& r) {
  return r.P && r.classification == Classification::stabilizing &&
         r.residual <= 1e-8 * (1.0 + r.P->norm());
}

}  // namespace

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::coercive: return "coercive";
    case Verdict::not_coercive: return "not_coercive";
    case Verdict::not_certified: return "not_certified";
  }
  return "unknown";
}

WeightSplit split_weight(const Matrix& W, double extra_shift) {
  const Eigen::Index n = W.rows();
  WeightSplit s;
  s.shift = std::max(0.0, -linmat::min_hermitian_eigenvalue(W)) + 1.0 + extra_shift;
  s.W2 = s.shift * Matrix::Identity(n, n);
  s.W1 = linmat::hermitian_part(W) + s.W2;
  return s;
}

Matrix stoch_riccati_operator(const StochPlant& plant, const Matrix& W,
                              const Matrix& P) {
  const Matrix BP = plant.B.adjoint() * P;
  return plant.A.adjoint() * P + P * plant.A + plant.N.adjoint() * P * plant.N +
         W - BP.adjoint() * BP;
}

RiccatiReport newton_stoch(const StochPlant& plant, const Matrix& W,
                           const Matrix& F0, int max_iter) {
  check_plant_weight(plant, W);
  if (F0.rows() != plant.inputs() || F0.cols() != plant.states()) {
    throw Error(ErrorCode::dimension_mismatch, "dimension mismatch: F0");
  }
  if (!ms_stable(plant.A + plant.B * F0, plant.N)) {
    throw Error(ErrorCode::precondition,
                "newton_stoch: initial gain is not mean-square stabilizing");
  }
  Matrix F = F0;
  std::optional<Matrix> best;
  double best_res = std::numeric_limits<double>::infinity();
  double prev_res = best_res;
  int best_k = 0;
  for (int k = 1; k <= max_iter; ++k) {
    Matrix P;
    try {
      P = linmat::hermitian_part(linmat::solve_glyap(
          plant.A + plant.B * F, plant.N, W + F.adjoint() * F));
    } catch (const Error&) {
      throw Error(ErrorCode::not_converged, "iteration left stabilizing set");
    }
    const double res = stoch_riccati_operator(plant, W, P).norm();
    if (res < best_res) {
      best_res = res;
      best = P;
      best_k = k;
    }
    if (res <= 1e-11 * (1.0 + P.norm())) break;
    if (k > 2 && res >= prev_res) break;
    prev_res = res;
    F = -plant.B.adjoint() * P;
    if (!ms_stable(plant.A + plant.B * F, plant.N)) {
      throw Error(ErrorCode::not_converged, "iteration left stabilizing set");
    }
  }
  return finish_report(plant, W, *best, best_k, "newton");
}

std::optional<Matrix> wonham_homotopy(const StochPlant& plant, const Matrix& W1) {
  const Eigen::Index n = plant.states();
  const Eigen::Index m = plant.inputs();
  const LinearPlant drift = plant.drift();
  if (m == 0 || !stability::is_stabilizable_det(drift)) return std::nullopt;
  Matrix F;
  try {
    const CostWeight M = CostWeight::make(W1, Matrix::Zero(m, n), Matrix::Identity(m, m));
    const RiccatiReport det = riccati::solve_are(drift, M);
    if (!det.P || det.classification != Classification::stabilizing) return std::nullopt;
    F = riccati::feedback(drift, M, *det.P);
  } catch (const Error&) {
    return std::nullopt;
  }
  double s = 0.0;
  double step = 1.0;
  while (s < 1.0) {
    const double next = std::min(1.0, s + step);
    const StochPlant sp = scaled_noise(plant, next);
    bool advanced = false;
    for (double c : {1.0, 2.0, 4.0, 8.0, 16.0}) {
      const Matrix Fc = c * F;
      if (!ms_stable(sp.A + sp.B * Fc, sp.N)) continue;
      try {
        const RiccatiReport r = newton_stoch(sp, W1, Fc);
        F = -sp.B.adjoint() * *r.P;
        if (!ms_stable(sp.A + sp.B * F, sp.N)) continue;
        advanced = true;
        break;
      } catch (const Error&) {
        continue;
      }
    }
    if (advanced) {
      s = next;
      step *= 2.0;
    } else {
      step *= 0.5;
      if (step < 1e-6) return std::nullopt;
    }
  }
  return F;
}

RiccatiReport solve_wonham(const StochPlant& plant, const Matrix& W1) {
  check_plant_weight(plant, W1);
  const Eigen::Index n = plant.states();
  const Eigen::Index m = plant.inputs();
  std::optional<Matrix> F0;
  if (ms_stable(plant.A, plant.N)) {
    F0 = Matrix::Zero(m, n);
  } else {
    F0 = wonham_homotopy(plant, W1);
  }
  if (!F0 || !ms_stable(plant.A + plant.B * *F0, plant.N)) {
    throw Error(ErrorCode::precondition,
                "mean-square stabilizability not certified");
  }
  RiccatiReport r = newton_stoch(plant, W1, *F0);
  r.note = "wonham";
  return r;
}

GainResult l2_gain(const Matrix& A_cl, const Matrix& N, const Matrix& B,
                   const Matrix& C) {
  if (A_cl.rows() != A_cl.cols() || N.rows() != A_cl.rows() || N.cols() != A_cl.cols() ||
      B.rows() != A_cl.rows() || C.cols() != A_cl.rows()) {
    throw Error(ErrorCode::dimension_mismatch, "dimension mismatch: gain data");
  }
  if (!ms_stable(A_cl, N)) {
    throw Error(ErrorCode::precondition, "gain requires a mean-square stable pair");
  }
  GainResult out;
  if (B.size() == 0 || C.size() == 0 || B.norm() == 0.0 || C.norm() == 0.0) return out;
  const Matrix S = B * B.adjoint();
  const Matrix CC = C.adjoint() * C;
  auto feasible = [&](double g) {
    return bounded_real_solution(A_cl, N, S, CC, g).has_value();
  };
  double lo = kGainLo;
  double hi = kGainHi;
  if (feasible(lo)) {
    out.gain = lo;
    out.upper_bound_only = true;
    return out;
  }
  if (!feasible(hi)) {
    out.gain = hi;
    out.upper_bound_only = true;
    return out;
  }
  while (hi / lo - 1.0 > kGainRelTol) {
    const double mid = std::sqrt(lo * hi);
    if (feasible(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  out.gain = hi;
  return out;
}

GainResult input_state_gain(const Matrix& A_cl, const Matrix& N, const Matrix& B) {
  return l2_gain(A_cl, N, B, Matrix::Identity(A_cl.rows(), A_cl.rows()));
}

std::optional<BrlSolution> brl_margin(const Matrix& A_cl, const Matrix& N,
                                      const Matrix& B, const Matrix& C2) {
  const GainResult g = l2_gain(A_cl, N, B, C2);
  if (g.gain >= 1.0) return std::nullopt;
  BrlSolution out;
  out.gain = g.gain;
  out.delta = std::sqrt(1.0 - g.gain * g.gain);
  const auto X = bounded_real_solution(A_cl, N, B * B.adjoint(), C2.adjoint() * C2, 1.0);
  if (!X) return std::nullopt;
  out.P2 = -*X;
  return out;
}

RiccatiReport solve_stoch_riccati(const StochPlant& plant, const Matrix& W) {
  check_plant_weight(plant, W);
  const Eigen::Index m = plant.inputs();
  if (!stability::certify_stabilizable_stoch(plant)) {
    throw Error(ErrorCode::precondition, "mean-square stabilizability not certified");
  }
  const WeightSplit split = split_weight(W);
  const RiccatiReport wonham = solve_wonham(plant, split.W1);
  const Matrix& P1 = *wonham.P;
  const Matrix A_cl = plant.A - plant.B * plant.B.adjoint() * P1;
  if (m > 0) {
    const auto brl = brl_margin(A_cl, plant.N, plant.B, upper_factor(split.W2));
    if (brl) {
      const Matrix P = linmat::hermitian_part(P1 + brl->P2);
      RiccatiReport r = finish_report(plant, W, P, wonham.iterations, "split+brl");
      const Matrix F = -plant.B.adjoint() * P;
      if (ms_stable(plant.A + plant.B * F, plant.N)) {
        try {
          RiccatiReport refined = newton_stoch(plant, W, F);
          if (refined.residual <= r.residual) {
            refined.note = "split+brl+newton";
            r = std::move(refined);
          }
        } catch (const Error&) {
        }
      }
      return r;
    }
  } else {
    // No input: the equation is linear.
    return finish_report(plant, W, linmat::hermitian_part(
                                        linmat::solve_glyap(plant.A, plant.N, W)),
                         1, "glyap");
  }

  std::vector<std::future<std::optional<RiccatiReport>>> runs;
  runs.reserve(kStarts);
  for (int k = 0; k < kStarts; ++k) {
    runs.push_back(std::async(std::launch::async, [&plant, &W, k]() {
      const auto F = seeded_start(plant, k);
      if (!F) return std::optional<RiccatiReport>();
      try {
        RiccatiReport r = newton_stoch(plant, W, *F);
        if (is_stabilizing_solution(r)) return std::optional<RiccatiReport>(r);
      } catch (const Error&) {
      }
      return std::optional<RiccatiReport>();
    }));
  }
  std::optional<RiccatiReport> found;
  for (int k = 0; k < kStarts; ++k) {
    auto r = runs[k].get();
    if (!found && r) {
      found = std::move(r);
      found->note = "multistart newton, start " + std::to_string(k);
    }
  }
  if (found) return *found;
  RiccatiReport none;
  none.note = "bounded-real route infeasible; no multistart Newton run converged";
  return none;
}

StochCoercivityReport coercivity_stoch(const StochPlant& plant_in, const Matrix& W,
                                       const Matrix& R) {
  check_plant_weight(plant_in, W);
  const Eigen::Index n = plant_in.states();
  const Eigen::Index m = plant_in.inputs();
  StochCoercivityReport rep;
  StochPlant plant = plant_in;
  if (R.size() != 0) {
    if (R.rows() != m || R.cols() != m) {
      throw Error(ErrorCode::dimension_mismatch, "dimension mismatch: R");
    }
    plant.B = input_transform(plant_in.B, R);
    rep.input_transform = "B <- B L^{-*}, R = L L*";
  } else {
    rep.input_transform = "none (R = I)";
  }
  if (!stability::certify_stabilizable_stoch(plant)) {
    throw Error(ErrorCode::precondition, "mean-square stabilizability not certified");
  }

  const WeightSplit split = split_weight(W);
  rep.W1 = split.W1;
  rep.W2 = split.W2;
  const RiccatiReport wonham = solve_wonham(plant, split.W1);
  rep.P1 = *wonham.P;
  const Matrix A_cl = plant.A - plant.B * plant.B.adjoint() * rep.P1;
  rep.closed_loop_ms_abscissa = stability::ms_abscissa(A_cl, plant.N);

  const Matrix B = m > 0 ? plant.B : Matrix::Zero(n, 1);
  const GainResult gamma = input_state_gain(A_cl, plant.N, B);
  rep.gamma = gamma.gain;
  rep.gamma_upper_bound_only = gamma.upper_bound_only;
  const Matrix C2 = upper_factor(split.W2);
  const GainResult g = l2_gain(A_cl, plant.N, B, C2);
  rep.bounded_real_gain = g.gain;

  if (g.gain < 1.0 - kBoundaryBand) {
    const auto X = bounded_real_solution(A_cl, plant.N, B * B.adjoint(),
                                         C2.adjoint() * C2, 1.0);
    if (X) {
      rep.P2 = -*X;
      rep.delta = std::sqrt(1.0 - g.gain * g.gain);
      rep.eps = rep.gamma > 0.0 ? *rep.delta / rep.gamma : *rep.delta;
      const Matrix P = linmat::hermitian_part(rep.P1 + *rep.P2);
      rep.composition_residual = stoch_riccati_operator(plant, W, P).norm();
      rep.stabilizing_P = P;
      rep.verdict = Verdict::coercive;
      return rep;
    }
    rep.verdict = Verdict::not_certified;
    return rep;
  }
  if (g.gain <= 1.0 + kBoundaryBand) {
    rep.verdict = Verdict::not_certified;
    return rep;
  }
  const RiccatiReport direct = solve_stoch_riccati(plant, W);
  rep.verdict = direct.P ? Verdict::not_certified : Verdict::not_coercive;
  return rep;
}

}  // namespace kypc::stoch_lq
