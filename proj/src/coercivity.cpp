#include "kypc/coercivity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "kypc/error.hpp"
#include "kypc/frequency.hpp"
#include "kypc/linmat.hpp"
#include "kypc/riccati.hpp"
#include "kypc/stability.hpp"

namespace kypc::coercivity {
namespace {

constexpr double kGramReg = 1e-12;
constexpr double kSearchCap = 1e16;
constexpr int kDenseLimit = 4000;

// Stagewise model of the discretized cost in z_j = (x_j, u_j).
struct StageModel {
  int n = 0;
  int m = 0;
  int K = 0;
  double dt = 0.0;
  double T = 0.0;
  Matrix transition;  // [Ad, Gamma]
  Matrix Qc;          // cost, trapezoidal
  Matrix Qx;          // state norm, trapezoidal
  Matrix tail_cost;
  Matrix tail_state;
  Matrix F;
};

StageModel build_model(const LinearPlant& plant, const CostWeight& M, double T,
                       double dt, const Matrix& F) {
  if (!(dt > 0.0) || !(T >= 10.0 * dt)) {
    throw Error(ErrorCode::invalid_argument, "discretization needs dt > 0 and T >= 10 dt");
  }
  StageModel sm;
  sm.n = static_cast<int>(plant.states());
  sm.m = static_cast<int>(plant.inputs());
  sm.K = static_cast<int>(std::llround(T / dt));
  sm.T = T;
  sm.dt = T / sm.K;
  sm.F = F;
  const int n = sm.n;
  const int m = sm.m;
  const Matrix Ad = linmat::matexp(plant.A, sm.dt);
  const Matrix Gam = linmat::matexp_integral(plant.A, sm.dt) * plant.B;
  sm.transition.resize(n, n + m);
  sm.transition << Ad, Gam;

  const Matrix Mfull = M.assembled();
  Matrix Dx = Matrix::Zero(n + m, n + m);
  Dx.topLeftCorner(n, n).setIdentity();
  Matrix E1 = Matrix::Identity(n + m, n + m);
  E1.topRows(n) = sm.transition;
  const double h = 0.5 * sm.dt;
  sm.Qc = linmat::hermitian_part(h * (Mfull + E1.adjoint() * Mfull * E1));
  sm.Qx = linmat::hermitian_part(h * (Dx + E1.adjoint() * Dx * E1));

  const Matrix Acl = plant.A + plant.B * F;
  Matrix IF(n + m, n);
  IF << Matrix::Identity(n, n), F;
  sm.tail_cost = linmat::solve_lyapunov(Acl, IF.adjoint() * Mfull * IF);
  sm.tail_state = linmat::solve_lyapunov(Acl, Matrix::Identity(n, n));
  return sm;
}

bool is_real(const Matrix& X) { return X.imag().cwiseAbs().maxCoeff() == 0.0; }

template <typename S>
Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic> as(const Matrix& X) {
  if constexpr (std::is_same_v<S, double>) {
    return X.real();
  } else {
    return X;
  }
}

// Backward recursion testing hessian - s (gram + reg I) > 0 through the
// positivity of every stage pivot.
template <typename S>
class Recursion {
 public:
  using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

  explicit Recursion(const StageModel& sm)
      : n_(sm.n), m_(sm.m), K_(sm.K),
        transition_(as<S>(sm.transition)),
        Qc_(as<S>(sm.Qc)), Qx_(as<S>(sm.Qx)),
        Pc_(as<S>(sm.tail_cost)), Px_(as<S>(sm.tail_state)) {
    Qreg_ = Mat::Zero(n_ + m_, n_ + m_);
    Qreg_.bottomRightCorner(m_, m_).setIdentity();
    Qreg_ *= kGramReg;
  }

  struct Failure {
    int stage = -1;
    Mat pivot;
  };

  // gains[j] (j > failure stage) hold Zuu^{-1} Zux so that u_j = -gains[j] x_j.
  bool positive(double s, std::vector<Mat>* gains = nullptr,
                Failure* failure = nullptr) const {
    const Mat Q = Qc_ - s * (Qx_ + Qreg_);
    Mat P = Pc_ - s * Px_;
    Mat PT(n_, n_ + m_);
    Mat Z(n_ + m_, n_ + m_);
    Mat gain(m_, n_);
    if (gains) gains->assign(K_, Mat());
    for (int j = K_ - 1; j >= 0; --j) {
      PT.noalias() = P * transition_;
      Z = Q;
      Z.noalias() += transition_.adjoint() * PT;
      const Mat Zuu = 0.5 * (Z.bottomRightCorner(m_, m_) +
                             Z.bottomRightCorner(m_, m_).adjoint());
      Eigen::LLT<Mat> llt(Zuu);
      if (llt.info() != Eigen::Success) {
        if (failure) {
          failure->stage = j;
          failure->pivot = Zuu;
        }
        return false;
      }
      gain = llt.solve(Z.bottomLeftCorner(m_, n_));
      if (gains) (*gains)[j] = gain;
      P = Z.topLeftCorner(n_, n_);
      P.noalias() -= Z.topRightCorner(n_, m_) * gain;
      P = 0.5 * (P + P.adjoint()).eval();
    }
    return true;
  }

 private:
  int n_, m_, K_;
  Mat transition_, Qc_, Qx_, Pc_, Px_, Qreg_;
};

struct SearchResult {
  double value = 0.0;
  bool saturated = false;
};

// Supremum of s with positive(s); monotone decreasing predicate.
template <typename Pred>
SearchResult critical_shift(Pred&& positive) {
  SearchResult r;
  double lo = 0.0;
  double hi = 0.0;
  if (positive(0.0)) {
    double s = 1.0;
    while (positive(s)) {
      lo = s;
      s *= 2.0;
      if (s > kSearchCap) {
        r.value = lo;
        r.saturated = true;
        return r;
      }
    }
    hi = s;
  } else {
    double s = -1.0;
    while (!positive(s)) {
      hi = s;
      s *= 2.0;
      if (-s > kSearchCap) {
        r.value = hi;
        r.saturated = true;
        return r;
      }
    }
    lo = s;
  }
  for (int it = 0; it < 60 && (hi - lo) > 1e-10 * std::max(std::abs(lo), std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (positive(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  r.value = 0.5 * (lo + hi);
  return r;
}

template <typename S>
CoercivityCertificate run_check(const StageModel& sm) {
  Recursion<S> rec(sm);
  CoercivityCertificate cert;
  cert.T = sm.T;
  cert.dt = sm.dt;
  cert.stages = sm.K;
  cert.tail_gain = sm.F;
  const SearchResult sr = critical_shift([&](double s) { return rec.positive(s); });
  cert.eps_hat_sq = sr.value;
  cert.saturated = sr.saturated;
  cert.eps_hat = std::copysign(std::sqrt(std::abs(sr.value)), sr.value);
  if (cert.eps_hat > cert.tol) {
    cert.verdict = CoercivityVerdict::coercive;
  } else if (cert.eps_hat < -cert.tol) {
    cert.verdict = CoercivityVerdict::not_coercive;
  } else {
    cert.verdict = CoercivityVerdict::nonstrict_only;
  }
  if (cert.verdict != CoercivityVerdict::not_coercive) return cert;

  // Witness: zero input up to the failing stage, the negative pivot
  // direction there, the stagewise-optimal continuation afterwards.
  std::vector<typename Recursion<S>::Mat> gains;
  typename Recursion<S>::Failure failure;
  if (rec.positive(0.0, &gains, &failure)) return cert;
  Eigen::SelfAdjointEigenSolver<Matrix> es(failure.pivot.template cast<Complex>());
  const Vector v = es.eigenvectors().col(0);

  const int n = sm.n;
  const int m = sm.m;
  SampledControl w;
  w.u = Matrix::Zero(sm.K, m);
  w.t.resize(sm.K);
  Vector x = Vector::Zero(n);
  double cost = 0.0;
  Vector z(n + m);
  for (int j = 0; j < sm.K; ++j) {
    w.t[j] = j * sm.dt;
    Vector u = Vector::Zero(m);
    if (j == failure.stage) {
      u = v;
    } else if (j > failure.stage) {
      u = -gains[j].template cast<Complex>() * x;
    }
    w.u.row(j) = u.transpose();
    z << x, u;
    cost += (z.adjoint() * sm.Qc * z)(0).real();
    x = sm.transition * z;
  }
  cost += (x.adjoint() * sm.tail_cost * x)(0).real();
  const double norm2 = sm.dt * w.u.squaredNorm();
  if (norm2 > 0.0) {
    w.u /= std::sqrt(norm2);
    cost /= norm2;
  }
  cert.witness = std::move(w);
  cert.witness_cost = cost;
  return cert;
}

double simpson(const std::vector<double>& f, double h) {
  const std::size_t K = f.size() - 1;
  if (K == 0) return 0.0;
  if (K % 2 != 0) {
    double s = 0.5 * (f.front() + f.back());
    for (std::size_t i = 1; i < K; ++i) s += f[i];
    return s * h;
  }
  double s = f.front() + f.back();
  for (std::size_t i = 1; i < K; ++i) s += (i % 2 ? 4.0 : 2.0) * f[i];
  return s * h / 3.0;
}

double quad_form(const Matrix& M, const Vector& x, const Vector& u) {
  Vector z(x.size() + u.size());
  z << x, u;
  return (z.adjoint() * M * z)(0).real();
}

// Minimum-energy control u(t) = sign * B* e^{A*(tau - t)} c from x(0) = x0,
// sampled together with the state via the exact augmented exponential.
struct Trajectory {
  SampledControl control;
  Matrix x;  // samples x n
};

Trajectory gramian_trajectory(const LinearPlant& plant, const Vector& x0,
                              const Vector& c, double sign, double tau,
                              int samples) {
  const Eigen::Index n = plant.states();
  const Eigen::Index m = plant.inputs();
  Matrix aug = Matrix::Zero(2 * n, 2 * n);
  aug.topLeftCorner(n, n) = plant.A;
  aug.topRightCorner(n, n) = sign * plant.B * plant.B.adjoint();
  aug.bottomRightCorner(n, n) = -plant.A.adjoint();
  const double h = tau / samples;
  const Matrix step = linmat::matexp(aug, h);
  Vector state(2 * n);
  state << x0, linmat::matexp(plant.A.adjoint(), tau) * c;
  Trajectory tr;
  tr.control.t.resize(samples + 1);
  tr.control.u.resize(samples + 1, m);
  tr.x.resize(samples + 1, n);
  for (int k = 0; k <= samples; ++k) {
    tr.control.t[k] = k * h;
    tr.x.row(k) = state.head(n).transpose();
    tr.control.u.row(k) = (sign * plant.B.adjoint() * state.tail(n)).transpose();
    state = step * state;
  }
  return tr;
}

// Steps of size ~dt over `length`, clamped to [minimum, 200000] and even.
int even_steps(double length, double dt, int minimum) {
  const double raw = std::ceil(length / dt - 1e-9);
  int k = static_cast<int>(std::clamp(raw, static_cast<double>(minimum), 200000.0));
  return k + (k % 2);
}

}  // namespace

const char* to_string(CoercivityVerdict v) {
  switch (v) {
    case CoercivityVerdict::coercive: return "coercive";
    case CoercivityVerdict::nonstrict_only: return "nonstrict_only";
    case CoercivityVerdict::not_coercive: return "not_coercive";
  }
  return "unknown";
}

void write_control_csv(std::ostream& os, const SampledControl& control) {
  os << 't';
  for (Eigen::Index i = 0; i < control.u.cols(); ++i) {
    os << ",re_u" << i << ",im_u" << i;
  }
  os << '\n';
  const auto old = os.precision(17);
  for (std::size_t k = 0; k < control.t.size(); ++k) {
    os << control.t[k];
    for (Eigen::Index i = 0; i < control.u.cols(); ++i) {
      const Complex v = control.u(static_cast<Eigen::Index>(k), i);
      os << ',' << v.real() << ',' << v.imag();
    }
    os << '\n';
  }
  os.precision(old);
}

Matrix tail_feedback(const LinearPlant& plant) {
  const CostWeight I = CostWeight::identity(plant.states(), plant.inputs());
  const RiccatiReport rep = riccati::solve_are(plant, I);
  if (!rep.P || rep.classification != Classification::stabilizing) {
    return stability::stabilize_det(plant);
  }
  return riccati::feedback(plant, I, *rep.P);
}

double decay_horizon(const LinearPlant& plant, const Matrix& F) {
  const Matrix Acl = plant.A + plant.B * F;
  double T = 1.0;
  while (T < 1e4 && linmat::matexp(Acl, T).norm() > 1e-8) T *= 2.0;
  return T;
}

double auto_horizon(const LinearPlant& plant) {
  return std::max(20.0, decay_horizon(plant, tail_feedback(plant)));
}

DiscretizedCost discretize_cost(const LinearPlant& plant, const CostWeight& M,
                                double T, double dt) {
  if (!stability::is_stabilizable_det(plant)) {
    throw Error(ErrorCode::precondition, "discretize_cost: (A, B) not stabilizable");
  }
  const Matrix F = tail_feedback(plant);
  const StageModel sm = build_model(plant, M, T, dt, F);
  const int n = sm.n;
  const int m = sm.m;
  const int dim = sm.K * m;
  if (dim > kDenseLimit) {
    throw Error(ErrorCode::invalid_argument,
                "discretize_cost: dense form limited to stages*m <= 4000");
  }
  DiscretizedCost dc;
  dc.T = sm.T;
  dc.dt = sm.dt;
  dc.stages = sm.K;
  dc.tail_gain = F;
  dc.hessian = Matrix::Zero(dim, dim);
  dc.state_map_gram = Matrix::Zero(dim, dim);
  Matrix X = Matrix::Zero(n, dim);  // x_j as a linear map of the stacked input
  Matrix Z(n + m, dim);
  for (int j = 0; j < sm.K; ++j) {
    Z.setZero();
    Z.topRows(n) = X;
    Z.block(n, j * m, m, m).setIdentity();
    dc.hessian += Z.adjoint() * sm.Qc * Z;
    dc.state_map_gram += Z.adjoint() * sm.Qx * Z;
    X = sm.transition * Z;
  }
  dc.hessian += X.adjoint() * sm.tail_cost * X;
  dc.state_map_gram += X.adjoint() * sm.tail_state * X;
  dc.hessian = linmat::hermitian_part(dc.hessian);
  dc.state_map_gram = linmat::hermitian_part(dc.state_map_gram);
  return dc;
}

CoercivityCertificate check_coercivity(const LinearPlant& plant,
                                       const CostWeight& M, double T, double dt) {
  if (M.states() != plant.states() || M.inputs() != plant.inputs()) {
    throw Error(ErrorCode::dimension_mismatch, "dimension mismatch: cost weight vs plant");
  }
  if (!stability::is_stabilizable_det(plant)) {
    throw Error(ErrorCode::precondition, "check_coercivity: (A, B) not stabilizable");
  }
  const Matrix F = tail_feedback(plant);
  if (T <= 0.0) T = std::max(20.0, decay_horizon(plant, F));
  const StageModel sm = build_model(plant, M, T, dt, F);
  const bool real = is_real(sm.transition) && is_real(sm.Qc) &&
                    is_real(sm.tail_cost) && is_real(sm.tail_state);
  return real ? run_check<double>(sm) : run_check<Complex>(sm);
}

SteeringControl steering_control(const LinearPlant& plant, const Vector& x_target,
                                 double tau, int samples) {
  if (x_target.size() != plant.states()) {
    throw Error(ErrorCode::dimension_mismatch, "dimension mismatch: x_target");
  }
  if (samples < 2) throw Error(ErrorCode::invalid_argument, "samples must be >= 2");
  samples += samples % 2;
  const Matrix P = linmat::finite_gramian(plant.A, plant.B, tau);
  const Matrix Pp = linmat::pinv(P);
  const Vector proj = x_target - P * (Pp * x_target);
  if (proj.norm() > 1e-8 * x_target.norm()) {
    throw Error(ErrorCode::precondition, "target outside controllable subspace");
  }
  const Vector y = linmat::matexp(plant.A, tau) * x_target;
  const Vector c = Pp * y;
  Trajectory tr = gramian_trajectory(plant, x_target, c, -1.0, tau, samples);
  SteeringControl out;
  out.energy = (y.adjoint() * c)(0).real();
  std::vector<double> f(samples + 1);
  for (int k = 0; k <= samples; ++k) f[k] = tr.control.u.row(k).squaredNorm();
  out.energy_quadrature = simpson(f, tau / samples);
  out.endpoint_error = tr.x.row(samples).norm();
  out.control = std::move(tr.control);
  return out;
}

SteeringControl reach_control(const LinearPlant& plant, const Vector& x_target,
                              double tau, int samples) {
  if (x_target.size() != plant.states()) {
    throw Error(ErrorCode::dimension_mismatch, "dimension mismatch: x_target");
  }
  if (samples < 2) throw Error(ErrorCode::invalid_argument, "samples must be >= 2");
  samples += samples % 2;
  const Matrix P = linmat::finite_gramian(plant.A, plant.B, tau);
  const Matrix Pp = linmat::pinv(P);
  if ((x_target - P * (Pp * x_target)).norm() > 1e-8 * x_target.norm()) {
    throw Error(ErrorCode::precondition, "target outside controllable subspace");
  }
  const Vector c = Pp * x_target;
  Trajectory tr = gramian_trajectory(plant, Vector::Zero(plant.states()), c, 1.0,
                                     tau, samples);
  SteeringControl out;
  out.energy = (x_target.adjoint() * c)(0).real();
  std::vector<double> f(samples + 1);
  for (int k = 0; k <= samples; ++k) f[k] = tr.control.u.row(k).squaredNorm();
  out.energy_quadrature = simpson(f, tau / samples);
  out.endpoint_error = (tr.x.row(samples).transpose() - x_target).norm();
  out.control = std::move(tr.control);
  return out;
}

namespace {

// Reach, one period and tail cost for a fixed reach time; tail samples are
// filled in by the caller.
WitnessControl witness_segments(const LinearPlant& plant, const Matrix& Mfull,
                                const WitnessControl& base, double reach, double dt) {
  const Eigen::Index n = plant.states();
  const Vector& eta = base.eta;
  const double omega = base.omega;
  WitnessControl w = base;
  w.reach_time = reach;

  // [0, reach]: minimum-energy transfer to xi.
  const int k1 = even_steps(reach, dt, 200);
  const Vector c = linmat::pinv(linmat::finite_gramian(plant.A, plant.B, reach)) * w.xi;
  Trajectory seg1 = gramian_trajectory(plant, Vector::Zero(n), c, 1.0, reach, k1);
  std::vector<double> f(k1 + 1);
  for (int k = 0; k <= k1; ++k) {
    f[k] = quad_form(Mfull, seg1.x.row(k).transpose(),
                     seg1.control.u.row(k).transpose());
  }
  const double seg1_cost = simpson(f, reach / k1);
  const Vector x1 = seg1.x.row(k1).transpose();
  w.u0_samples = std::move(seg1.control);

  // One period of the oscillatory segment. The input is
  //   u = eta e^{i omega (t-1)} + F (x - xi e^{i omega (t-1)}),
  // which equals the pure oscillation when x(1) = xi; the deviation from the
  // periodic solution is propagated under the stable closed loop, so the
  // reach error does not grow with unstable A over long periods.
  w.cycle_length = omega == 0.0 ? 1.0 : 2.0 * std::numbers::pi / std::abs(omega);
  const int k2 = even_steps(w.cycle_length, dt, 200);
  const double h = w.cycle_length / k2;
  const Complex iw(0.0, omega);
  const Matrix Acl = plant.A + plant.B * w.tail_gain;
  const Matrix step = linmat::matexp(Acl, h);
  Vector e = x1 - w.xi;
  Vector x = x1;
  f.assign(k2 + 1, 0.0);
  w.cycle_samples.t.resize(k2 + 1);
  w.cycle_samples.u.resize(k2 + 1, eta.size());
  for (int k = 0; k <= k2; ++k) {
    const Complex phase = std::exp(iw * (k * h));
    x = phase * w.xi + e;
    const Vector u = phase * eta + w.tail_gain * e;
    w.cycle_samples.t[k] = reach + k * h;
    w.cycle_samples.u.row(k) = u.transpose();
    f[k] = quad_form(Mfull, x, u);
    if (k < k2) e = step * e;
  }
  w.cycle_cost = simpson(f, h);
  w.slope = w.cycle_cost / w.cycle_length;
  w.periodicity_error = (x - x1).norm();

  // Tail: u = F x from the end state of the periodic segment.
  Matrix IF(n + plant.inputs(), n);
  IF << Matrix::Identity(n, n), w.tail_gain;
  const Matrix Ptail = linmat::solve_lyapunov(Acl, IF.adjoint() * Mfull * IF);
  const double tail_cost = (x.adjoint() * Ptail * x)(0).real();
  w.constant_cost = seg1_cost + tail_cost;
  w.end_state = x;
  return w;
}

}  // namespace

WitnessControl resonance_input(const LinearPlant& plant, const CostWeight& M,
                               double omega, const Vector& eta, int cycles,
                               double dt) {
  if (eta.size() != plant.inputs()) {
    throw Error(ErrorCode::dimension_mismatch, "dimension mismatch: eta");
  }
  if (cycles < 1) throw Error(ErrorCode::invalid_argument, "cycles must be >= 1");
  if (!(dt > 0.0)) throw Error(ErrorCode::invalid_argument, "dt must be > 0");
  const Eigen::Index n = plant.states();
  const Matrix Mfull = M.assembled();
  WitnessControl base;
  base.omega = omega;
  base.eta = eta;
  base.xi = frequency::transfer(plant, omega) * eta;
  {
    Vector z(n + eta.size());
    z << base.xi, eta;
    base.popov_value = (z.adjoint() * Mfull * z)(0).real();
  }
  base.tail_gain = tail_feedback(plant);

  // Reach time 1, lengthened when the constant cost would need more than
  // 100 cycles (ill-conditioned short-horizon Gramians). A candidate must
  // keep the cycle cost at its periodic value popov * period.
  WitnessControl w = witness_segments(plant, Mfull, base, 1.0, dt);
  const double periodic = base.popov_value * w.cycle_length;
  for (double reach : {2.0, 4.0, 8.0}) {
    if (!(w.constant_cost > 100.0 * std::abs(w.cycle_cost))) break;
    WitnessControl cand = witness_segments(plant, Mfull, base, reach, dt);
    if (std::abs(cand.cycle_cost - periodic) > 1e-2 * std::abs(periodic)) continue;
    if (cand.constant_cost < w.constant_cost) w = std::move(cand);
  }
  const Matrix Acl = plant.A + plant.B * w.tail_gain;
  const Vector& x = w.end_state;

  const double tail_len = decay_horizon(plant, w.tail_gain);
  const int k3 = std::min(4000, even_steps(tail_len, dt, 200));
  const Matrix tail_step = linmat::matexp(Acl, tail_len / k3);
  w.uinf_samples.t.resize(k3 + 1);
  w.uinf_samples.u.resize(k3 + 1, plant.inputs());
  Vector xt = x;
  for (int k = 0; k <= k3; ++k) {
    w.uinf_samples.t[k] = k * tail_len / k3;
    w.uinf_samples.u.row(k) = (w.tail_gain * xt).transpose();
    xt = tail_step * xt;
  }

  w.ramp_cycles = cycles;
  w.T_k = w.reach_time + cycles * w.cycle_length;
  w.total_cost = w.constant_cost + cycles * w.cycle_cost;
  return w;
}

WitnessControl resonance_witness(const LinearPlant& plant, const CostWeight& M,
                                 double omega, const Vector& eta, int cycles,
                                 double dt) {
  if (eta.size() != plant.inputs()) {
    throw Error(ErrorCode::dimension_mismatch, "dimension mismatch: eta");
  }
  const Matrix Phi = frequency::popov(plant, M, omega);
  const double value = (eta.adjoint() * Phi * eta)(0).real();
  if (!(value < 0.0)) {
    throw Error(ErrorCode::precondition, "eta not violating");
  }
  if (!stability::is_stabilizable_det(plant)) {
    throw Error(ErrorCode::precondition, "resonance_witness: (A, B) not stabilizable");
  }
  constexpr int kCap = 10000;
  WitnessControl w = resonance_input(plant, M, omega, eta, std::max(1, cycles), dt);
  int k = w.ramp_cycles;
  while (w.constant_cost + k * w.cycle_cost >= 0.0) {
    if (k >= kCap) {
      throw Error(ErrorCode::not_converged, "resonance witness: cycle cap exceeded");
    }
    k = std::min(kCap, 2 * k);
  }
  w.ramp_cycles = k;
  w.T_k = w.reach_time + k * w.cycle_length;
  w.total_cost = w.constant_cost + k * w.cycle_cost;
  return w;
}

SampledControl witness_timeline(const WitnessControl& w, std::size_t max_rows) {
  SampledControl out;
  const Eigen::Index m = w.eta.size();
  std::vector<std::pair<double, Vector>> rows;
  for (std::size_t k = 0; k + 1 < w.u0_samples.t.size(); ++k) {
    rows.emplace_back(w.u0_samples.t[k], w.u0_samples.u.row(k).transpose());
  }
  const std::size_t per_cycle = w.cycle_samples.t.size() - 1;
  const std::size_t middle = per_cycle * static_cast<std::size_t>(w.ramp_cycles);
  const std::size_t stride = std::max<std::size_t>(1, middle / std::max<std::size_t>(1, max_rows));
  for (std::size_t idx = 0; idx < middle; idx += stride) {
    const std::size_t cyc = idx / per_cycle;
    const std::size_t k = idx % per_cycle;
    rows.emplace_back(w.cycle_samples.t[k] + cyc * w.cycle_length,
                      w.cycle_samples.u.row(k).transpose());
  }
  for (std::size_t k = 0; k < w.uinf_samples.t.size(); ++k) {
    rows.emplace_back(w.T_k + w.uinf_samples.t[k], w.uinf_samples.u.row(k).transpose());
  }
  out.t.reserve(rows.size());
  out.u.resize(static_cast<Eigen::Index>(rows.size()), m);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.t.push_back(rows[i].first);
    out.u.row(static_cast<Eigen::Index>(i)) = rows[i].second.transpose();
  }
  return out;
}

double fourier_check(const LinearPlant& plant, const Matrix& input_samples,
                     const Matrix& state_samples, double T) {
  const Eigen::Index samples = state_samples.rows();
  if (samples < 3 || input_samples.rows() != samples) {
    throw Error(ErrorCode::invalid_argument, "fourier_check: sample counts differ");
  }
  if (state_samples.cols() != plant.states() || input_samples.cols() != plant.inputs()) {
    throw Error(ErrorCode::dimension_mismatch, "fourier_check: sample widths");
  }
  const Eigen::Index K = samples - 1;
  const double scale = std::max(1.0, state_samples.cwiseAbs().maxCoeff());
  if ((state_samples.row(0) - state_samples.row(K)).norm() > 1e-6 * scale) {
    throw Error(ErrorCode::precondition, "fourier_check: trajectory not periodic");
  }
  const Eigen::Index n = plant.states();
  const Eigen::Index kmax = K / 4;
  double worst = 0.0;
  for (Eigen::Index k = -kmax; k <= kmax; ++k) {
    Vector xi = Vector::Zero(n);
    Vector eta = Vector::Zero(plant.inputs());
    for (Eigen::Index j = 0; j < K; ++j) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>(k * j % K) / K;
      const Complex e(std::cos(angle), std::sin(angle));
      xi += e * state_samples.row(j).transpose();
      eta += e * input_samples.row(j).transpose();
    }
    xi /= static_cast<double>(K);
    eta /= static_cast<double>(K);
    const Complex iw(0.0, 2.0 * std::numbers::pi * k / T);
    const Vector r = (iw * Matrix::Identity(n, n) - plant.A) * xi - plant.B * eta;
    worst = std::max(worst, r.norm());
  }
  return worst;
}

}  // namespace kypc::coercivity
