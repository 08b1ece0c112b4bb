#include "kypc/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <thread>

#include "kypc/error.hpp"
#include "kypc/linmat.hpp"
#include "kypc/stability.hpp"

namespace kypc::sim {
namespace {

constexpr std::size_t kBlock = 64;  // units per reduction block
constexpr std::size_t kBatches = 20;
constexpr double kOverflow = 1e150;

double pairwise_sum(const double* v, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_sum(v, h) + pairwise_sum(v + h, n - h);
}

double pairwise_sum(const std::vector<double>& v) { return pairwise_sum(v.data(), v.size()); }

// Strided pairwise sum over v[off], v[off + stride], ...
double pairwise_sum_strided(const std::vector<double>& v, std::size_t off,
                            std::size_t stride, std::size_t n) {
  std::vector<double> tmp(n);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = v[off + i * stride];
  return pairwise_sum(tmp);
}

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Problem {
  std::size_t d = 0;     // realified dimension
  std::size_t cols = 0;  // initial states propagated per path
  std::vector<double> G;   // I + dt A_cl, row-major
  std::vector<double> Nm;  // N, row-major
  std::vector<double> Q;   // cost weight (empty: no cost)
  std::vector<double> X0;  // d x cols, column-major
  std::size_t steps = 0;
  double dt = 0.0;
  std::vector<std::size_t> record;  // recorded step indices
};

struct Blocks {
  std::size_t units = 0;
  std::size_t blocks = 0;
  std::size_t R = 0;
  std::vector<double> sum;    // blocks x R
  std::vector<double> sumsq;  // blocks x R
  std::vector<double> cost;   // per unit
  std::vector<std::size_t> valid;  // per block: records before overflow
};

std::vector<double> to_row_major(const Eigen::MatrixXd& X) {
  RowMajor R = X;
  return std::vector<double>(R.data(), R.data() + R.size());
}

Problem make_problem(const Matrix& Acl, const Matrix& N, const Matrix* Qc,
                     const Eigen::MatrixXd& X0, const SimConfig& cfg) {
  Problem p;
  const Eigen::MatrixXd A = realify(Acl);
  p.d = static_cast<std::size_t>(A.rows());
  p.cols = static_cast<std::size_t>(X0.cols());
  p.steps = static_cast<std::size_t>(std::llround(cfg.horizon / cfg.dt));
  p.dt = cfg.horizon / static_cast<double>(p.steps);
  p.G = to_row_major(Eigen::MatrixXd::Identity(A.rows(), A.cols()) + p.dt * A);
  p.Nm = to_row_major(realify(N));
  if (Qc) p.Q = to_row_major(realify(*Qc));
  p.X0.assign(X0.data(), X0.data() + X0.size());
  const std::size_t stride = std::max<std::size_t>(1, p.steps / std::max<std::size_t>(1, cfg.samples));
  for (std::size_t j = 0; j <= p.steps; j += stride) p.record.push_back(j);
  if (p.record.back() != p.steps) p.record.push_back(p.steps);
  return p;
}

class Worker {
 public:
  Worker(const Problem& p, bool antithetic)
      : p_(p), lanes_(antithetic ? 2 : 1),
        x_(lanes_, std::vector<double>(p.d * p.cols)),
        y_(p.d * p.cols), nx_(p.d * p.cols) {}

  // Simulates one unit; writes the unit value of |X|_F^2 at each record
  // (averaged over lanes) and returns the number of valid records.
  std::size_t run(std::uint64_t stream_seed, std::vector<double>& moments,
                  double& cost) {
    std::mt19937_64 gen(stream_seed);
    std::normal_distribution<double> normal(0.0, std::sqrt(p_.dt));
    for (auto& x : x_) x = p_.X0;
    std::vector<double> acc(lanes_, 0.0);
    std::vector<double> f_prev(lanes_, 0.0);
    for (std::size_t l = 0; l < lanes_; ++l) f_prev[l] = quad(x_[l]);
    std::size_t r = 0;
    const std::size_t R = p_.record.size();
    for (std::size_t j = 0;; ++j) {
      if (r < R && p_.record[r] == j) {
        double v = 0.0;
        for (const auto& x : x_) v += norm2(x);
        moments[r++] = v / static_cast<double>(lanes_);
      }
      if (j == p_.steps) break;
      const double dw = normal(gen);
      for (std::size_t l = 0; l < lanes_; ++l) {
        if (!step(x_[l], l == 0 ? dw : -dw)) {
          cost = std::numeric_limits<double>::infinity();
          return r;
        }
        const double f = quad(x_[l]);
        acc[l] += 0.5 * p_.dt * (f_prev[l] + f);
        f_prev[l] = f;
      }
    }
    double c = 0.0;
    for (double a : acc) c += a;
    cost = c / static_cast<double>(lanes_);
    return r;
  }

 private:
  bool step(std::vector<double>& x, double dw) {
    const std::size_t d = p_.d;
    bool ok = true;
    for (std::size_t c = 0; c < p_.cols; ++c) {
      const double* xc = &x[c * d];
      double* yc = &y_[c * d];
      for (std::size_t i = 0; i < d; ++i) {
        double g = 0.0;
        double n = 0.0;
        const double* Gi = &p_.G[i * d];
        const double* Ni = &p_.Nm[i * d];
        for (std::size_t k = 0; k < d; ++k) {
          g += Gi[k] * xc[k];
          n += Ni[k] * xc[k];
        }
        yc[i] = g + dw * n;
        if (!(std::abs(yc[i]) < kOverflow)) ok = false;
      }
    }
    x.swap(y_);
    return ok;
  }

  double norm2(const std::vector<double>& x) const {
    double s = 0.0;
    for (double v : x) s += v * v;
    return s;
  }

  double quad(const std::vector<double>& x) const {
    if (p_.Q.empty()) return 0.0;
    const std::size_t d = p_.d;
    double s = 0.0;
    for (std::size_t c = 0; c < p_.cols; ++c) {
      const double* xc = &x[c * d];
      for (std::size_t i = 0; i < d; ++i) {
        double qi = 0.0;
        for (std::size_t k = 0; k < d; ++k) qi += p_.Q[i * d + k] * xc[k];
        s += xc[i] * qi;
      }
    }
    return s;
  }

  const Problem& p_;
  std::size_t lanes_;
  std::vector<std::vector<double>> x_;
  std::vector<double> y_;
  std::vector<double> nx_;
};

Blocks run_blocks(const Problem& p, const SimConfig& cfg) {
  Blocks b;
  b.units = cfg.antithetic ? cfg.paths / 2 : cfg.paths;
  b.blocks = (b.units + kBlock - 1) / kBlock;
  b.R = p.record.size();
  b.sum.assign(b.blocks * b.R, 0.0);
  b.sumsq.assign(b.blocks * b.R, 0.0);
  b.cost.assign(b.units, 0.0);
  b.valid.assign(b.blocks, b.R);

  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    Worker w(p, cfg.antithetic);
    std::vector<double> m(b.R);
    std::vector<double> vals;
    for (;;) {
      const std::size_t blk = next.fetch_add(1);
      if (blk >= b.blocks) break;
      const std::size_t first = blk * kBlock;
      const std::size_t last = std::min(b.units, first + kBlock);
      vals.assign((last - first) * b.R, 0.0);
      std::size_t valid = b.R;
      for (std::size_t u = first; u < last; ++u) {
        std::fill(m.begin(), m.end(), 0.0);
        const std::size_t v = w.run(mix64(cfg.seed, u), m, b.cost[u]);
        valid = std::min(valid, v);
        std::copy(m.begin(), m.end(), vals.begin() + (u - first) * b.R);
      }
      const std::size_t cnt = last - first;
      for (std::size_t r = 0; r < b.R; ++r) {
        b.sum[blk * b.R + r] = pairwise_sum_strided(vals, r, b.R, cnt);
        std::vector<double> sq(cnt);
        for (std::size_t i = 0; i < cnt; ++i) sq[i] = vals[i * b.R + r] * vals[i * b.R + r];
        b.sumsq[blk * b.R + r] = pairwise_sum(sq);
      }
      b.valid[blk] = valid;
    }
  };
  unsigned threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, b.blocks));
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  return b;
}

std::size_t valid_records(const Blocks& b) {
  return b.valid.empty() ? b.R : *std::min_element(b.valid.begin(), b.valid.end());
}

MomentTrajectory moments_from(const Problem& p, const Blocks& b) {
  MomentTrajectory out;
  const std::size_t R = valid_records(b);
  out.exploded = R < b.R;
  out.paths_used = b.units;
  const double units = static_cast<double>(b.units);
  for (std::size_t r = 0; r < R; ++r) {
    const double s = pairwise_sum_strided(b.sum, r, b.R, b.blocks);
    const double s2 = pairwise_sum_strided(b.sumsq, r, b.R, b.blocks);
    const double mean = s / units;
    const double var = std::max(0.0, (s2 - units * mean * mean) / std::max(1.0, units - 1.0));
    out.t.push_back(static_cast<double>(p.record[r]) * p.dt);
    out.second_moment.push_back(mean);
    out.half_width.push_back(1.96 * std::sqrt(var / units));
  }
  return out;
}

double ls_slope(const std::vector<double>& t, const std::vector<double>& y) {
  const double n = static_cast<double>(t.size());
  double st = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    st += t[i];
    sy += y[i];
  }
  const double mt = st / n;
  const double my = sy / n;
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    num += (t[i] - mt) * (y[i] - my);
    den += (t[i] - mt) * (t[i] - mt);
  }
  return num / den;
}

Matrix closed_loop(const StochPlant& plant, const Matrix& F) {
  if (F.rows() != plant.inputs() || F.cols() != plant.states()) {
    throw Error(ErrorCode::dimension_mismatch, "dimension mismatch: F");
  }
  return plant.A + plant.B * F;
}

}  // namespace

void validate(const SimConfig& cfg) {
  if (!(cfg.dt > 0.0) || !(cfg.horizon >= 100.0 * cfg.dt * (1.0 - 1e-12))) {
    throw Error(ErrorCode::invalid_argument, "simulation needs dt > 0 and horizon >= 100 dt");
  }
  if (cfg.paths < 2 || (cfg.antithetic && cfg.paths % 2 != 0)) {
    throw Error(ErrorCode::invalid_argument,
                "simulation needs paths >= 2 (even with antithetic pairs)");
  }
}

std::uint64_t mix64(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Eigen::MatrixXd realify(const Matrix& X) {
  const Eigen::Index r = X.rows();
  const Eigen::Index c = X.cols();
  Eigen::MatrixXd out(2 * r, 2 * c);
  out << X.real(), -X.imag(), X.imag(), X.real();
  return out;
}

Eigen::VectorXd realify(const Vector& x) {
  Eigen::VectorXd out(2 * x.size());
  out << x.real(), x.imag();
  return out;
}

MomentTrajectory simulate(const StochPlant& plant, const Matrix& F,
                          const Vector& x0, const SimConfig& cfg) {
  validate(cfg);
  if (x0.size() != plant.states()) {
    throw Error(ErrorCode::dimension_mismatch, "dimension mismatch: x0");
  }
  const Problem p = make_problem(closed_loop(plant, F), plant.N, nullptr,
                                 realify(x0), cfg);
  return moments_from(p, run_blocks(p, cfg));
}

CostEstimate estimate_cost(const StochPlant& plant, const Matrix& F,
                           const Matrix& W, const Vector& x0,
                           const SimConfig& cfg) {
  validate(cfg);
  if (x0.size() != plant.states()) {
    throw Error(ErrorCode::dimension_mismatch, "dimension mismatch: x0");
  }
  if (W.rows() != plant.states() || W.cols() != plant.states()) {
    throw Error(ErrorCode::dimension_mismatch, "dimension mismatch: W");
  }
  const Matrix Acl = closed_loop(plant, F);
  const Matrix Qc = linmat::hermitian_part(W + F.adjoint() * F);
  const Problem p = make_problem(Acl, plant.N, &Qc, realify(x0), cfg);
  const Blocks b = run_blocks(p, cfg);

  CostEstimate est;
  est.paths_used = b.units;
  est.unstable = !(stability::ms_abscissa(Acl, plant.N) < 0.0);
  est.exploded = valid_records(b) < b.R;
  if (est.exploded) {
    est.mean = std::numeric_limits<double>::infinity();
    est.half_width = std::numeric_limits<double>::infinity();
    return est;
  }
  const double units = static_cast<double>(b.units);
  est.mean = pairwise_sum(b.cost) / units;
  std::vector<double> dev(b.units);
  for (std::size_t i = 0; i < b.units; ++i) dev[i] = (b.cost[i] - est.mean) * (b.cost[i] - est.mean);
  est.half_width = 1.96 * std::sqrt(pairwise_sum(dev) / std::max(1.0, units - 1.0) / units);
  if (!est.unstable) {
    const Matrix PQ = linmat::solve_glyap(Acl, plant.N, Qc);
    const Matrix L = stability::ms_lift(Acl, plant.N);
    const Vector s = linmat::matexp(L, cfg.horizon) * linmat::vec(x0 * x0.adjoint());
    const Matrix Sigma = linmat::unvec(s, plant.states(), plant.states());
    est.truncation = (PQ * Sigma).trace().real();
  } else {
    est.truncation = std::numeric_limits<double>::infinity();
  }
  return est;
}

MsCheck empirical_ms_check(const StochPlant& plant, const Matrix& F,
                           const SimConfig& cfg) {
  validate(cfg);
  const Matrix Acl = closed_loop(plant, F);
  const Eigen::Index n = plant.states();
  // Columns: realified canonical basis of C^n.
  const Eigen::MatrixXd X0 = realify(Matrix(Matrix::Identity(n, n))).leftCols(n);
  const Problem p = make_problem(Acl, plant.N, nullptr, X0, cfg);
  const Blocks b = run_blocks(p, cfg);

  MsCheck out;
  out.reference = stability::ms_abscissa(Acl, plant.N);
  const MomentTrajectory m = moments_from(p, b);
  out.exploded = m.exploded;
  std::vector<double> t;
  std::vector<double> y;
  std::vector<std::size_t> idx;
  const double t_last = m.t.empty() ? 0.0 : m.t.back();
  for (std::size_t r = 0; r < m.t.size(); ++r) {
    if (m.t[r] >= 0.5 * t_last && m.second_moment[r] > 0.0) {
      t.push_back(m.t[r]);
      y.push_back(std::log(m.second_moment[r]));
      idx.push_back(r);
    }
  }
  if (t.size() < 2) return out;
  out.decay_rate_estimate = ls_slope(t, y);

  // Batch means over contiguous groups of blocks.
  const std::size_t batches = std::min(kBatches, b.blocks);
  if (batches >= 2) {
    std::vector<double> slopes;
    for (std::size_t k = 0; k < batches; ++k) {
      const std::size_t lo = k * b.blocks / batches;
      const std::size_t hi = (k + 1) * b.blocks / batches;
      const double units = static_cast<double>(
          std::min(b.units, hi * kBlock) - lo * kBlock);
      std::vector<double> yb;
      for (std::size_t r : idx) {
        std::vector<double> part;
        for (std::size_t blk = lo; blk < hi; ++blk) part.push_back(b.sum[blk * b.R + r]);
        yb.push_back(std::log(std::max(pairwise_sum(part) / units, 1e-300)));
      }
      slopes.push_back(ls_slope(t, yb));
    }
    double mean = pairwise_sum(slopes) / static_cast<double>(batches);
    double var = 0.0;
    for (double s : slopes) var += (s - mean) * (s - mean);
    var /= static_cast<double>(batches - 1);
    out.half_width = 1.96 * std::sqrt(var / static_cast<double>(batches));
  }
  out.stable = out.decay_rate_estimate + out.half_width < 0.0;
  return out;
}

void write_moments_csv(std::ostream& os, const MomentTrajectory& m) {
  os << "t,second_moment,half_width\n";
  const auto old = os.precision(17);
  for (std::size_t i = 0; i < m.t.size(); ++i) {
    os << m.t[i] << ',' << m.second_moment[i] << ',' << m.half_width[i] << '\n';
  }
  os.precision(old);
}

}  // namespace kypc::sim
