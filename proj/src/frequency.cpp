#include "kypc/frequency.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "kypc/error.hpp"
#include "kypc/linmat.hpp"

namespace kypc::frequency {
namespace {

constexpr double kPoleTol = 1e-9;
constexpr double kNudge = 1e-6;

void check_dims(const LinearPlant& plant, const CostWeight& M) {
  if (M.states() != plant.states() || M.inputs() != plant.inputs()) {
    throw Error(ErrorCode::dimension_mismatch,
                "dimension mismatch: cost weight vs plant");
  }
}

double pole_distance(const Vector& spectrum, double omega) {
  double d = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < spectrum.size(); ++i) {
    d = std::min(d, std::abs(Complex(0.0, omega) - spectrum(i)));
  }
  return d;
}

[[noreturn]] void throw_pole(const Vector& spectrum, double omega) {
  Complex worst;
  double d = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < spectrum.size(); ++i) {
    const double di = std::abs(Complex(0.0, omega) - spectrum(i));
    if (di < d) {
      d = di;
      worst = spectrum(i);
    }
  }
  std::ostringstream os;
  os << "pole on grid: omega=" << omega << " hits eigenvalue " << worst.real()
     << (worst.imag() < 0 ? "-" : "+") << std::abs(worst.imag()) << "i";
  throw Error(ErrorCode::pole_on_grid, os.str());
}

Matrix transfer_unchecked(const LinearPlant& plant, double omega) {
  const Eigen::Index n = plant.states();
  const Matrix S = Complex(0.0, omega) * Matrix::Identity(n, n) - plant.A;
  return S.partialPivLu().solve(plant.B);
}

Matrix popov_from_transfer(const CostWeight& M, const Matrix& G) {
  const Matrix VG = M.V * G;
  return linmat::hermitian_part(G.adjoint() * M.W * G + VG + VG.adjoint() + M.R);
}

// Largest e2 with Phi - e2 H >= 0 for H = G*G + reg I, via H = U D U*.
double pencil_min(const Matrix& Phi, const Matrix& G) {
  const Eigen::Index m = Phi.rows();
  const Matrix H = linmat::hermitian_part(G.adjoint() * G) +
                   kGramReg * Matrix::Identity(m, m);
  Eigen::SelfAdjointEigenSolver<Matrix> es(H);
  const Eigen::VectorXd d = es.eigenvalues().cwiseMax(kGramReg).cwiseSqrt().cwiseInverse();
  const Matrix T = es.eigenvectors() * d.cast<Complex>().asDiagonal();
  return linmat::min_hermitian_eigenvalue(T.adjoint() * Phi * T);
}

struct Sample {
  double omega_used = 0.0;
  double min_eig = 0.0;
  double ratio = 0.0;
  Vector eta;
};

class Scanner {
 public:
  Scanner(const LinearPlant& plant, const CostWeight& M)
      : plant_(plant), M_(M), spectrum_(linmat::eigenvalues(plant.A)) {}

  const Vector& spectrum() const { return spectrum_; }

  // Returns the (possibly nudged) frequency actually evaluated.
  void add(double omega, std::vector<Nudge>& nudges) {
    if (samples_.count(omega)) return;
    double used = omega;
    if (pole_distance(spectrum_, omega) <= kPoleTol) {
      used = omega + kNudge;
      if (pole_distance(spectrum_, used) <= kPoleTol) used = omega - kNudge;
      if (pole_distance(spectrum_, used) <= kPoleTol) throw_pole(spectrum_, omega);
      nudges.push_back({omega, used});
      if (samples_.count(used)) return;
    }
    const Matrix G = transfer_unchecked(plant_, used);
    const Matrix Phi = popov_from_transfer(M_, G);
    Eigen::SelfAdjointEigenSolver<Matrix> es(Phi);
    Sample s;
    s.omega_used = used;
    s.min_eig = es.eigenvalues()(0);
    s.eta = es.eigenvectors().col(0);
    s.ratio = pencil_min(Phi, G);
    samples_.emplace(used, std::move(s));
  }

  const std::map<double, Sample>& samples() const { return samples_; }

 private:
  const LinearPlant& plant_;
  const CostWeight& M_;
  Vector spectrum_;
  std::map<double, Sample> samples_;
};

template <typename Key>
std::map<double, Sample>::const_iterator argmin(const std::map<double, Sample>& s,
                                                Key key) {
  auto best = s.begin();
  for (auto it = s.begin(); it != s.end(); ++it) {
    if (key(it->second) < key(best->second)) best = it;
  }
  return best;
}

void refine_around(Scanner& scanner, std::map<double, Sample>::const_iterator it,
                   int factor, std::vector<Nudge>& nudges) {
  const auto& samples = scanner.samples();
  std::vector<double> fresh;
  auto split = [&](double a, double b) {
    for (int k = 1; k < factor; ++k) fresh.push_back(a + (b - a) * k / factor);
  };
  if (it != samples.begin()) split(std::prev(it)->first, it->first);
  if (std::next(it) != samples.end()) split(it->first, std::next(it)->first);
  for (double w : fresh) scanner.add(w, nudges);
}

}  // namespace

std::vector<double> default_grid(const GridOptions& opts) {
  if (opts.points < 2 || !(opts.min_omega > 0.0) ||
      !(opts.max_omega > opts.min_omega)) {
    throw Error(ErrorCode::invalid_argument, "invalid frequency grid options");
  }
  const int side = opts.points / 2;
  const double lo = std::log10(opts.min_omega);
  const double hi = std::log10(opts.max_omega);
  std::vector<double> grid;
  grid.reserve(2 * side + 1);
  for (int k = side - 1; k >= 0; --k) {
    grid.push_back(-std::pow(10.0, lo + (hi - lo) * k / std::max(1, side - 1)));
  }
  grid.push_back(0.0);
  for (int k = 0; k < side; ++k) {
    grid.push_back(std::pow(10.0, lo + (hi - lo) * k / std::max(1, side - 1)));
  }
  return grid;
}

Matrix transfer(const LinearPlant& plant, double omega) {
  const Vector spectrum = linmat::eigenvalues(plant.A);
  if (pole_distance(spectrum, omega) <= kPoleTol) throw_pole(spectrum, omega);
  return transfer_unchecked(plant, omega);
}

Matrix popov(const LinearPlant& plant, const CostWeight& M, double omega) {
  check_dims(plant, M);
  return popov_from_transfer(M, transfer(plant, omega));
}

double strict_ratio(const LinearPlant& plant, const CostWeight& M, double omega) {
  check_dims(plant, M);
  const Matrix G = transfer(plant, omega);
  return pencil_min(popov_from_transfer(M, G), G);
}

FrequencyScan fdc_scan(const LinearPlant& plant, const CostWeight& M,
                       std::vector<double> grid, const GridOptions& opts,
                       bool refine) {
  check_dims(plant, M);
  if (grid.empty()) {
    throw Error(ErrorCode::invalid_argument, "fdc_scan: empty grid");
  }
  FrequencyScan scan;
  Scanner scanner(plant, M);
  for (double w : grid) {
    if (!std::isfinite(w)) {
      throw Error(ErrorCode::invalid_argument, "fdc_scan: non-finite grid value");
    }
    scanner.add(w, scan.nudges);
  }
  if (refine) {
    // Resolve the neighbourhood of lightly damped modes explicitly.
    const Vector& spec = scanner.spectrum();
    for (Eigen::Index i = 0; i < spec.size(); ++i) {
      if (std::abs(spec(i).real()) > 1e-3) continue;
      for (double off = 1e-2; off >= 1e-6; off /= 10.0) {
        scanner.add(spec(i).imag() + off, scan.nudges);
        scanner.add(spec(i).imag() - off, scan.nudges);
      }
    }
    for (int round = 0; round < opts.refine_rounds; ++round) {
      const auto& s = scanner.samples();
      const double a = argmin(s, [](const Sample& x) { return x.min_eig; })->first;
      const double b = argmin(s, [](const Sample& x) { return x.ratio; })->first;
      refine_around(scanner, s.find(a), opts.refine_factor, scan.nudges);
      refine_around(scanner, scanner.samples().find(b), opts.refine_factor,
                    scan.nudges);
    }
  }

  const auto& samples = scanner.samples();
  scan.grid.reserve(samples.size());
  for (const auto& [w, s] : samples) {
    scan.grid.push_back(w);
    scan.min_eigs.push_back(s.min_eig);
    scan.ratios.push_back(s.ratio);
  }
  const auto lo = argmin(samples, [](const Sample& x) { return x.min_eig; });
  scan.min_eig = lo->second.min_eig;
  scan.argmin_omega = lo->first;
  scan.argmin_eta = lo->second.eta;
  const auto rlo = argmin(samples, [](const Sample& x) { return x.ratio; });
  scan.strict_argmin_omega = rlo->first;
  {
    double gap = 0.0;
    if (rlo != samples.begin()) gap = std::max(gap, rlo->first - std::prev(rlo)->first);
    if (std::next(rlo) != samples.end()) {
      gap = std::max(gap, std::next(rlo)->first - rlo->first);
    }
    scan.resolution = gap / std::max(std::abs(rlo->first), opts.min_omega);
  }
  scan.nonstrict_ok = scan.min_eig >= -kNonstrictTol;
  if (scan.nonstrict_ok) {
    scan.strict_margin = std::sqrt(std::max(0.0, rlo->second.ratio));
  }
  return scan;
}

FrequencyScan fdc_scan(const LinearPlant& plant, const CostWeight& M,
                       const GridOptions& opts) {
  return fdc_scan(plant, M, default_grid(opts), opts, true);
}

std::optional<double> strict_margin(const LinearPlant& plant, const CostWeight& M,
                                    std::vector<double> grid,
                                    const GridOptions& opts) {
  return fdc_scan(plant, M, std::move(grid), opts, true).strict_margin;
}

bool in_boundary_band(const FrequencyScan& scan) {
  if (scan.strict_margin) {
    return *scan.strict_margin <= std::max(kBoundaryFloor, 10.0 * scan.resolution);
  }
  return scan.min_eig >= -kBoundaryFloor;
}

CostWeight shift_weight(const CostWeight& M, double eps) {
  if (!(eps >= 0.0)) {
    throw Error(ErrorCode::invalid_argument, "shift_weight: eps must be >= 0");
  }
  CostWeight out = M;
  out.W -= Complex(eps * eps, 0.0) * Matrix::Identity(M.states(), M.states());
  return out;
}

void write_csv(std::ostream& os, const FrequencyScan& scan) {
  os << "omega,min_eig\n";
  const auto old = os.precision(17);
  for (std::size_t i = 0; i < scan.grid.size(); ++i) {
    os << scan.grid[i] << ',' << scan.min_eigs[i] << '\n';
  }
  os.precision(old);
}

}  // namespace kypc::frequency
