#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "kypc/types.hpp"

namespace kypc::frequency {

/// Grid knobs. The default grid is {0} together with `points / 2`
/// log-spaced values on each half-line, |omega| in [min_omega, max_omega].
/// After the first pass the grid is refined around the minimizers of
/// lambda_min(Phi) and of the strict-margin ratio: each round splits the two
/// neighbouring intervals `refine_factor` ways.
struct GridOptions {
  int points = 2048;
  double min_omega = 1e-3;
  double max_omega = 1e3;
  int refine_factor = 4;
  int refine_rounds = 6;
};

/// Tolerance below which lambda_min(Phi) counts as a violation.
inline constexpr double kNonstrictTol = 1e-9;
/// Regularization of G*G in the generalized eigenvalue problem.
inline constexpr double kGramReg = 1e-14;

std::vector<double> default_grid(const GridOptions& opts = {});

/// G(omega) = (i omega I - A)^{-1} B. Throws Error(pole_on_grid) when
/// min |i omega - lambda| <= 1e-9 over the spectrum of A.
Matrix transfer(const LinearPlant& plant, double omega);

/// Popov function Phi(omega) = [G; I]* M [G; I].
Matrix popov(const LinearPlant& plant, const CostWeight& M, double omega);

/// Largest e2 with Phi(omega) - e2 G*G >= 0 at a single frequency.
double strict_ratio(const LinearPlant& plant, const CostWeight& M, double omega);

struct Nudge {
  double requested = 0.0;
  double used = 0.0;
};

struct FrequencyScan {
  std::vector<double> grid;      // strictly increasing
  std::vector<double> min_eigs;  // lambda_min(Phi(omega))
  std::vector<double> ratios;    // strict_ratio per grid point
  bool nonstrict_ok = false;
  std::optional<double> strict_margin;  // nullopt = "fails"
  double min_eig = 0.0;
  double argmin_omega = 0.0;
  Vector argmin_eta;  // unit eigenvector for min_eig
  double strict_argmin_omega = 0.0;
  double resolution = 0.0;  // relative grid spacing at the strict argmin
  std::vector<Nudge> nudges;
};

/// Scans the nonstrict condition on `grid` (sorted, poles nudged by 1e-6),
/// optionally refining around the minimizers.
FrequencyScan fdc_scan(const LinearPlant& plant, const CostWeight& M,
                       std::vector<double> grid, const GridOptions& opts = {},
                       bool refine = true);
FrequencyScan fdc_scan(const LinearPlant& plant, const CostWeight& M,
                       const GridOptions& opts = {});

/// Largest eps >= 0 with Phi(omega) >= eps^2 G*G on the grid; nullopt when
/// the nonstrict condition already fails.
std::optional<double> strict_margin(const LinearPlant& plant, const CostWeight& M,
                                    std::vector<double> grid,
                                    const GridOptions& opts = {});

/// Absolute floor of the boundary band.
inline constexpr double kBoundaryFloor = 1e-6;

/// True when the scan sits on the strict/nonstrict boundary, where the
/// grid cannot separate the cases: a strict margin at most
/// max(1e-6, 10 * resolution), or a violation with lambda_min >= -1e-6.
bool in_boundary_band(const FrequencyScan& scan);

/// M_eps = M - diag(eps^2 I, 0).
CostWeight shift_weight(const CostWeight& M, double eps);

/// Writes "omega,min_eig" rows.
void write_csv(std::ostream& os, const FrequencyScan& scan);

}  // namespace kypc::frequency
