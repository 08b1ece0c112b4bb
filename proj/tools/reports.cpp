#include "reports.hpp"

#include <cmath>

#include "kypc/error.hpp"
#include "kypc/linmat.hpp"
#include "kypc/stability.hpp"

namespace kypc::report {
namespace {

std::string frequency_class(const frequency::FrequencyScan& s) {
  if (!s.nonstrict_ok) return "fails";
  if (s.strict_margin && *s.strict_margin > frequency::kBoundaryFloor) return "strict";
  return "nonstrict_only";
}

}  // namespace

json matrix(const Matrix& X) { return io::emit_matrix(X); }

json vector(const Vector& x) {
  json out = json::array();
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    out.push_back(x(i).imag() == 0.0 ? json(x(i).real())
                                     : json::array({x(i).real(), x(i).imag()}));
  }
  return out;
}

json riccati(const RiccatiReport& r) {
  json j;
  j["classification"] = to_string(r.classification);
  j["residual"] = r.residual;
  j["closed_loop_measure"] = r.closed_loop_measure;
  j["iterations"] = r.iterations;
  j["note"] = r.note;
  j["P"] = r.P ? matrix(*r.P) : json(nullptr);
  return j;
}

json frequency_scan(const frequency::FrequencyScan& s, const frequency::GridOptions& g) {
  json j;
  j["grid"] = {{"points", g.points},
               {"min_omega", g.min_omega},
               {"max_omega", g.max_omega},
               {"refine_factor", g.refine_factor},
               {"refine_rounds", g.refine_rounds},
               {"evaluated", s.grid.size()}};
  j["nonstrict_ok"] = s.nonstrict_ok;
  j["min_eig"] = s.min_eig;
  j["argmin_omega"] = s.argmin_omega;
  j["argmin_eta"] = vector(s.argmin_eta);
  j["strict_margin"] = s.strict_margin ? json(*s.strict_margin) : json(nullptr);
  j["strict_argmin_omega"] = s.strict_argmin_omega;
  j["resolution"] = s.resolution;
  j["boundary_band"] = frequency::in_boundary_band(s);
  json nudges = json::array();
  for (const auto& n : s.nudges) nudges.push_back({{"requested", n.requested}, {"used", n.used}});
  j["nudges"] = nudges;
  return j;
}

json coercivity(const coercivity::CoercivityCertificate& c) {
  json j;
  j["verdict"] = to_string(c.verdict);
  j["eps_hat"] = c.eps_hat;
  j["eps_hat_sq"] = c.eps_hat_sq;
  j["horizon"] = c.T;
  j["dt"] = c.dt;
  j["stages"] = c.stages;
  j["tol"] = c.tol;
  j["saturated"] = c.saturated;
  j["tail_gain"] = matrix(c.tail_gain);
  j["witness_cost"] = c.witness ? json(c.witness_cost) : json(nullptr);
  return j;
}

json witness(const coercivity::WitnessControl& w) {
  json j;
  j["omega"] = w.omega;
  j["eta"] = vector(w.eta);
  j["xi"] = vector(w.xi);
  j["cycles"] = w.ramp_cycles;
  j["T_k"] = w.T_k;
  j["cycle_length"] = w.cycle_length;
  j["cycle_cost"] = w.cycle_cost;
  j["slope"] = w.slope;
  j["popov_value"] = w.popov_value;
  j["constant_cost"] = w.constant_cost;
  j["total_cost"] = w.total_cost;
  j["periodicity_error"] = w.periodicity_error;
  j["tail_gain"] = matrix(w.tail_gain);
  return j;
}

json cost_estimate(const sim::CostEstimate& e, const sim::SimConfig& cfg) {
  json j;
  j["mean"] = e.mean;
  j["half_width"] = e.half_width;
  j["paths_used"] = e.paths_used;
  j["truncation"] = e.truncation;
  j["exploded"] = e.exploded;
  j["unstable"] = e.unstable;
  j["config"] = {{"dt", cfg.dt},
                 {"horizon", cfg.horizon},
                 {"paths", cfg.paths},
                 {"seed", cfg.seed},
                 {"antithetic", cfg.antithetic}};
  return j;
}

json analyze_det(const io::SystemBundle& b, const DetOptions& opts) {
  const LinearPlant plant = b.plant();
  const CostWeight& M = b.cost;
  json out;
  out["command"] = "analyze-det";
  out["system"] = {{"name", b.name}, {"states", plant.states()}, {"inputs", plant.inputs()}};
  out["tolerances"] = {{"nonstrict", frequency::kNonstrictTol},
                       {"gram_regularization", frequency::kGramReg},
                       {"boundary_floor", frequency::kBoundaryFloor},
                       {"stable_band", riccati::kStableBand},
                       {"almost_band", riccati::kAlmostBand},
                       {"coercivity_regularization", 1e-12}};
  out["stabilizable"] = stability::is_stabilizable_det(plant);
  out["spectral_abscissa"] = stability::spectral_abscissa(plant.A);

  const auto scan = frequency::fdc_scan(plant, M, frequency::default_grid(opts.grid),
                                        opts.grid, true);
  const RiccatiReport are = riccati::solve_are(plant, M);
  const auto cert = coercivity::check_coercivity(plant, M, opts.horizon, opts.dt);
  out["frequency"] = frequency_scan(scan, opts.grid);
  out["riccati"] = riccati(are);
  out["coercivity"] = coercivity(cert);

  const std::string fclass = frequency_class(scan);
  const bool band = frequency::in_boundary_band(scan);
  const bool time_nonstrict = cert.verdict != coercivity::CoercivityVerdict::not_coercive;
  const bool are_strict = are.classification == Classification::stabilizing;
  const bool are_nonstrict = are_strict || are.classification == Classification::almost_stabilizing;
  const bool nonstrict_agree = scan.nonstrict_ok == time_nonstrict;
  const bool strict_agree = (fclass == "strict") == are_strict;
  const bool riccati_nonstrict_agree = scan.nonstrict_ok == are_nonstrict;
  json cc;
  cc["frequency_class"] = fclass;
  cc["riccati_class"] = to_string(are.classification);
  cc["coercivity_verdict"] = to_string(cert.verdict);
  cc["nonstrict_frequency_vs_time"] = nonstrict_agree;
  cc["strict_frequency_vs_riccati"] = strict_agree;
  cc["nonstrict_frequency_vs_riccati"] = riccati_nonstrict_agree;
  cc["boundary_band"] = band;
  if (scan.strict_margin) {
    cc["margin_difference"] = std::abs(*scan.strict_margin - cert.eps_hat);
  }
  const bool all = nonstrict_agree && strict_agree && riccati_nonstrict_agree;
  cc["verdict"] = all ? "consistent" : (band ? "boundary" : "inconsistent");
  out["cross_check"] = cc;
  return out;
}

json analyze_stoch(const io::SystemBundle& b) {
  const StochPlant plant = b.stoch_plant();
  json out;
  out["command"] = "analyze-stoch";
  out["system"] = {{"name", b.name}, {"states", plant.states()}, {"inputs", plant.inputs()}};
  if (b.cost.V.size() != 0 && b.cost.V.norm() != 0.0) {
    throw Error(ErrorCode::schema, "schema: stochastic cost takes W and R only");
  }
  out["tolerances"] = {{"stable_band", riccati::kStableBand},
                       {"almost_band", riccati::kAlmostBand},
                       {"gain_bracket", {1e-6, 1e6}},
                       {"gain_rel_tol", 1e-10},
                       {"boundary_band", 1e-6}};
  json ms;
  ms["open_loop_ms_abscissa"] = stability::ms_abscissa(plant.A, plant.N);
  ms["drift_spectral_abscissa"] = stability::spectral_abscissa(plant.A);
  const auto F = stability::certify_stabilizable_stoch(plant);
  ms["stabilizability_certified"] = F.has_value();
  if (F) {
    ms["certificate_gain"] = matrix(*F);
    ms["certificate_ms_abscissa"] = stability::ms_abscissa(plant.A + plant.B * *F, plant.N);
  }
  out["mean_square"] = ms;
  if (!F) {
    throw Error(ErrorCode::precondition, "mean-square stabilizability not certified");
  }

  const auto rep = stoch_lq::coercivity_stoch(plant, b.cost.W, b.cost.R);
  json c;
  c["verdict"] = to_string(rep.verdict);
  c["input_transform"] = rep.input_transform;
  c["W1"] = matrix(rep.W1);
  c["W2"] = matrix(rep.W2);
  c["P1"] = matrix(rep.P1);
  c["P2"] = rep.P2 ? matrix(*rep.P2) : json(nullptr);
  c["P"] = rep.stabilizing_P ? matrix(*rep.stabilizing_P) : json(nullptr);
  c["closed_loop_ms_abscissa"] = rep.closed_loop_ms_abscissa;
  c["bounded_real_gain"] = rep.bounded_real_gain;
  c["delta"] = rep.delta ? json(*rep.delta) : json(nullptr);
  c["gamma"] = rep.gamma;
  c["gamma_upper_bound_only"] = rep.gamma_upper_bound_only;
  c["eps"] = rep.eps ? json(*rep.eps) : json(nullptr);
  c["composition_residual"] = rep.P2 ? json(rep.composition_residual) : json(nullptr);
  out["coercivity"] = c;

  // The direct solve works on the normalized input matrix.
  StochPlant normalized = plant;
  if (b.cost.R.size() != 0) {
    const Matrix L = b.cost.R.llt().matrixL();
    normalized.B = L.triangularView<Eigen::Lower>().solve(plant.B.adjoint()).adjoint();
  }
  out["riccati"] = riccati(stoch_lq::solve_stoch_riccati(normalized, b.cost.W));
  return out;
}

}  // namespace kypc::report
