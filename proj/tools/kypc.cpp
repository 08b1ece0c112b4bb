#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "kypc/error.hpp"
#include "kypc/linmat.hpp"
#include "kypc/stability.hpp"
#include "reports.hpp"

using namespace kypc;
using nlohmann::json;

namespace {

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("kypc");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("KYPC_LOG")) {
    const std::string level = env;
    if (level == "error") spdlog::set_level(spdlog::level::err);
    else if (level == "info") spdlog::set_level(spdlog::level::info);
    else if (level == "debug") spdlog::set_level(spdlog::level::debug);
    else spdlog::warn("unknown KYPC_LOG level '{}'", level);
  }
}

void emit(const json& j) { std::cout << j.dump(2) << '\n'; }

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path);
  return out;
}

// "[1, [0, 1]]" or "1,0": numbers or [re, im] pairs.
Vector parse_vector(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception&) {
    try {
      j = json::parse("[" + text + "]");
    } catch (const json::exception&) {
      throw Error(ErrorCode::invalid_argument, "cannot parse vector '" + text + "'");
    }
  }
  if (!j.is_array()) j = json::array({j});
  const Matrix col = io::parse_matrix(json::array({j}), "vector").transpose();
  return col.col(0);
}

frequency::GridOptions grid_options(int points, double max_omega) {
  frequency::GridOptions g;
  g.points = points;
  g.max_omega = max_omega;
  return g;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"kypc: frequency condition, coercivity and Riccati analysis"};
  app.require_subcommand(1);

  std::string file;
  int grid_points = 2048;
  double grid_max = 1e3;

  report::DetOptions det;
  auto* analyze_det = app.add_subcommand("analyze-det", "deterministic analysis report");
  analyze_det->add_option("file", file, "system file")->required();
  analyze_det->add_option("--grid-points", grid_points, "frequency grid points");
  analyze_det->add_option("--grid-max", grid_max, "largest |omega| on the grid");
  analyze_det->add_option("--horizon", det.horizon, "coercivity horizon (<= 0: automatic)");
  analyze_det->add_option("--dt", det.dt, "coercivity step");

  auto* analyze_stoch = app.add_subcommand("analyze-stoch", "stochastic analysis report");
  analyze_stoch->add_option("file", file, "system file")->required();

  std::string csv;
  auto* scan = app.add_subcommand("scan-frequency", "lambda_min of the Popov function on a grid");
  scan->add_option("file", file, "system file")->required();
  scan->add_option("--csv", csv, "write the CSV here instead of standard output");
  scan->add_option("--grid-points", grid_points, "frequency grid points");
  scan->add_option("--grid-max", grid_max, "largest |omega| on the grid");

  double omega = 0.0;
  std::string eta_text;
  int cycles = 1;
  double witness_dt = 1e-3;
  auto* witness = app.add_subcommand("witness", "resonance input with negative cost");
  witness->add_option("file", file, "system file")->required();
  witness->add_option("--omega", omega, "frequency")->required();
  witness->add_option("--eta", eta_text, "input direction, e.g. \"[1, [0, 1]]\"")->required();
  witness->add_option("--cycles", cycles, "initial number of periods");
  witness->add_option("--dt", witness_dt, "sampling step");
  witness->add_option("--csv", csv, "write the input time series here");

  std::string feedback = "wonham";
  std::string x0_text;
  sim::SimConfig cfg;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo cost and second moments");
  simulate->add_option("file", file, "system file")->required();
  simulate->add_option("--feedback", feedback, "zero | wonham | riccati")
      ->check(CLI::IsMember({"zero", "wonham", "riccati"}));
  simulate->add_option("--paths", cfg.paths, "number of paths");
  simulate->add_option("--dt", cfg.dt, "Euler-Maruyama step");
  simulate->add_option("--horizon", cfg.horizon, "simulation horizon");
  simulate->add_option("--seed", cfg.seed, "64-bit seed");
  simulate->add_flag("--antithetic", cfg.antithetic, "antithetic pairs");
  simulate->add_option("--threads", cfg.threads, "worker threads (0: all cores)");
  simulate->add_option("--x0", x0_text, "initial state (default: all ones)");
  simulate->add_option("--csv", csv, "write E|x(t)|^2 samples here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    const io::SystemBundle bundle = io::parse_system_file(file);
    spdlog::info("loaded {} (n={}, m={})", file, bundle.A.rows(), bundle.B.cols());

    if (*analyze_det) {
      det.grid = grid_options(grid_points, grid_max);
      emit(report::analyze_det(bundle, det));
    } else if (*analyze_stoch) {
      emit(report::analyze_stoch(bundle));
    } else if (*scan) {
      const auto g = grid_options(grid_points, grid_max);
      const auto s = frequency::fdc_scan(bundle.plant(), bundle.cost, g);
      if (csv.empty()) {
        frequency::write_csv(std::cout, s);
      } else {
        auto out = open_out(csv);
        frequency::write_csv(out, s);
        emit(report::frequency_scan(s, g));
      }
    } else if (*witness) {
      const Vector eta = parse_vector(eta_text);
      const auto w = coercivity::resonance_witness(bundle.plant(), bundle.cost, omega, eta,
                                                   cycles, witness_dt);
      if (!csv.empty()) {
        auto out = open_out(csv);
        coercivity::write_control_csv(out, coercivity::witness_timeline(w));
      }
      emit(report::witness(w));
    } else if (*simulate) {
      const StochPlant plant = bundle.stoch_plant();
      const Eigen::Index n = plant.states();
      const Eigen::Index m = plant.inputs();
      const Vector x0 = x0_text.empty() ? Vector(Vector::Ones(n)) : parse_vector(x0_text);
      // Work with normalized inputs v = L* u, R = L L*.
      StochPlant normalized = plant;
      const Matrix L = bundle.cost.R.llt().matrixL();
      normalized.B = L.triangularView<Eigen::Lower>().solve(plant.B.adjoint()).adjoint();
      Matrix F = Matrix::Zero(m, n);
      std::string weight_used = "W";
      if (feedback == "wonham") {
        const Matrix& W = bundle.cost.W;
        Matrix W1 = W;
        if (linmat::min_hermitian_eigenvalue(W) <= 0.0) {
          W1 = stoch_lq::split_weight(W).W1;
          weight_used = "W1 (split)";
        }
        const RiccatiReport r = stoch_lq::solve_wonham(normalized, W1);
        F = -normalized.B.adjoint() * *r.P;
      } else if (feedback == "riccati") {
        const RiccatiReport r = stoch_lq::solve_stoch_riccati(normalized, bundle.cost.W);
        if (!r.P) throw Error(ErrorCode::not_converged, "no stabilizing Riccati solution");
        F = -normalized.B.adjoint() * *r.P;
      }
      const auto est = sim::estimate_cost(normalized, F, bundle.cost.W, x0, cfg);
      json j = report::cost_estimate(est, cfg);
      j["feedback"] = feedback;
      j["feedback_weight"] = weight_used;
      const Matrix Acl = normalized.A + normalized.B * F;
      j["closed_loop_ms_abscissa"] = stability::ms_abscissa(Acl, plant.N);
      if (!est.unstable) {
        const Matrix P = linmat::solve_glyap(Acl, plant.N, bundle.cost.W + F.adjoint() * F);
        j["exact_cost"] = (x0.adjoint() * P * x0)(0).real();
      }
      if (!csv.empty()) {
        auto out = open_out(csv);
        sim::write_moments_csv(out, sim::simulate(normalized, F, x0, cfg));
      }
      emit(j);
    }
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
