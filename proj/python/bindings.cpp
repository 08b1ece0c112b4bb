#include <string>

#include <Eigen/Cholesky>
#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "kypc/error.hpp"
#include "kypc/frequency.hpp"
#include "kypc/linmat.hpp"
#include "kypc/stability.hpp"
#include "reports.hpp"

namespace py = pybind11;
using namespace kypc;
using nlohmann::json;

namespace {

// Systems cross the boundary as JSON text in the CLI schema; the Python
// wrapper does the dict <-> text conversion.
io::SystemBundle bundle_of(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::schema, std::string("malformed JSON: ") + e.what());
  }
  return io::parse_system(j);
}

std::string det(const std::string& system, int points, double horizon, double dt) {
  report::DetOptions opts;
  opts.grid.points = points;
  opts.horizon = horizon;
  opts.dt = dt;
  return report::analyze_det(bundle_of(system), opts).dump();
}

std::string stoch(const std::string& system) {
  return report::analyze_stoch(bundle_of(system)).dump();
}

std::string are(const std::string& system) {
  const auto b = bundle_of(system);
  return report::riccati(riccati::solve_are(b.plant(), b.cost)).dump();
}

std::string coercive(const std::string& system, double horizon, double dt) {
  const auto b = bundle_of(system);
  return report::coercivity(coercivity::check_coercivity(b.plant(), b.cost, horizon, dt)).dump();
}

std::optional<double> margin(const std::string& system, int points) {
  const auto b = bundle_of(system);
  frequency::GridOptions g;
  g.points = points;
  return frequency::strict_margin(b.plant(), b.cost, frequency::default_grid(g), g);
}

Matrix popov(const std::string& system, double omega) {
  const auto b = bundle_of(system);
  return frequency::popov(b.plant(), b.cost, omega);
}

// u = F x in the coordinates of the system; the simulator works with the
// normalized input v = L* u, R = L L*.
std::string cost(const std::string& system, const Matrix& F, const Vector& x0,
                 double dt, double horizon, std::size_t paths, std::uint64_t seed,
                 bool antithetic, unsigned threads) {
  const auto b = bundle_of(system);
  StochPlant plant = b.stoch_plant();
  if (F.rows() != plant.inputs() || F.cols() != plant.states() ||
      x0.size() != plant.states()) {
    throw Error(ErrorCode::dimension_mismatch, "dimension mismatch: F or x0");
  }
  const Matrix L = b.cost.R.llt().matrixL();
  plant.B = L.triangularView<Eigen::Lower>().solve(plant.B.adjoint()).adjoint();
  const Matrix Fn = L.adjoint() * F;
  sim::SimConfig cfg;
  cfg.dt = dt;
  cfg.horizon = horizon;
  cfg.paths = paths;
  cfg.seed = seed;
  cfg.antithetic = antithetic;
  cfg.threads = threads;
  return report::cost_estimate(sim::estimate_cost(plant, Fn, b.cost.W, x0, cfg), cfg).dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "KYP, coercivity and Riccati checks (compiled core)";

  // Instances carry the numeric error code (same as the CLI exit code).
  static py::exception<Error> error(m, "KypcError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object type = py::reinterpret_borrow<py::object>(error.ptr());
      py::object exc = type(py::str(e.what()));
      exc.attr("code") = static_cast<int>(e.code());
      exc.attr("kind") = to_string(e.code());
      PyErr_SetObject(error.ptr(), exc.ptr());
    }
  });

  m.def("analyze_det", &det, py::arg("system"), py::arg("points") = 2048,
        py::arg("horizon") = 0.0, py::arg("dt") = 1e-2);
  m.def("analyze_stoch", &stoch, py::arg("system"));
  m.def("solve_are", &are, py::arg("system"));
  m.def("check_coercivity", &coercive, py::arg("system"), py::arg("horizon") = 0.0,
        py::arg("dt") = 1e-2);
  m.def("strict_margin", &margin, py::arg("system"), py::arg("points") = 2048);
  m.def("popov", &popov, py::arg("system"), py::arg("omega"));
  m.def("cost_estimate", &cost, py::arg("system"), py::arg("F"), py::arg("x0"),
        py::arg("dt") = 1e-3, py::arg("horizon") = 10.0, py::arg("paths") = 10000,
        py::arg("seed") = 1, py::arg("antithetic") = false, py::arg("threads") = 0);
  m.def("ms_abscissa", &stability::ms_abscissa, py::arg("A"), py::arg("N"));
}
