#pragma once

#include <json.hpp>

#include "kypc/coercivity.hpp"
#include "kypc/frequency.hpp"
#include "kypc/riccati.hpp"
#include "kypc/sim.hpp"
#include "kypc/stoch_lq.hpp"
#include "kypc/system_io.hpp"

namespace kypc::report {

using nlohmann::json;

struct DetOptions {
  frequency::GridOptions grid;
  double horizon = 0.0;  // <= 0: automatic
  double dt = 1e-2;
};

json matrix(const Matrix& X);
json vector(const Vector& x);
json riccati(const RiccatiReport& r);
json frequency_scan(const frequency::FrequencyScan& s, const frequency::GridOptions& g);
json coercivity(const coercivity::CoercivityCertificate& c);
json witness(const coercivity::WitnessControl& w);
json cost_estimate(const sim::CostEstimate& e, const sim::SimConfig& cfg);

/// Frequency scan, strict margin, ARE and coercivity certificate with the
/// three-way cross-check.
json analyze_det(const io::SystemBundle& b, const DetOptions& opts);

/// Mean-square stability data and the stochastic coercivity chain.
json analyze_stoch(const io::SystemBundle& b);

}  // namespace kypc::report
