#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "kypc/types.hpp"

// JSON system files:
//   {"kind": "deterministic" | "stochastic", "name": "...",
//    "A": [[...]], "B": [[...]], "N": [[...]],
//    "cost": {"W": [[...]], "V": [[...]], "R": [[...]]}}
// Entries are numbers or [re, im] pairs. N is required for stochastic
// systems. V defaults to zero and R to the identity.
namespace kypc::io {

enum class Kind { deterministic, stochastic };

struct SystemBundle {
  Kind kind = Kind::deterministic;
  std::string name;
  Matrix A;
  Matrix B;
  std::optional<Matrix> N;
  CostWeight cost;

  LinearPlant plant() const { return LinearPlant{A, B}; }
  /// Throws Error(schema) for deterministic bundles.
  StochPlant stoch_plant() const;
};

Matrix parse_matrix(const nlohmann::json& j, const std::string& field);
nlohmann::json emit_matrix(const Matrix& X);

SystemBundle parse_system(const nlohmann::json& j);
/// Throws Error(io) when the file cannot be read, Error(schema) for
/// malformed JSON.
SystemBundle parse_system_file(const std::string& path);

nlohmann::json emit_system(const SystemBundle& b);
void emit_system_file(const SystemBundle& b, const std::string& path);

}  // namespace kypc::io
