#include "kypc/system_io.hpp"

#include <fstream>
#include <sstream>

#include "kypc/error.hpp"

namespace kypc::io {
namespace {

using nlohmann::json;

[[noreturn]] void schema(const std::string& msg) {
  throw Error(ErrorCode::schema, "schema: " + msg);
}

Complex parse_entry(const json& e, const std::string& field) {
  if (e.is_number()) return {e.get<double>(), 0.0};
  if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
    return {e[0].get<double>(), e[1].get<double>()};
  }
  schema(field + ": entries must be numbers or [re, im] pairs");
}

json emit_entry(Complex z) {
  if (z.imag() == 0.0) return z.real();
  return json::array({z.real(), z.imag()});
}

}  // namespace

StochPlant SystemBundle::stoch_plant() const {
  if (kind != Kind::stochastic || !N) {
    throw Error(ErrorCode::schema, "schema: stochastic system required");
  }
  return StochPlant{A, *N, B};
}

Matrix parse_matrix(const json& j, const std::string& field) {
  if (!j.is_array()) schema(field + ": expected an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (rows == 0) return Matrix(0, 0);
  if (!j[0].is_array()) schema(field + ": expected an array of rows");
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Matrix X(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      std::ostringstream os;
      os << field << ": row " << r << " has " << (row.is_array() ? row.size() : 0)
         << " entries, expected " << cols;
      schema(os.str());
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      X(r, c) = parse_entry(row[static_cast<std::size_t>(c)], field);
    }
  }
  require_finite(field.c_str(), X);
  return X;
}

json emit_matrix(const Matrix& X) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < X.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < X.cols(); ++c) row.push_back(emit_entry(X(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

SystemBundle parse_system(const json& j) {
  if (!j.is_object()) schema("top level must be an object");
  SystemBundle b;
  if (!j.contains("kind") || !j["kind"].is_string()) schema("missing field kind");
  const std::string kind = j["kind"].get<std::string>();
  if (kind == "deterministic") {
    b.kind = Kind::deterministic;
  } else if (kind == "stochastic") {
    b.kind = Kind::stochastic;
  } else {
    schema("kind must be deterministic or stochastic");
  }
  if (j.contains("name")) {
    if (!j["name"].is_string()) schema("name must be a string");
    b.name = j["name"].get<std::string>();
  }
  for (const char* f : {"A", "B", "cost"}) {
    if (!j.contains(f)) schema(std::string("missing field ") + f);
  }
  Matrix A = parse_matrix(j["A"], "A");
  Matrix B = parse_matrix(j["B"], "B");
  if (A.rows() != A.cols()) {
    throw Error(ErrorCode::dimension_mismatch, "dimension mismatch: A not square");
  }
  if (B.rows() != A.rows()) {
    throw Error(ErrorCode::dimension_mismatch, "dimension mismatch: B rows");
  }
  if (b.kind == Kind::stochastic) {
    if (!j.contains("N")) schema("missing field N");
    Matrix N = parse_matrix(j["N"], "N");
    b.N = StochPlant::make(A, N, B).N;
  } else if (j.contains("N")) {
    schema("N given for a deterministic system");
  }
  const LinearPlant p = LinearPlant::make(std::move(A), std::move(B));
  b.A = p.A;
  b.B = p.B;

  const json& c = j["cost"];
  if (!c.is_object()) schema("cost must be an object");
  if (!c.contains("W")) schema("missing field cost.W");
  const Eigen::Index n = b.A.rows();
  const Eigen::Index m = b.B.cols();
  Matrix W = parse_matrix(c["W"], "cost.W");
  Matrix V = c.contains("V") ? parse_matrix(c["V"], "cost.V") : Matrix::Zero(m, n);
  Matrix R = c.contains("R") ? parse_matrix(c["R"], "cost.R") : Matrix::Identity(m, m);
  if (W.rows() != n || W.cols() != n) {
    throw Error(ErrorCode::dimension_mismatch, "dimension mismatch: W");
  }
  if (R.rows() != m || R.cols() != m) {
    throw Error(ErrorCode::dimension_mismatch, "dimension mismatch: R");
  }
  b.cost = CostWeight::make(std::move(W), std::move(V), std::move(R));
  return b;
}

SystemBundle parse_system_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot read " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::schema, std::string("schema: malformed JSON: ") + e.what());
  }
  return parse_system(j);
}

json emit_system(const SystemBundle& b) {
  json j;
  j["kind"] = b.kind == Kind::stochastic ? "stochastic" : "deterministic";
  if (!b.name.empty()) j["name"] = b.name;
  j["A"] = emit_matrix(b.A);
  j["B"] = emit_matrix(b.B);
  if (b.N) j["N"] = emit_matrix(*b.N);
  j["cost"] = {{"W", emit_matrix(b.cost.W)},
               {"V", emit_matrix(b.cost.V)},
               {"R", emit_matrix(b.cost.R)}};
  return j;
}

void emit_system_file(const SystemBundle& b, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path);
  out << emit_system(b).dump(2) << '\n';
}

}  // namespace kypc::io
