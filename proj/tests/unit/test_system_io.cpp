#include <cstdio>
#include <filesystem>

#include <gtest/gtest.h>

#include "kypc/error.hpp"
#include "kypc/system_io.hpp"

using namespace kypc;
using nlohmann::json;

namespace {

ErrorCode code_of(const json& j) {
  try {
    io::parse_system(j);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::invalid_argument;
}

json scalar_det() {
  return json::parse(R"({"kind": "deterministic", "name": "s", "A": [[-1]], "B": [[1]],
                         "cost": {"W": [[1]]}})");
}

}  // namespace

TEST(SystemIo, DefaultsFillCrossTermAndR) {
  const auto b = io::parse_system(scalar_det());
  EXPECT_EQ(b.kind, io::Kind::deterministic);
  EXPECT_EQ(b.cost.V.norm(), 0.0);
  EXPECT_EQ(b.cost.R(0, 0), Complex(1.0, 0.0));
  EXPECT_FALSE(b.N.has_value());
  EXPECT_THROW(b.stoch_plant(), Error);
}

TEST(SystemIo, ComplexEntriesAsPairs) {
  const Matrix X = io::parse_matrix(json::parse("[[1, [0, 2]], [[3, -1], 4.5]]"), "X");
  EXPECT_EQ(X(0, 1), Complex(0.0, 2.0));
  EXPECT_EQ(X(1, 0), Complex(3.0, -1.0));
  EXPECT_EQ(X(1, 1), Complex(4.5, 0.0));
  EXPECT_EQ(io::parse_matrix(io::emit_matrix(X), "X"), X);
}

TEST(SystemIo, RealMatricesEmitPlainNumbers) {
  Matrix X(1, 2);
  X << 1.0, -2.5;
  EXPECT_EQ(io::emit_matrix(X).dump(), "[[1.0,-2.5]]");
}

TEST(SystemIo, Errors) {
  json j = scalar_det();
  j["B"] = json::parse("[[1], [2]]");
  EXPECT_EQ(code_of(j), ErrorCode::dimension_mismatch);

  j = scalar_det();
  j["cost"]["R"] = json::parse("[[0]]");
  EXPECT_EQ(code_of(j), ErrorCode::r_not_positive_definite);

  j = scalar_det();
  j["cost"]["W"] = json::parse("[[1, 0], [0, 1]]");
  EXPECT_EQ(code_of(j), ErrorCode::dimension_mismatch);

  j = scalar_det();
  j["kind"] = "stochastic";
  EXPECT_EQ(code_of(j), ErrorCode::schema);

  j = scalar_det();
  j.erase("A");
  EXPECT_EQ(code_of(j), ErrorCode::schema);

  j = scalar_det();
  j["A"] = json::parse("[[1, 2], [3]]");
  EXPECT_EQ(code_of(j), ErrorCode::schema);

  j = scalar_det();
  j["A"] = json::parse(R"([["x"]])");
  EXPECT_EQ(code_of(j), ErrorCode::schema);

  j = scalar_det();
  j["cost"]["W"] = json::parse("[[1, 0.5], [0, 1]]");
  j["A"] = json::parse("[[-1, 0], [0, -1]]");
  j["B"] = json::parse("[[1], [0]]");
  EXPECT_EQ(code_of(j), ErrorCode::not_hermitian);
}

TEST(SystemIo, FileRoundTrip) {
  io::SystemBundle b = io::parse_system(json::parse(
      R"({"kind": "stochastic", "name": "rt", "A": [[-1, [0, 1]], [0, -2]], "N": [[0.5, 0], [0, 0]],
          "B": [[1], [[0, 1]]], "cost": {"W": [[1, 0], [0, -3]], "V": [[0.1, 0]], "R": [[2]]}})"));
  const auto path = std::filesystem::temp_directory_path() / "kypc_round_trip.json";
  io::emit_system_file(b, path.string());
  const auto c = io::parse_system_file(path.string());
  std::filesystem::remove(path);
  EXPECT_EQ(c.kind, io::Kind::stochastic);
  EXPECT_EQ(c.name, "rt");
  EXPECT_EQ(c.A, b.A);
  EXPECT_EQ(c.B, b.B);
  ASSERT_TRUE(c.N);
  EXPECT_EQ(*c.N, *b.N);
  EXPECT_EQ(c.cost.W, b.cost.W);
  EXPECT_EQ(c.cost.V, b.cost.V);
  EXPECT_EQ(c.cost.R, b.cost.R);
}

TEST(SystemIo, MissingFileIsIoError) {
  try {
    io::parse_system_file("/nonexistent/system.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::io);
  }
}

TEST(SystemIo, MalformedJsonIsSchemaError) {
  const auto path = std::filesystem::temp_directory_path() / "kypc_malformed.json";
  {
    std::FILE* f = std::fopen(path.string().c_str(), "w");
    std::fputs("{\"kind\": ", f);
    std::fclose(f);
  }
  try {
    io::parse_system_file(path.string());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::schema);
  }
  std::filesystem::remove(path);
}
