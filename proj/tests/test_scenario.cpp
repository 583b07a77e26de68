#include <gtest/gtest.h>

#include <fstream>

#include "starqkd/scenario.hpp"
#include "support.hpp"

using namespace starqkd;
using starqkd::test::error_code;
using starqkd::test::scenario_path;

namespace {

std::string validation_path(const std::string& text, const IngestOptions& opts = {}) {
  try {
    (void)parse_scenario(text, opts);
  } catch (const ValidationError& e) {
    return e.path();
  }
  return "<none>";
}

std::string with_branch(const std::string& branch_json) {
  return R"({"name": "t", "duration_seconds": 5, "branches": [)" + branch_json + "]}";
}

}  // namespace

TEST(Scenario, MinimalUsesDefaults) {
  const auto r = ingest_scenario(scenario_path("minimal.json"));
  const Scenario& s = r.scenario;
  EXPECT_TRUE(r.warnings.empty());
  EXPECT_EQ(s.name, "minimal");
  EXPECT_EQ(s.format_version, 1U);
  EXPECT_EQ(s.duration_seconds, 10.0);
  EXPECT_EQ(s.tick_seconds, 1.0);
  ASSERT_EQ(s.branches.size(), 1U);
  EXPECT_EQ(s.branches[0].id, "b1");
  EXPECT_EQ(s.branches[0].link.distance_km, LinkParams{}.distance_km);
  EXPECT_EQ(s.branches[0].auth_reserve_bits, kDefaultAuthReserveBits);
  EXPECT_EQ(s.hub.channel_count, 1U);
  EXPECT_FALSE(s.timeline.has_value());
  EXPECT_FALSE(s.matrix.has_value());
}

TEST(Scenario, NegativeDistanceNamesField) {
  EXPECT_EQ(validation_path(with_branch(R"({"id": "b1", "link": {"distance_km": -1}})")),
            "branches[0].link.distance_km");
  EXPECT_EQ(error_code([] { (void)ingest_scenario(STARQKD_TEST_DATA_DIR "/bad_distance.json"); }),
            ErrorCode::ValidationError);
}

TEST(Scenario, UnknownFieldStrictAndLax) {
  const auto text = with_branch(R"({"id": "b1", "colour": "red"})");
  EXPECT_EQ(validation_path(text), "branches[0].colour");
  const auto lax = parse_scenario(text, IngestOptions{false});
  ASSERT_EQ(lax.warnings.size(), 1U);
  EXPECT_NE(lax.warnings[0].find("branches[0].colour"), std::string::npos);
}

TEST(Scenario, ParseErrorPosition) {
  try {
    (void)parse_scenario("{\n  \"name\": \"x\",\n  \"seed\": ,\n}");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3U);
    EXPECT_GE(e.column(), 9U);
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
  }
}

TEST(Scenario, MissingFileIsIoError) {
  EXPECT_EQ(error_code([] { (void)ingest_scenario("/nonexistent/file.json"); }), ErrorCode::IoError);
}

TEST(Scenario, TenBranchRoundTrip) {
  const auto text = read_text_file(scenario_path("ten_branch.json"));
  const auto s = parse_scenario(text).scenario;
  EXPECT_EQ(s.branches.size(), 10U);
  EXPECT_EQ(s.hub.channel_count, 2U);
  EXPECT_EQ(nlohmann::json(scenario_to_json(s)), nlohmann::json::parse(text));
  // And back again.
  const auto again = parse_scenario(scenario_to_json(s).dump()).scenario;
  EXPECT_EQ(scenario_to_json(again), scenario_to_json(s));
}

TEST(Scenario, CrossReferences) {
  const std::string base = R"({"name": "t", "duration_seconds": 5, "hub": {"id": "dc"},
      "branches": [{"id": "a"}, {"id": "b"}], )";
  EXPECT_EQ(validation_path(base + R"("traffic": {"otp": [{"from": "a", "to": "zz", "bits_per_sec": 10}]}})"),
            "traffic.otp[0].to");
  EXPECT_EQ(validation_path(base + R"("traffic": {"relay": [{"from": "a", "to": "a", "bits": 8, "period_seconds": 1}]}})"),
            "traffic.relay[0].to");
  EXPECT_EQ(validation_path(base + R"("rotations": [{"branch": "q", "frequency_hz": 1}]})"), "rotations[0].branch");
  EXPECT_EQ(validation_path(base + R"("sharing": [{"id": "s", "locations": ["a", "nope"], "threshold": 2,
      "refresh_period_seconds": 1}]})"),
            "sharing[0].locations[1]");
  EXPECT_EQ(validation_path(R"({"name": "t", "duration_seconds": 5, "branches": [{"id": "a"}, {"id": "a"}]})"),
            "branches[1].id");
  EXPECT_EQ(validation_path(R"({"name": "t", "duration_seconds": 0, "branches": [{"id": "a"}]})"),
            "duration_seconds");
  EXPECT_EQ(validation_path(R"({"format_version": 2, "name": "t", "duration_seconds": 1, "branches": [{"id": "a"}]})"),
            "format_version");
  EXPECT_EQ(validation_path(R"({"name": "t", "branches": [{"id": "a"}]})"), "duration_seconds");
}

TEST(Scenario, CustomMatrixMustBeValid) {
  const std::string text = R"({"name": "t", "duration_seconds": 5, "branches": [{"id": "a"}],
      "policy": {"matrix": {"m_c": 2, "k_t": 2, "cells": [
        {"c": 1, "t": 1, "technique": {"kind": "QkdOtp"}},
        {"c": 1, "t": 2, "technique": {"kind": "QkdOtp"}},
        {"c": 2, "t": 1, "technique": {"kind": "ClassicalPublicKey"}},
        {"c": 2, "t": 2, "technique": {"kind": "QkdOtp"}}]}}})";
  EXPECT_EQ(validation_path(text), "policy.matrix");
}

TEST(Inventory, ParsesAssetsAndTimeline) {
  const auto inv = ingest_inventory(scenario_path("assets.json"));
  EXPECT_EQ(inv.m_c, 3U);
  EXPECT_EQ(inv.k_t, 3U);
  EXPECT_FALSE(inv.assets.empty());
  ASSERT_TRUE(inv.timeline.has_value());
}

TEST(Matrix, RoundTrip) {
  const auto m = default_matrix(4, 3);
  const auto parsed = parse_matrix(matrix_to_json(m).dump());
  EXPECT_EQ(parsed.m_c, 4U);
  EXPECT_EQ(parsed.k_t, 3U);
  EXPECT_EQ(parsed.cells, m.cells);
  EXPECT_EQ(error_code([] { (void)ingest_matrix(STARQKD_TEST_DATA_DIR "/bad_matrix.json"); }),
            ErrorCode::ValidationError);
}
