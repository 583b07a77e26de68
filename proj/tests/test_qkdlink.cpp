#include <gtest/gtest.h>

#include <cmath>

#include "starqkd/qkdlink.hpp"
#include "support.hpp"

using namespace starqkd;
using starqkd::test::error_code;

namespace {

// Independent forms of the model, written with natural logs / exp.
double oracle_raw(const LinkParams& p) {
  return p.source_rate_hz * p.sifting_factor * p.detector_efficiency *
         std::exp(-p.attenuation_db_per_km * p.distance_km * std::log(10.0) / 10.0);
}

double oracle_h(double q) {
  if (q == 0.0 || q == 1.0) return 0.0;
  return -(q * std::log(q) + (1 - q) * std::log(1 - q)) / std::log(2.0);
}

LinkParams exact_params(double source_rate) {
  LinkParams p;
  p.source_rate_hz = source_rate;
  p.detector_efficiency = 0.5;
  p.sifting_factor = 0.5;
  p.qber = 0.0;
  return p;
}

LinkState funded(const LinkParams& p, BitCount auth_bits = 1U << 20U) {
  return LinkState("l", p, 9, AuthBudget{auth_bits, 128});
}

}  // namespace

TEST(RawRate, ZeroDistanceIsPureProduct) {
  LinkParams p;
  p.source_rate_hz = 1e6;
  p.detector_efficiency = 0.5;
  p.sifting_factor = 0.5;
  EXPECT_DOUBLE_EQ(raw_rate(p), 250000.0);
}

TEST(RawRate, DecadeLosses) {
  LinkParams p;
  const double r0 = raw_rate(p);
  p.distance_km = 50;
  EXPECT_LT(std::abs(raw_rate(p) / (0.1 * r0) - 1.0), 1e-12);
  p.distance_km = 100;
  EXPECT_LT(std::abs(raw_rate(p) / (0.01 * r0) - 1.0), 1e-12);
}

TEST(RawRate, MatchesOracleAndMonotone) {
  Rng rng(10);
  for (int i = 0; i < 500; ++i) {
    LinkParams p;
    p.distance_km = rng.uniform_real(0, 300);
    p.attenuation_db_per_km = rng.uniform_real(0.05, 1.0);
    p.source_rate_hz = rng.uniform_real(1e3, 1e10);
    p.detector_efficiency = rng.uniform_real(0.01, 1.0);
    p.sifting_factor = rng.uniform_real(0.1, 1.0);
    const double r = raw_rate(p);
    EXPECT_NEAR(r, oracle_raw(p), 1e-9 * oracle_raw(p));
    LinkParams farther = p;
    farther.distance_km += rng.uniform_real(0.01, 10);
    EXPECT_LT(raw_rate(farther), r);
    LinkParams doubled = p;
    doubled.source_rate_hz *= 2;
    EXPECT_DOUBLE_EQ(raw_rate(doubled), 2 * r);
  }
}

TEST(BinaryEntropy, Values) {
  EXPECT_EQ(binary_entropy(0.0), 0.0);
  EXPECT_EQ(binary_entropy(1.0), 0.0);
  EXPECT_DOUBLE_EQ(binary_entropy(0.5), 1.0);
  EXPECT_NEAR(binary_entropy(0.11), 0.49992, 1e-4);
  for (double q = 0.01; q < 1.0; q += 0.01) {
    EXPECT_NEAR(binary_entropy(q), oracle_h(q), 1e-12);
    EXPECT_NEAR(binary_entropy(q), binary_entropy(1 - q), 1e-12);
  }
  EXPECT_EQ(error_code([] { (void)binary_entropy(-0.1); }), ErrorCode::DomainError);
  EXPECT_EQ(error_code([] { (void)binary_entropy(1.1); }), ErrorCode::DomainError);
}

TEST(SecretFraction, Values) {
  EXPECT_EQ(secret_fraction(0.0), 1.0);
  EXPECT_LE(secret_fraction(0.11), 0.001);
  EXPECT_GT(secret_fraction(0.1099), 0.0);
  EXPECT_EQ(secret_fraction(0.25), 0.0);
  EXPECT_LT(1 - 2 * oracle_h(0.25), 0.0);
  EXPECT_EQ(error_code([] { (void)secret_fraction(0.51); }), ErrorCode::DomainError);
}

TEST(SecretFraction, ThresholdBracket) {
  for (double q = 0.1101; q <= 0.5; q += 0.0007) {
    EXPECT_EQ(secret_fraction(q), 0.0) << q;
  }
  EXPECT_EQ(secret_fraction(0.5), 0.0);
  for (double q = 0.0; q <= 0.1099; q += 0.0007) {
    EXPECT_GT(secret_fraction(q), 0.0) << q;
  }
  EXPECT_GT(secret_fraction(0.1099), 0.0);
}

TEST(SecretRate, Examples) {
  LinkParams p;
  p.qber = 0.0;
  EXPECT_EQ(secret_rate(p), raw_rate(p));
  p.qber = 0.11;
  EXPECT_LE(secret_rate(p), 0.001 * raw_rate(p));
  p.qber = 0.12;
  EXPECT_EQ(secret_rate(p), 0.0);
  p.qber = 0.03;
  LinkParams half = p;
  half.detector_efficiency /= 2;
  EXPECT_DOUBLE_EQ(secret_rate(half), secret_rate(p) / 2);
}

TEST(SecretRate, AboveThresholdNeverAccumulates) {
  LinkParams p;
  p.qber = 0.11;
  p.source_rate_hz = 1e3;  // 1e3 * 0.05 * 1.6e-4 << 1 bit/s
  auto s = funded(p);
  for (int i = 0; i < 100; ++i) tick(s, 1.0);
  EXPECT_EQ(s.pool().available_bits(), 0U);
  p.qber = 0.2;
  auto t = funded(p);
  for (int i = 0; i < 100; ++i) tick(t, 1.0);
  EXPECT_EQ(t.pool().available_bits(), 0U);
}

TEST(LinkParams, Validation) {
  LinkParams p;
  p.distance_km = -1;
  EXPECT_EQ(error_code([&] { p.validate(); }), ErrorCode::DomainError);
  p = LinkParams{};
  p.detector_efficiency = 0;
  EXPECT_EQ(error_code([&] { p.validate(); }), ErrorCode::DomainError);
  p = LinkParams{};
  p.qber = 0.6;
  EXPECT_EQ(error_code([&] { p.validate(); }), ErrorCode::DomainError);
}

TEST(Tick, WholeRate) {
  const auto p = exact_params(4000);  // 4000 * 0.5 * 0.5 = 1000 bits/s
  ASSERT_EQ(secret_rate(p), 1000.0);
  auto s = funded(p);
  tick(s, 1.0);
  EXPECT_EQ(s.pool().available_bits(), 1000U);
}

TEST(Tick, FloorsFractionalRate) {
  const auto p = exact_params(3998.8);
  ASSERT_NEAR(secret_rate(p), 999.7, 1e-9);
  auto s = funded(p);
  tick(s, 1.0);
  EXPECT_EQ(s.pool().available_bits(), 999U);
}

TEST(Tick, HalfTicksMatchWholeTick) {
  const auto p = exact_params(3998.8);
  auto whole = funded(p);
  auto halves = funded(p);
  tick(whole, 1.0);
  tick(halves, 0.5);
  tick(halves, 0.5);
  EXPECT_EQ(whole.pool().available_bits(), halves.pool().available_bits());
}

TEST(Tick, ExactOverRandomPartitions) {
  Rng rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    LinkParams p;
    p.distance_km = rng.uniform_real(0, 80);
    p.qber = rng.uniform_real(0, 0.1);
    auto s = funded(p, 1ULL << 40U);
    // Partition [0, T] into random pieces, each a whole number of microseconds.
    std::int64_t total_us = 0;
    const int pieces = 1 + static_cast<int>(rng.uniform_below(40));
    for (int i = 0; i < pieces; ++i) {
      const auto us = 1 + static_cast<std::int64_t>(rng.uniform_below(3'000'000));
      total_us += us;
      tick(s, static_cast<double>(us) * 1e-6);
    }
    const double T = static_cast<double>(total_us * 1000) / 1e9;
    EXPECT_EQ(s.pool().total_generated_bits(), static_cast<BitCount>(std::floor(secret_rate(p) * T)));
    EXPECT_NEAR(s.cumulative_cpu_cost(), raw_rate(p) * T, 1e-9 * raw_rate(p) * T);
  }
}

TEST(Tick, ConsumesAuthPerRound) {
  LinkParams p;
  LinkState s("l", p, 1, AuthBudget{1000, 128}, PostProcessing{1.0, 4});
  tick(s, 1.0);
  EXPECT_EQ(s.auth().reserved_bits, 1000U - 4U * 128U);
}

TEST(Tick, AuthStarvationAlarmsAndYieldsNothing) {
  LinkParams p;
  LinkState s("l", p, 1, AuthBudget{500, 128}, PostProcessing{1.0, 4});
  const TickYield y = tick(s, 1.0);
  EXPECT_TRUE(y.auth_alarm);
  EXPECT_EQ(y.secret_bits, 0U);
  EXPECT_EQ(s.pool().available_bits(), 0U);
  EXPECT_EQ(s.auth().reserved_bits, 500U);
  EXPECT_EQ(s.cumulative_cpu_cost(), 0.0);
}

TEST(Tick, CpuCostLinearAndMonotone) {
  LinkParams p;
  LinkState s("l", p, 1, AuthBudget{1U << 20U, 128}, PostProcessing{2.5, 4});
  double last = 0;
  for (int i = 0; i < 10; ++i) {
    tick(s, 0.3);
    EXPECT_GE(s.cumulative_cpu_cost(), last);
    last = s.cumulative_cpu_cost();
  }
  EXPECT_NEAR(last, 2.5 * raw_rate(p) * 3.0, 1e-9 * last);
  EXPECT_EQ(error_code([&] { tick(s, 0.0); }), ErrorCode::InvalidArgument);
}

TEST(ReplenishAuth, MovesBitsFromPool) {
  LinkParams p;
  LinkState s("l", p, 1, AuthBudget{1024, 128}, PostProcessing{1.0, 4});
  tick(s, 1.0);
  const BitCount before = s.pool().available_bits();
  EXPECT_EQ(replenish_auth(s, 1024), 512U);
  EXPECT_EQ(s.auth().reserved_bits, 1024U);
  EXPECT_EQ(s.pool().available_bits(), before - 512U);
  EXPECT_EQ(s.pool().total_consumed_bits(), 512U);
  EXPECT_EQ(replenish_auth(s, 1024), 0U);
}
