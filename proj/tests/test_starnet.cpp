#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "starqkd/starnet.hpp"
#include "support.hpp"

using namespace starqkd;
using starqkd::test::error_code;

namespace {

std::vector<BranchSpec> branches(std::size_t n, BitCount pool_target = kDefaultPoolTargetBits) {
  std::vector<BranchSpec> out;
  for (std::size_t i = 1; i <= n; ++i) {
    BranchSpec b;
    b.id = "b" + std::to_string(i);
    b.link.distance_km = 3.0 * static_cast<double>(i);
    b.pool_target_bits = pool_target;
    out.push_back(b);
  }
  return out;
}

HubSpec hub(std::uint32_t channels, double capacity = 1e7) {
  HubSpec h;
  h.id = "dc";
  h.channel_count = channels;
  h.cpu_capacity_per_sec = capacity;
  return h;
}

void fill(StarTopology& t, std::string_view id, BitCount bits) { pool_deposit(t.link(id).state.pool(), bits); }

}  // namespace

TEST(BuildStar, MinimalAndMixed) {
  const auto one = build_star(hub(1), branches(1), 1);
  EXPECT_EQ(one.size(), 1U);
  EXPECT_EQ(one.hub().kind, NodeKind::Hub);

  auto specs = branches(10);
  const auto ten = build_star(hub(2), specs, 1);
  ASSERT_EQ(ten.size(), 10U);
  std::set<std::string> pools;
  for (std::size_t i = 0; i < 10; ++i) {
    const auto& l = ten.links()[i];
    EXPECT_EQ(l.branch.id, specs[i].id);
    EXPECT_EQ(l.state.params().distance_km, specs[i].link.distance_km);
    EXPECT_EQ(l.state.auth().reserved_bits, kDefaultAuthReserveBits);
    pools.insert(l.state.pool().link_id());
  }
  EXPECT_EQ(pools.size(), 10U);
}

TEST(BuildStar, Errors) {
  auto dup = branches(3);
  dup[2].id = "b1";
  EXPECT_EQ(error_code([&] { (void)build_star(hub(1), dup, 1); }), ErrorCode::DuplicateId);
  auto clash = branches(2);
  clash[0].id = "dc";
  EXPECT_EQ(error_code([&] { (void)build_star(hub(1), clash, 1); }), ErrorCode::DuplicateId);
  EXPECT_EQ(error_code([&] { (void)build_star(hub(1), {}, 1); }), ErrorCode::NoBranches);
  EXPECT_EQ(error_code([&] { (void)build_star(hub(0), branches(1), 1); }), ErrorCode::DomainError);
  auto t = build_star(hub(1), branches(1), 1);
  EXPECT_EQ(error_code([&] { (void)t.link("nope"); }), ErrorCode::UnknownNode);
}

TEST(Relay, DeliversIdenticalKeys) {
  auto t = build_star(hub(1), branches(3), 2);
  fill(t, "b1", 1000);
  fill(t, "b2", 1000);
  Rng rng(40);
  const auto r = relay_key(t, "b1", "b2", 200, rng, 3.0);
  EXPECT_TRUE(r.key_i.same_bits(r.key_j));
  EXPECT_EQ(r.key_i.id(), r.key_j.id());
  EXPECT_EQ(r.key_i.provenance(), Provenance::Relayed);
  EXPECT_EQ(r.key_i.bit_length(), 200U);
  EXPECT_EQ(r.record.branch_i, "b1");
  EXPECT_EQ(r.record.branch_j, "b2");
  EXPECT_EQ(r.record.bits, 200U);
  EXPECT_EQ(r.record.time, 3.0);
  EXPECT_EQ(r.record.key_id, r.key_i.id().str());
}

TEST(Relay, ConservationExample) {
  auto t = build_star(hub(1), branches(2), 3);
  fill(t, "b1", 200);
  fill(t, "b2", 300);
  Rng rng(41);
  (void)relay_key(t, "b1", "b2", 64, rng);
  EXPECT_EQ(t.link("b1").state.pool().available_bits(), 136U);
  EXPECT_EQ(t.link("b2").state.pool().available_bits(), 236U);
}

TEST(Relay, AtomicFailure) {
  auto t = build_star(hub(1), branches(2), 4);
  fill(t, "b1", 100);
  fill(t, "b2", 1000);
  Rng rng(42);
  EXPECT_EQ(error_code([&] { (void)relay_key(t, "b1", "b2", 128, rng); }), ErrorCode::InsufficientKey);
  EXPECT_EQ(t.link("b1").state.pool().available_bits(), 100U);
  EXPECT_EQ(t.link("b2").state.pool().available_bits(), 1000U);
  EXPECT_EQ(error_code([&] { (void)relay_key(t, "b2", "b1", 128, rng); }), ErrorCode::InsufficientKey);
  EXPECT_EQ(t.link("b2").state.pool().total_consumed_bits(), 0U);
  EXPECT_EQ(error_code([&] { (void)relay_key(t, "b1", "b1", 8, rng); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(error_code([&] { (void)relay_key(t, "b1", "zz", 8, rng); }), ErrorCode::UnknownNode);
}

TEST(Relay, KeysLookUniform) {
  auto t = build_star(hub(1), branches(2), 5);
  fill(t, "b1", 20000);
  fill(t, "b2", 20000);
  Rng rng(43);
  const BitCount n = 10000;
  const auto r = relay_key(t, "b1", "b2", n, rng);
  double ones = 0;
  for (BitCount i = 0; i < n; ++i) ones += r.key_i.bit(i) ? 1 : 0;
  const double sigma = std::sqrt(n * 0.25);
  EXPECT_LT(std::abs(ones - n / 2.0), 3 * sigma);
}

TEST(Relay, CostsTwoPoolBitsPerSharedBit) {
  auto t = build_star(hub(1), branches(4), 6);
  for (const auto& id : {"b1", "b2", "b3", "b4"}) fill(t, id, 5000);
  Rng rng(44);
  BitCount delivered = 0;
  for (int i = 0; i < 20; ++i) {
    const std::string a = "b" + std::to_string(1 + rng.uniform_below(4));
    std::string b = a;
    while (b == a) b = "b" + std::to_string(1 + rng.uniform_below(4));
    delivered += relay_key(t, a, b, 1 + rng.uniform_below(200), rng).key_i.bit_length();
  }
  BitCount drawn = 0;
  for (const auto& l : t.links()) drawn += l.state.pool().total_consumed_bits();
  EXPECT_EQ(drawn, 2 * delivered);
}

TEST(Schedule, AllActiveWhenChannelsSuffice) {
  auto t = build_star(hub(5), branches(3), 7);
  EXPECT_EQ(schedule_channels(t, 0).size(), 3U);
  for (const auto& l : t.links()) EXPECT_TRUE(l.active);
}

TEST(Schedule, StrictTurnsOnEqualPools) {
  auto t = build_star(hub(1), branches(3), 8);
  std::vector<std::string> order;
  for (int round = 0; round < 9; ++round) {
    const auto active = schedule_channels(t, round);
    ASSERT_EQ(active.size(), 1U);
    order.push_back(active[0]);
  }
  EXPECT_EQ(order, (std::vector<std::string>{"b1", "b2", "b3", "b1", "b2", "b3", "b1", "b2", "b3"}));
}

TEST(Schedule, StarvedFirst) {
  auto t = build_star(hub(2), branches(3, 1000), 9);
  fill(t, "b1", 900);
  fill(t, "b2", 100);
  fill(t, "b3", 500);
  const auto active = schedule_channels(t, 0);
  EXPECT_EQ(std::set<std::string>(active.begin(), active.end()), (std::set<std::string>{"b2", "b3"}));
  EXPECT_FALSE(t.link("b1").active);
}

TEST(HubCpu, BelowCapacity) {
  auto t = build_star(hub(3, 100), branches(2), 10);
  enqueue_post_processing(t, "b1", 40, 30);
  enqueue_post_processing(t, "b2", 60, 50);
  const auto rep = hub_cpu_step(t, 1.0);
  EXPECT_EQ(rep.backlog_cost, 0.0);
  EXPECT_EQ(rep.deposited_bits, 100U);
  EXPECT_EQ(t.link("b1").state.pool().available_bits(), 40U);
}

TEST(HubCpu, DoubleLoadDefersHalf) {
  auto t = build_star(hub(1, 50), branches(1), 11);
  enqueue_post_processing(t, "b1", 1000, 100);
  const auto rep = hub_cpu_step(t, 1.0);
  EXPECT_EQ(rep.deposited_bits, 500U);
  EXPECT_EQ(rep.deferred_bits, 500U);
  EXPECT_DOUBLE_EQ(rep.backlog_cost, 50.0);
}

TEST(HubCpu, ProportionalSplit) {
  auto t = build_star(hub(3, 60), branches(3), 12);
  enqueue_post_processing(t, "b1", 300, 30);
  enqueue_post_processing(t, "b2", 300, 30);
  enqueue_post_processing(t, "b3", 600, 60);
  const auto rep = hub_cpu_step(t, 1.0);
  EXPECT_DOUBLE_EQ(rep.offered_cost, 120.0);
  EXPECT_DOUBLE_EQ(rep.processed_cost, 60.0);
  EXPECT_DOUBLE_EQ(rep.backlog_cost, 60.0);
  ASSERT_EQ(rep.links.size(), 3U);
  EXPECT_DOUBLE_EQ(rep.links[0].deferred_cost, 15.0);
  EXPECT_DOUBLE_EQ(rep.links[1].deferred_cost, 15.0);
  EXPECT_DOUBLE_EQ(rep.links[2].deferred_cost, 30.0);
  EXPECT_EQ(rep.links[2].deposited_bits, 300U);
}

TEST(HubCpu, BacklogEventuallyDrains) {
  // Same offered work against a tight and an unlimited hub: totals agree.
  Rng rng(45);
  auto tight = build_star(hub(3, 500), branches(3), 13);
  auto free = build_star(hub(3, 1e12), branches(3), 13);
  BitCount offered = 0;
  for (int tick = 0; tick < 200; ++tick) {
    for (const auto& id : {"b1", "b2", "b3"}) {
      const BitCount bits = rng.uniform_below(400);
      const double cost = static_cast<double>(rng.uniform_below(300));
      enqueue_post_processing(tight, id, bits, cost);
      enqueue_post_processing(free, id, bits, cost);
      offered += bits;
    }
    (void)hub_cpu_step(tight, 1.0);
    (void)hub_cpu_step(free, 1.0);
  }
  for (int tick = 0; tick < 10000; ++tick) {
    if (hub_cpu_step(tight, 1.0).deferred_bits == 0) break;
  }
  BitCount a = 0, b = 0;
  for (const auto& l : tight.links()) a += l.state.pool().total_generated_bits();
  for (const auto& l : free.links()) b += l.state.pool().total_generated_bits();
  EXPECT_EQ(a, offered);
  EXPECT_EQ(b, offered);
}

TEST(Step, ChannelLimitAndAccounting) {
  auto t = build_star(hub(2, 1e6), branches(5), 14);
  for (int round = 1; round <= 300; ++round) {
    BitCount consumed_before = 0;
    for (const auto& l : t.links()) consumed_before += l.state.pool().total_consumed_bits();
    const auto rep = step(t, round, 1.0);
    ASSERT_LE(rep.active.size(), 2U);
    BitCount consumed_after = 0;
    for (const auto& l : t.links()) {
      consumed_after += l.state.pool().total_consumed_bits();
      ASSERT_TRUE(l.state.pool().conserved());
    }
    ASSERT_EQ(consumed_after - consumed_before, rep.auth_replenished_bits);
  }
  for (const auto& l : t.links()) {
    EXPECT_GT(l.state.pool().available_bits(), 0U) << l.branch.id;
  }
}

TEST(Step, AuthStarvedLinkAlarms) {
  auto specs = branches(1);
  specs[0].link.qber = 0.2;  // never yields key, so the reserve is never refilled
  auto t = build_star(hub(1), specs, 15);
  std::size_t alarms = 0;
  for (int round = 1; round <= 10; ++round) alarms += step(t, round, 1.0).auth_alarms.size();
  EXPECT_EQ(alarms, 10U - kDefaultAuthReserveBits / (4 * kDefaultTagCostBits));
}
