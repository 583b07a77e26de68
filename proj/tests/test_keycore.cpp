#include <gtest/gtest.h>

#include <vector>

#include "starqkd/keycore.hpp"
#include "support.hpp"

using namespace starqkd;
using starqkd::test::error_code;

namespace {

KeyMaterial bytes_key(std::vector<std::uint8_t> b, Provenance p = Provenance::Quantum) {
  return KeyMaterial::from_bytes(KeyId{"t", 0}, std::move(b), p);
}

KeyPool pool_with(BitCount bits) {
  KeyPool pool("link", 7);
  if (bits > 0) pool_deposit(pool, bits);
  return pool;
}

}  // namespace

TEST(KeyMaterial, RejectsZeroLength) {
  EXPECT_EQ(error_code([] { KeyMaterial(KeyId{"k", 1}, {}, 0, Provenance::Quantum); }),
            ErrorCode::InvalidArgument);
}

TEST(KeyMaterial, PaddingBitsAreCleared) {
  KeyMaterial k(KeyId{"k", 1}, {0xFF}, 3, Provenance::Quantum);
  EXPECT_EQ(k.bytes()[0], 0x07);
  EXPECT_TRUE(k.bit(2));
  EXPECT_EQ(error_code([&] { (void)k.bit(3); }), ErrorCode::IndexOutOfBounds);
}

TEST(Otp, ZeroKeyIsIdentity) {
  Rng rng(1);
  std::vector<std::uint8_t> msg(40);
  rng.fill_bytes(msg);
  auto key = bytes_key(std::vector<std::uint8_t>(40, 0));
  EXPECT_EQ(otp_encrypt(key, msg), msg);
}

TEST(Otp, AnalyticXor) {
  auto key = bytes_key({0xFF});
  const std::vector<std::uint8_t> msg{0x0F};
  EXPECT_EQ(otp_encrypt(key, msg), std::vector<std::uint8_t>{0xF0});
  EXPECT_TRUE(key.consumed());
}

TEST(Otp, InvolutionWithCopy) {
  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    auto key = KeyMaterial::random(KeyId{"k", static_cast<std::uint64_t>(trial)}, 512, Provenance::Quantum, rng);
    KeyMaterial copy = key;
    std::vector<std::uint8_t> msg(64);
    rng.fill_bytes(msg);
    const auto ct = otp_encrypt(key, msg);
    // Independent oracle: byte-wise XOR.
    for (std::size_t i = 0; i < msg.size(); ++i) {
      ASSERT_EQ(ct[i], msg[i] ^ copy.bytes()[i]);
    }
    EXPECT_EQ(otp_decrypt(copy, ct), msg);
  }
}

TEST(Otp, Errors) {
  auto short_key = bytes_key({1, 2});
  const std::vector<std::uint8_t> msg(3, 0);
  EXPECT_EQ(error_code([&] { (void)otp_encrypt(short_key, msg); }), ErrorCode::InsufficientKey);
  EXPECT_FALSE(short_key.consumed());

  auto key = bytes_key({1, 2, 3});
  (void)otp_encrypt(key, msg);
  EXPECT_EQ(error_code([&] { (void)otp_encrypt(key, msg); }), ErrorCode::KeyAlreadyConsumed);
}

TEST(MixKeys, Examples) {
  const auto k_m = bytes_key({0xAA}, Provenance::Master);
  auto k_q = bytes_key({0x0F});
  const auto out = mix_keys(k_m, k_q, KeyId{"m", 1});
  EXPECT_EQ(out.bytes()[0], 0xA5);
  EXPECT_EQ(out.provenance(), Provenance::Derived);
  EXPECT_TRUE(k_q.consumed());

  auto zero = bytes_key({0x00});
  EXPECT_TRUE(mix_keys(k_m, zero, KeyId{"m", 2}).same_bits(k_m));
}

TEST(MixKeys, Involution) {
  Rng rng(3);
  const auto k_m = KeyMaterial::random(KeyId{"m", 0}, 256, Provenance::Master, rng);
  auto k_q = KeyMaterial::random(KeyId{"q", 0}, 256, Provenance::Quantum, rng);
  KeyMaterial k_q_copy = k_q;
  const auto once = mix_keys(k_m, k_q, KeyId{"m", 1});
  const auto twice = mix_keys(once, k_q_copy, KeyId{"m", 2});
  EXPECT_TRUE(twice.same_bits(k_m));
}

TEST(MixKeys, OutputEqualsMasterIffQuantumKeyIsZero) {
  Rng rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const auto k_m = KeyMaterial::random(KeyId{"m", 0}, 16, Provenance::Master, rng);
    // Sparse keys make the all-zero case common.
    std::vector<std::uint8_t> qb(2);
    qb[0] = rng.uniform_below(4) == 0 ? 0 : static_cast<std::uint8_t>(1U << rng.uniform_below(8));
    qb[1] = rng.uniform_below(4) == 0 ? 0 : static_cast<std::uint8_t>(rng.next_u64());
    auto k_q = bytes_key(qb);
    const bool zero = k_q.all_zero();
    EXPECT_EQ(mix_keys(k_m, k_q, KeyId{"o", 0}).same_bits(k_m), zero);
  }
}

TEST(MixKeys, Errors) {
  const auto k_m = bytes_key({1}, Provenance::Master);
  auto wrong_len = bytes_key({1, 2});
  EXPECT_EQ(error_code([&] { (void)mix_keys(k_m, wrong_len, KeyId{"o", 0}); }), ErrorCode::LengthMismatch);
  auto session = bytes_key({1}, Provenance::Session);
  EXPECT_EQ(error_code([&] { (void)mix_keys(k_m, session, KeyId{"o", 0}); }), ErrorCode::WrongProvenance);
  auto relayed = bytes_key({1}, Provenance::Relayed);
  EXPECT_NO_THROW((void)mix_keys(k_m, relayed, KeyId{"o", 0}));
  EXPECT_EQ(error_code([&] { (void)mix_keys(k_m, relayed, KeyId{"o", 0}); }), ErrorCode::KeyAlreadyConsumed);
}

TEST(KeyPool, DrawExhausts) {
  auto pool = pool_with(100);
  const auto k = pool_draw(pool, 100, Provenance::Quantum);
  EXPECT_EQ(pool.available_bits(), 0U);
  EXPECT_EQ(k.bit_length(), 100U);
  EXPECT_EQ(k.provenance(), Provenance::Quantum);
}

TEST(KeyPool, FailedDrawLeavesPoolUnchanged) {
  auto pool = pool_with(50);
  EXPECT_EQ(error_code([&] { (void)pool_draw(pool, 51, Provenance::Quantum); }), ErrorCode::InsufficientKey);
  EXPECT_EQ(pool.available_bits(), 50U);
  EXPECT_EQ(pool.total_consumed_bits(), 0U);
  // The failed draw does not advance the bit stream either.
  auto twin = pool_with(50);
  EXPECT_TRUE(pool_draw(pool, 50, Provenance::Quantum).same_bits(pool_draw(twin, 50, Provenance::Quantum)));
}

TEST(KeyPool, AdditiveBookkeeping) {
  auto pool = pool_with(100);
  (void)pool_draw(pool, 30, Provenance::Quantum);
  (void)pool_draw(pool, 20, Provenance::Quantum);
  EXPECT_EQ(pool.available_bits(), 50U);
  EXPECT_EQ(pool.total_consumed_bits(), 50U);
}

TEST(KeyPool, Deposit) {
  KeyPool pool("l", 1);
  EXPECT_EQ(error_code([&] { pool_deposit(pool, 0); }), ErrorCode::InvalidArgument);
  pool_deposit(pool, 10);
  EXPECT_EQ(pool.available_bits(), 10U);
  EXPECT_EQ(pool.total_generated_bits(), 10U);
  (void)pool_draw(pool, 4, Provenance::Quantum);
  EXPECT_EQ(pool.total_generated_bits(), pool.available_bits() + pool.total_consumed_bits());
  EXPECT_EQ(pool.available_bits(), 6U);
}

TEST(KeyPool, DrawIdsAreSequential) {
  auto pool = pool_with(64);
  EXPECT_EQ(pool_draw(pool, 8, Provenance::Quantum).id().str(), "link#0");
  EXPECT_EQ(pool_draw(pool, 8, Provenance::Quantum).id().str(), "link#1");
}

TEST(KeyPool, BitsArePureFunctionOfSeedAndSizes) {
  // Drawing 24 bits in one go or as 8 + 16 yields the same bit stream.
  auto a = pool_with(24);
  auto b = pool_with(24);
  const auto whole = pool_draw(a, 24, Provenance::Quantum);
  const auto first = pool_draw(b, 8, Provenance::Quantum);
  const auto rest = pool_draw(b, 16, Provenance::Quantum);
  for (BitCount i = 0; i < 24; ++i) {
    EXPECT_EQ(whole.bit(i), i < 8 ? first.bit(i) : rest.bit(i - 8)) << i;
  }
}

TEST(KeyPool, RandomizedModelCheck) {
  // Model: three plain counters. Every operation must agree with it.
  Rng rng(5);
  KeyPool pool("m", 11);
  BitCount avail = 0, gen = 0, used = 0;
  for (int op = 0; op < 5000; ++op) {
    const BitCount n = 1 + rng.uniform_below(300);
    if (rng.coin()) {
      pool_deposit(pool, n);
      avail += n;
      gen += n;
    } else if (n <= avail) {
      EXPECT_EQ(pool_draw(pool, n, Provenance::Quantum).bit_length(), n);
      avail -= n;
      used += n;
    } else {
      EXPECT_EQ(error_code([&] { (void)pool_draw(pool, n, Provenance::Quantum); }), ErrorCode::InsufficientKey);
    }
    ASSERT_EQ(pool.available_bits(), avail);
    ASSERT_EQ(pool.total_generated_bits(), gen);
    ASSERT_EQ(pool.total_consumed_bits(), used);
    ASSERT_TRUE(pool.conserved());
  }
}

TEST(SingleUse, RandomizedSequences) {
  Rng rng(6);
  for (int trial = 0; trial < 300; ++trial) {
    auto key = KeyMaterial::random(KeyId{"k", 0}, 64, Provenance::Quantum, rng);
    const auto master = KeyMaterial::random(KeyId{"m", 0}, 64, Provenance::Master, rng);
    const std::vector<std::uint8_t> msg(8, 0x5A);
    bool used = false;
    for (int step = 0; step < 4; ++step) {
      const auto rc = rng.coin() ? error_code([&] { (void)otp_encrypt(key, msg); })
                                 : error_code([&] { (void)mix_keys(master, key, KeyId{"o", 0}); });
      if (used) {
        EXPECT_EQ(rc, ErrorCode::KeyAlreadyConsumed);
      } else {
        EXPECT_FALSE(rc.has_value());
      }
      used = true;
    }
  }
}

TEST(AuthBudget, Examples) {
  AuthBudget b{128, 128};
  auth_consume(b, 1);
  EXPECT_EQ(b.reserved_bits, 0U);

  AuthBudget short_budget{128, 128};
  EXPECT_EQ(error_code([&] { auth_consume(short_budget, 2); }), ErrorCode::InsufficientAuthKey);
  EXPECT_EQ(short_budget.reserved_bits, 128U);

  AuthBudget c{1000, 128};
  auth_consume(c, 3);
  EXPECT_EQ(c.reserved_bits, 1000U - 3U * 128U);
  EXPECT_EQ(c.reserved_bits, 616U);

  EXPECT_EQ(error_code([&] { auth_consume(c, 0); }), ErrorCode::InvalidArgument);
}
