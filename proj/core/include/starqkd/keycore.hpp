#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "starqkd/rng.hpp"

namespace starqkd {

using BitCount = std::uint64_t;
using Seconds = double;

enum class Provenance { Quantum, Session, Master, Relayed, Derived };

[[nodiscard]] std::string_view to_string(Provenance p) noexcept;

struct KeyId {
  std::string origin;
  std::uint64_t serial = 0;

  [[nodiscard]] std::string str() const { return origin + "#" + std::to_string(serial); }
  friend auto operator<=>(const KeyId&, const KeyId&) = default;
};

/// A buffer of secret bits with a fixed origin. Bits are packed LSB-first;
/// any padding bits in the last byte are zero.
///
/// Copies are independent: copying an unconsumed key yields a second usable
/// key with the same bits, which is how both endpoints of a link hold it.
class KeyMaterial {
 public:
  KeyMaterial(KeyId id, std::vector<std::uint8_t> bytes, BitCount bit_length,
              Provenance provenance, Seconds created_at = 0.0);

  /// Whole-byte key; bit length is 8 * bytes.size().
  static KeyMaterial from_bytes(KeyId id, std::vector<std::uint8_t> bytes, Provenance provenance,
                                Seconds created_at = 0.0);

  /// Uniform key of `bit_length` bits drawn from `rng`.
  static KeyMaterial random(KeyId id, BitCount bit_length, Provenance provenance, Rng& rng,
                            Seconds created_at = 0.0);

  [[nodiscard]] const KeyId& id() const noexcept { return id_; }
  [[nodiscard]] BitCount bit_length() const noexcept { return bit_length_; }
  [[nodiscard]] std::span<const std::uint8_t> bytes() const noexcept { return bytes_; }
  [[nodiscard]] Provenance provenance() const noexcept { return provenance_; }
  [[nodiscard]] Seconds created_at() const noexcept { return created_at_; }
  [[nodiscard]] bool consumed() const noexcept { return consumed_; }

  [[nodiscard]] bool bit(BitCount index) const;
  [[nodiscard]] bool all_zero() const noexcept;
  [[nodiscard]] bool same_bits(const KeyMaterial& other) const noexcept;

  /// Marks the key used. Throws KeyAlreadyConsumed if it already was.
  void consume();

 private:
  KeyId id_;
  std::vector<std::uint8_t> bytes_;
  BitCount bit_length_;
  Provenance provenance_;
  Seconds created_at_;
  bool consumed_ = false;
};

/// XOR the message with the key prefix and consume the key.
/// Errors: InsufficientKey, KeyAlreadyConsumed.
[[nodiscard]] std::vector<std::uint8_t> otp_encrypt(KeyMaterial& key,
                                                    std::span<const std::uint8_t> message);

/// Same operation as otp_encrypt; XOR is its own inverse.
[[nodiscard]] inline std::vector<std::uint8_t> otp_decrypt(KeyMaterial& key,
                                                           std::span<const std::uint8_t> ciphertext) {
  return otp_encrypt(key, ciphertext);
}

/// Master-key update K' = K_M xor K_Q. Consumes k_q; k_m is left as is.
/// Errors: LengthMismatch, WrongProvenance, KeyAlreadyConsumed.
[[nodiscard]] KeyMaterial mix_keys(const KeyMaterial& k_m, KeyMaterial& k_q, KeyId out_id,
                                   Seconds now = 0.0);

/// Consumable key volume of one link, with exact conservation:
/// total_generated == available + total_consumed.
///
/// The pool is a counter plus a FIFO bit stream. Deposits add volume; draws
/// hand out the next bits of the stream, so the bits themselves are a pure
/// function of the pool's stream seed and the draw sizes.
class KeyPool {
 public:
  KeyPool(std::string link_id, std::uint64_t stream_seed);

  [[nodiscard]] const std::string& link_id() const noexcept { return link_id_; }
  [[nodiscard]] BitCount available_bits() const noexcept { return available_; }
  [[nodiscard]] BitCount total_generated_bits() const noexcept { return generated_; }
  [[nodiscard]] BitCount total_consumed_bits() const noexcept { return consumed_; }
  [[nodiscard]] bool conserved() const noexcept { return generated_ == available_ + consumed_; }

 private:
  friend KeyMaterial pool_draw(KeyPool&, BitCount, Provenance, Seconds);
  friend void pool_deposit(KeyPool&, BitCount);

  void take_bits(std::span<std::uint8_t> out, BitCount n_bits);

  std::string link_id_;
  BitCount available_ = 0;
  BitCount generated_ = 0;
  BitCount consumed_ = 0;
  std::uint64_t draws_ = 0;
  std::mt19937_64 stream_;
  std::uint64_t buffer_ = 0;
  unsigned buffered_ = 0;
};

/// Draw the next n_bits from the pool. On InsufficientKey the pool is untouched.
[[nodiscard]] KeyMaterial pool_draw(KeyPool& pool, BitCount n_bits, Provenance provenance,
                                    Seconds now = 0.0);

/// Errors: InvalidArgument for n_bits == 0.
void pool_deposit(KeyPool& pool, BitCount n_bits);

inline constexpr BitCount kDefaultTagCostBits = 128;

/// Pre-shared key reserved for information-theoretic message authentication.
struct AuthBudget {
  BitCount reserved_bits = 0;
  BitCount tag_cost_bits = kDefaultTagCostBits;
};

/// Spend tags for n_messages. Errors: InsufficientAuthKey (budget untouched),
/// InvalidArgument for n_messages == 0 or a zero tag cost.
void auth_consume(AuthBudget& budget, std::uint64_t n_messages);

}  // namespace starqkd
