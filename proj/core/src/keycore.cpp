#include "starqkd/keycore.hpp"

#include <algorithm>
#include <limits>
#include <utility>

#include "starqkd/error.hpp"

namespace starqkd {

namespace {

std::size_t bytes_for(BitCount bits) { return static_cast<std::size_t>((bits + 7) / 8); }

void clear_padding(std::vector<std::uint8_t>& bytes, BitCount bit_length) {
  const auto tail = static_cast<unsigned>(bit_length % 8);
  if (tail != 0 && !bytes.empty()) {
    bytes.back() &= static_cast<std::uint8_t>((1U << tail) - 1U);
  }
}

}  // namespace

std::string_view to_string(Provenance p) noexcept {
  switch (p) {
    case Provenance::Quantum: return "Quantum";
    case Provenance::Session: return "Session";
    case Provenance::Master: return "Master";
    case Provenance::Relayed: return "Relayed";
    case Provenance::Derived: return "Derived";
  }
  return "Unknown";
}

KeyMaterial::KeyMaterial(KeyId id, std::vector<std::uint8_t> bytes, BitCount bit_length,
                         Provenance provenance, Seconds created_at)
    : id_(std::move(id)),
      bytes_(std::move(bytes)),
      bit_length_(bit_length),
      provenance_(provenance),
      created_at_(created_at) {
  if (bit_length_ == 0) {
    throw Error(ErrorCode::InvalidArgument, "key material must hold at least one bit");
  }
  if (bytes_.size() != bytes_for(bit_length_)) {
    throw Error(ErrorCode::LengthMismatch, "byte buffer does not match bit length");
  }
  clear_padding(bytes_, bit_length_);
}

KeyMaterial KeyMaterial::from_bytes(KeyId id, std::vector<std::uint8_t> bytes,
                                    Provenance provenance, Seconds created_at) {
  const BitCount bits = static_cast<BitCount>(bytes.size()) * 8;
  return KeyMaterial(std::move(id), std::move(bytes), bits, provenance, created_at);
}

KeyMaterial KeyMaterial::random(KeyId id, BitCount bit_length, Provenance provenance, Rng& rng,
                                Seconds created_at) {
  std::vector<std::uint8_t> bytes(bytes_for(bit_length));
  rng.fill_bytes(bytes);
  return KeyMaterial(std::move(id), std::move(bytes), bit_length, provenance, created_at);
}

bool KeyMaterial::bit(BitCount index) const {
  if (index >= bit_length_) {
    throw Error(ErrorCode::IndexOutOfBounds, "bit index past key length");
  }
  return ((bytes_[static_cast<std::size_t>(index / 8)] >> (index % 8)) & 1U) != 0U;
}

bool KeyMaterial::all_zero() const noexcept {
  return std::all_of(bytes_.begin(), bytes_.end(), [](std::uint8_t b) { return b == 0; });
}

bool KeyMaterial::same_bits(const KeyMaterial& other) const noexcept {
  return bit_length_ == other.bit_length_ && bytes_ == other.bytes_;
}

void KeyMaterial::consume() {
  if (consumed_) {
    throw Error(ErrorCode::KeyAlreadyConsumed, "key " + id_.str() + " was already used");
  }
  consumed_ = true;
}

std::vector<std::uint8_t> otp_encrypt(KeyMaterial& key, std::span<const std::uint8_t> message) {
  if (key.consumed()) {
    throw Error(ErrorCode::KeyAlreadyConsumed, "key " + key.id().str() + " was already used");
  }
  const BitCount message_bits = static_cast<BitCount>(message.size()) * 8;
  if (key.bit_length() < message_bits) {
    throw Error(ErrorCode::InsufficientKey, "one-time pad needs " + std::to_string(message_bits) +
                                                " bits, key holds " +
                                                std::to_string(key.bit_length()));
  }
  std::vector<std::uint8_t> out(message.begin(), message.end());
  const auto pad = key.bytes();
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] ^= pad[i];
  }
  key.consume();
  return out;
}

KeyMaterial mix_keys(const KeyMaterial& k_m, KeyMaterial& k_q, KeyId out_id, Seconds now) {
  if (k_m.bit_length() != k_q.bit_length()) {
    throw Error(ErrorCode::LengthMismatch, "master and quantum keys differ in length");
  }
  if (k_q.provenance() != Provenance::Quantum && k_q.provenance() != Provenance::Relayed) {
    throw Error(ErrorCode::WrongProvenance,
                "update key must be Quantum or Relayed, got " +
                    std::string(to_string(k_q.provenance())));
  }
  if (k_q.consumed()) {
    throw Error(ErrorCode::KeyAlreadyConsumed, "key " + k_q.id().str() + " was already used");
  }
  std::vector<std::uint8_t> bytes(k_m.bytes().begin(), k_m.bytes().end());
  const auto q = k_q.bytes();
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    bytes[i] ^= q[i];
  }
  KeyMaterial mixed(std::move(out_id), std::move(bytes), k_m.bit_length(), Provenance::Derived, now);
  k_q.consume();
  return mixed;
}

KeyPool::KeyPool(std::string link_id, std::uint64_t stream_seed)
    : link_id_(std::move(link_id)), stream_(stream_seed) {}

void KeyPool::take_bits(std::span<std::uint8_t> out, BitCount n_bits) {
  std::fill(out.begin(), out.end(), std::uint8_t{0});
  for (BitCount i = 0; i < n_bits; ++i) {
    if (buffered_ == 0) {
      buffer_ = stream_();
      buffered_ = 64;
    }
    if ((buffer_ & 1U) != 0U) {
      out[static_cast<std::size_t>(i / 8)] |= static_cast<std::uint8_t>(1U << (i % 8));
    }
    buffer_ >>= 1U;
    --buffered_;
  }
}

KeyMaterial pool_draw(KeyPool& pool, BitCount n_bits, Provenance provenance, Seconds now) {
  if (n_bits == 0) {
    throw Error(ErrorCode::InvalidArgument, "draw size must be positive");
  }
  if (pool.available_ < n_bits) {
    throw Error(ErrorCode::InsufficientKey,
                "pool " + pool.link_id_ + " holds " + std::to_string(pool.available_) +
                    " bits, " + std::to_string(n_bits) + " requested");
  }
  std::vector<std::uint8_t> bytes(bytes_for(n_bits));
  pool.take_bits(bytes, n_bits);
  pool.available_ -= n_bits;
  pool.consumed_ += n_bits;
  return KeyMaterial(KeyId{pool.link_id_, pool.draws_++}, std::move(bytes), n_bits, provenance, now);
}

void pool_deposit(KeyPool& pool, BitCount n_bits) {
  if (n_bits == 0) {
    throw Error(ErrorCode::InvalidArgument, "deposit size must be positive");
  }
  if (pool.generated_ > std::numeric_limits<BitCount>::max() - n_bits) {
    throw Error(ErrorCode::InvalidArgument, "pool counter overflow");
  }
  pool.available_ += n_bits;
  pool.generated_ += n_bits;
}

void auth_consume(AuthBudget& budget, std::uint64_t n_messages) {
  if (n_messages == 0 || budget.tag_cost_bits == 0) {
    throw Error(ErrorCode::InvalidArgument, "auth_consume needs messages and a positive tag cost");
  }
  if (n_messages > budget.reserved_bits / budget.tag_cost_bits) {
    throw Error(ErrorCode::InsufficientAuthKey,
                std::to_string(n_messages) + " tags need " +
                    std::to_string(n_messages * budget.tag_cost_bits) + " bits, " +
                    std::to_string(budget.reserved_bits) + " reserved");
  }
  budget.reserved_bits -= n_messages * budget.tag_cost_bits;
}

}  // namespace starqkd
