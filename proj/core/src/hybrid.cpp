#include "starqkd/hybrid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "starqkd/error.hpp"
#include "starqkd/rng.hpp"

namespace starqkd {

namespace {

constexpr std::uint64_t kLaneA = 0x6A09E667F3BCC908ULL;
constexpr std::uint64_t kLaneB = 0xBB67AE8584CAA73BULL;

std::uint64_t rotl(std::uint64_t x, int r) { return (x << r) | (x >> (64 - r)); }

/// Two-lane absorber over the key bits; every input bit reaches both lanes
/// through the splitmix64 finalizer.
struct Digest {
  std::uint64_t a = kLaneA;
  std::uint64_t b = kLaneB;

  void absorb_word(std::uint64_t w) {
    a = splitmix64(a ^ w);
    b = splitmix64(b + rotl(w, 23) + a);
  }

  void absorb(const KeyMaterial& key) {
    absorb_word(key.bit_length());
    const auto bytes = key.bytes();
    for (std::size_t i = 0; i < bytes.size(); i += 8) {
      std::uint64_t w = 0;
      for (std::size_t j = 0; j < 8 && i + j < bytes.size(); ++j) {
        w |= static_cast<std::uint64_t>(bytes[i + j]) << (8 * j);
      }
      absorb_word(w);
    }
  }
};

std::uint64_t keystream_word(const Digest& d, std::uint64_t block) {
  return splitmix64(d.a ^ splitmix64(d.b + block * 0x9E3779B97F4A7C15ULL));
}

}  // namespace

void AttackerModel::validate() const {
  if (!(classical_ops_per_sec > 0.0) || !std::isfinite(classical_ops_per_sec)) {
    throw Error(ErrorCode::DomainError, "classical_ops_per_sec must be > 0");
  }
}

void MigrationTimeline::validate() const {
  for (const double v : {x_years, y_years, z_years}) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::DomainError, "timeline values must be finite and >= 0");
    }
  }
}

HybridCipherState::HybridCipherState(KeyMaterial master, KeyMaterial session,
                                     double rotation_frequency_hz, Seconds start_time)
    : master_(std::move(master)), session_(std::move(session)), last_rotation_(start_time) {
  set_rotation_frequency(rotation_frequency_hz);
  master_origin_ = master_->id().origin;
  master_serial_base_ = master_->id().serial;
}

void HybridCipherState::set_rotation_frequency(double hz) {
  if (!(hz >= 0.0) || !std::isfinite(hz)) {
    throw Error(ErrorCode::DomainError, "rotation frequency must be finite and >= 0");
  }
  frequency_ = hz;
}

void HybridCipherState::set_session(KeyMaterial session) { session_ = std::move(session); }

std::vector<std::uint8_t> encrypt_hybrid(const HybridCipherState& state,
                                         std::span<const std::uint8_t> message) {
  if (!state.master() || !state.session()) {
    throw Error(ErrorCode::MissingKey, "hybrid cipher needs both master and session keys");
  }
  Digest digest;
  digest.absorb(*state.master());
  digest.absorb(*state.session());
  digest.absorb_word(state.rotation_count());

  std::vector<std::uint8_t> out(message.begin(), message.end());
  for (std::size_t i = 0; i < out.size(); i += 8) {
    std::uint64_t ks = keystream_word(digest, i / 8);
    for (std::size_t j = 0; j < 8 && i + j < out.size(); ++j) {
      out[i + j] ^= static_cast<std::uint8_t>(ks & 0xFFU);
      ks >>= 8U;
    }
  }
  return out;
}

void rotate_master(HybridCipherState& state, KeyMaterial& k_q, Seconds now) {
  if (!state.master_) {
    throw Error(ErrorCode::MissingKey, "no master key installed");
  }
  if (now < state.last_rotation_) {
    throw Error(ErrorCode::ClockRegression, "rotation time precedes the previous rotation");
  }
  const std::uint64_t next = state.rotation_count() + 1;
  KeyMaterial mixed =
      mix_keys(*state.master_, k_q, KeyId{state.master_origin_, state.master_serial_base_ + next}, now);
  state.master_ = std::move(mixed);
  state.last_rotation_ = now;
  state.epoch_log_.push_back(EpochEntry{now, state.master_->id()});
}

std::uint64_t due_rotations(const HybridCipherState& state, Seconds now) {
  if (now < state.last_rotation_time()) {
    throw Error(ErrorCode::ClockRegression, "query time precedes the previous rotation");
  }
  if (state.rotation_frequency_hz() == 0.0) {
    return 0;
  }
  const double pending = (now - state.last_rotation_time()) * state.rotation_frequency_hz();
  // Rotation instants k/f rarely survive the round trip through doubles exactly.
  return static_cast<std::uint64_t>(std::floor(pending + 1e-9 * std::max(1.0, pending)));
}

double estimate_t_s(BitCount session_key_bits, const AttackerModel& attacker) {
  if (session_key_bits == 0) {
    throw Error(ErrorCode::InvalidArgument, "session key must have at least one bit");
  }
  attacker.validate();
  const double effective_bits = attacker.has_quantum ? static_cast<double>(session_key_bits) / 2.0
                                                     : static_cast<double>(session_key_bits);
  // Compare in the log domain so 2^b never overflows.
  if (effective_bits - std::log2(attacker.classical_ops_per_sec) >=
      std::log2(kHorizonSentinelSeconds)) {
    return kHorizonSentinelSeconds;
  }
  return std::min(std::exp2(effective_bits) / attacker.classical_ops_per_sec,
                  kHorizonSentinelSeconds);
}

double exposure_fraction(double frequency_hz, Seconds asset_lifetime) {
  if (!(frequency_hz >= 0.0) || !(asset_lifetime >= 0.0)) {
    throw Error(ErrorCode::DomainError, "frequency and lifetime must be >= 0");
  }
  const double epochs = frequency_hz * asset_lifetime;
  if (std::isinf(epochs)) {
    return 0.0;
  }
  if (epochs >= 2.0) {
    return 1.0 / epochs;
  }
  return 1.0 - epochs / 4.0;
}

double refresh_coverage(double frequency_hz, Seconds asset_lifetime) {
  if (frequency_hz == 0.0) {
    return 0.0;
  }
  const double epochs = frequency_hz * asset_lifetime;
  const double exposure = exposure_fraction(frequency_hz, asset_lifetime);
  if (epochs < 2.0) {
    // Same as L * (1 - exposure), without the cancellation for tiny f L.
    return asset_lifetime * epochs / 4.0;
  }
  const double covered = asset_lifetime * (1.0 - exposure);
  return std::min(asset_lifetime, covered);
}

SecurityHorizon estimate_t_sq(BitCount session_key_bits, double frequency_hz,
                              const AttackerModel& attacker, Seconds asset_lifetime) {
  if (!(asset_lifetime >= 0.0) || !std::isfinite(asset_lifetime)) {
    throw Error(ErrorCode::DomainError, "asset lifetime must be finite and >= 0");
  }
  SecurityHorizon horizon;
  horizon.t_s_seconds = estimate_t_s(session_key_bits, attacker);
  const double coverage = refresh_coverage(frequency_hz, asset_lifetime);
  horizon.t_sq_seconds = horizon.t_s_seconds + coverage;
  // A positive coverage below one ulp of T_S must still register.
  if (coverage > 0.0 && horizon.t_sq_seconds <= horizon.t_s_seconds) {
    horizon.t_sq_seconds =
        std::nextafter(horizon.t_s_seconds, std::numeric_limits<double>::infinity());
  }
  return horizon;
}

SecurityHorizon estimate_t_sq(const HybridCipherState& state, const AttackerModel& attacker,
                              Seconds asset_lifetime) {
  if (!state.session()) {
    throw Error(ErrorCode::MissingKey, "no session key installed");
  }
  return estimate_t_sq(state.session()->bit_length(), state.rotation_frequency_hz(), attacker,
                       asset_lifetime);
}

bool mosca_at_risk(const MigrationTimeline& timeline) {
  timeline.validate();
  return timeline.x_years + timeline.y_years > timeline.z_years;
}

}  // namespace starqkd
