#pragma once

#include <cstdint>

#include "starqkd/keycore.hpp"

namespace starqkd {

/// Physical parameters of one point-to-point QKD channel.
struct LinkParams {
  double distance_km = 0.0;
  double attenuation_db_per_km = 0.2;
  double source_rate_hz = 1.0e6;
  double detector_efficiency = 0.1;
  double sifting_factor = 0.5;
  double qber = 0.02;

  /// Throws DomainError naming the first out-of-range field.
  void validate() const;
};

/// Classical post-processing (sifting, error correction, verification,
/// privacy amplification) as seen by the hub.
struct PostProcessing {
  double cpu_cost_per_raw_bit = 1.0;
  std::uint32_t messages_per_round = 4;
};

/// Sifted detection rate in bits/s:
///   source_rate * sifting * efficiency * 10^(-attenuation * distance / 10)
[[nodiscard]] double raw_rate(const LinkParams& params);

/// h(q) = -q log2 q - (1-q) log2 (1-q), with h(0) = h(1) = 0.
/// Throws DomainError outside [0, 1].
[[nodiscard]] double binary_entropy(double q);

/// Asymptotic BB84 secret fraction max(0, 1 - 2 h(qber)). Throws DomainError
/// outside [0, 0.5].
[[nodiscard]] double secret_fraction(double qber);

[[nodiscard]] double secret_rate(const LinkParams& params);

/// Output of one post-processing round, before the bits are deposited.
struct TickYield {
  BitCount secret_bits = 0;
  double raw_bits = 0.0;
  double cpu_cost = 0.0;
  bool auth_alarm = false;
};

/// Running state of one link. Fractional bits are carried between ticks:
/// the link remembers how long it has been productive (in integer
/// nanoseconds) and how many bits it has already released, so the total
/// released over any partition of that time is floor(secret_rate * T).
class LinkState {
 public:
  LinkState(std::string link_id, LinkParams params, std::uint64_t pool_seed,
            AuthBudget auth = {}, PostProcessing post = {});

  [[nodiscard]] const std::string& link_id() const noexcept { return pool_.link_id(); }
  [[nodiscard]] const LinkParams& params() const noexcept { return params_; }
  [[nodiscard]] const PostProcessing& post_processing() const noexcept { return post_; }
  [[nodiscard]] const KeyPool& pool() const noexcept { return pool_; }
  [[nodiscard]] KeyPool& pool() noexcept { return pool_; }
  [[nodiscard]] const AuthBudget& auth() const noexcept { return auth_; }
  [[nodiscard]] AuthBudget& auth() noexcept { return auth_; }
  [[nodiscard]] double cumulative_cpu_cost() const noexcept { return cpu_cost_; }
  [[nodiscard]] double productive_seconds() const noexcept;
  [[nodiscard]] BitCount released_bits() const noexcept { return released_; }
  [[nodiscard]] double secret_rate() const noexcept { return secret_rate_; }
  [[nodiscard]] double raw_rate() const noexcept { return raw_rate_; }

  /// One post-processing round over dt seconds without touching the pool.
  /// On InsufficientAuthKey the round yields nothing and flags an alarm.
  TickYield harvest(Seconds dt);

 private:
  LinkParams params_;
  PostProcessing post_;
  KeyPool pool_;
  AuthBudget auth_;
  double raw_rate_ = 0.0;
  double secret_rate_ = 0.0;
  double cpu_cost_ = 0.0;
  std::int64_t productive_ns_ = 0;
  BitCount released_ = 0;
};

/// harvest() followed by depositing the secret bits into the link's pool.
TickYield tick(LinkState& state, Seconds dt);

/// Refill the authentication reserve up to `target_bits` from the link's own
/// pool, as far as the pool allows. Returns the bits moved.
BitCount replenish_auth(LinkState& state, BitCount target_bits);

}  // namespace starqkd
