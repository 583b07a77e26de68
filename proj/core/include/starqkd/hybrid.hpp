#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "starqkd/keycore.hpp"

namespace starqkd {

inline constexpr double kSecondsPerYear = 365.25 * 86400.0;

/// Horizons above this value are reported as this value ("practically
/// infinite", 10^15 years).
inline constexpr double kHorizonSentinelSeconds = 1.0e15 * kSecondsPerYear;

inline constexpr const char* kCoverageModelId = "additive-coverage/v1";

struct AttackerModel {
  double classical_ops_per_sec = 1.0e9;
  /// Grover search halves the effective bits of symmetric keys.
  bool has_quantum = false;
  /// Store-now-decrypt-later: ciphertext is recorded for later attack.
  bool records_traffic = true;

  void validate() const;
};

struct MigrationTimeline {
  double x_years = 0.0;  ///< how long the data must stay secret
  double y_years = 0.0;  ///< how long re-tooling to quantum-safe takes
  double z_years = 0.0;  ///< time until a large-scale quantum computer

  void validate() const;
  friend bool operator==(const MigrationTimeline&, const MigrationTimeline&) = default;
};

struct SecurityHorizon {
  double t_s_seconds = 0.0;
  double t_sq_seconds = 0.0;
  std::string model_id = kCoverageModelId;
};

struct EpochEntry {
  Seconds time = 0.0;
  KeyId master_id;
};

/// Master/session key pair of a hybrid link plus the master rotation
/// schedule. The cipher is reusable; keys are never consumed by encryption.
class HybridCipherState {
 public:
  HybridCipherState() = default;
  HybridCipherState(KeyMaterial master, KeyMaterial session, double rotation_frequency_hz,
                    Seconds start_time = 0.0);

  [[nodiscard]] const std::optional<KeyMaterial>& master() const noexcept { return master_; }
  [[nodiscard]] const std::optional<KeyMaterial>& session() const noexcept { return session_; }
  [[nodiscard]] double rotation_frequency_hz() const noexcept { return frequency_; }
  [[nodiscard]] Seconds last_rotation_time() const noexcept { return last_rotation_; }
  [[nodiscard]] std::uint64_t rotation_count() const noexcept { return epoch_log_.size(); }
  [[nodiscard]] const std::vector<EpochEntry>& epoch_log() const noexcept { return epoch_log_; }

  void set_rotation_frequency(double hz);
  void set_session(KeyMaterial session);

 private:
  friend void rotate_master(HybridCipherState&, KeyMaterial&, Seconds);

  std::optional<KeyMaterial> master_;
  std::optional<KeyMaterial> session_;
  double frequency_ = 0.0;
  Seconds last_rotation_ = 0.0;
  std::string master_origin_;
  std::uint64_t master_serial_base_ = 0;
  std::vector<EpochEntry> epoch_log_;
};

/// message XOR keystream(K_M, K_S, epoch, block). Throws MissingKey.
[[nodiscard]] std::vector<std::uint8_t> encrypt_hybrid(const HybridCipherState& state,
                                                       std::span<const std::uint8_t> message);

[[nodiscard]] inline std::vector<std::uint8_t> decrypt_hybrid(
    const HybridCipherState& state, std::span<const std::uint8_t> ciphertext) {
  return encrypt_hybrid(state, ciphertext);
}

/// K_M <- K_M xor K_Q, logs the epoch and consumes k_q.
/// Errors: mix_keys errors, ClockRegression, MissingKey.
void rotate_master(HybridCipherState& state, KeyMaterial& k_q, Seconds now);

/// floor((now - last_rotation) * f). Throws ClockRegression if now is earlier.
[[nodiscard]] std::uint64_t due_rotations(const HybridCipherState& state, Seconds now);

/// Brute-force time 2^b / ops, with b halved under a quantum attacker.
/// Saturates at kHorizonSentinelSeconds.
[[nodiscard]] double estimate_t_s(BitCount session_key_bits, const AttackerModel& attacker);

/// Fraction of an asset's lifetime that one broken epoch still exposes when
/// the master rotates at f. 1/(f L) once there are at least two epochs per
/// lifetime, continued below that by its tangent line 1 - f L / 4 so that
/// any f > 0 gives some protection.
[[nodiscard]] double exposure_fraction(double frequency_hz, Seconds asset_lifetime);

/// Lifetime covered by quantum refresh: L * (1 - exposure), 0 for f = 0.
[[nodiscard]] double refresh_coverage(double frequency_hz, Seconds asset_lifetime);

/// T_{S+Q}(f) = T_S + min(L, coverage(f)).
[[nodiscard]] SecurityHorizon estimate_t_sq(BitCount session_key_bits, double frequency_hz,
                                            const AttackerModel& attacker,
                                            Seconds asset_lifetime);

[[nodiscard]] SecurityHorizon estimate_t_sq(const HybridCipherState& state,
                                            const AttackerModel& attacker,
                                            Seconds asset_lifetime);

/// True iff x + y > z. A tie is not at risk.
[[nodiscard]] bool mosca_at_risk(const MigrationTimeline& timeline);

}  // namespace starqkd
