#include "starqkd/qkdlink.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "starqkd/error.hpp"

namespace starqkd {

namespace {

void require(bool ok, const char* field, const std::string& why) {
  if (!ok) {
    throw Error(ErrorCode::DomainError, std::string(field) + " " + why);
  }
}

constexpr double kNanosPerSecond = 1.0e9;

}  // namespace

void LinkParams::validate() const {
  require(std::isfinite(distance_km) && distance_km >= 0.0, "distance_km", "must be >= 0");
  require(std::isfinite(attenuation_db_per_km) && attenuation_db_per_km > 0.0,
          "attenuation_db_per_km", "must be > 0");
  require(std::isfinite(source_rate_hz) && source_rate_hz > 0.0, "source_rate_hz", "must be > 0");
  require(detector_efficiency > 0.0 && detector_efficiency <= 1.0, "detector_efficiency",
          "must lie in (0, 1]");
  require(sifting_factor > 0.0 && sifting_factor <= 1.0, "sifting_factor", "must lie in (0, 1]");
  require(qber >= 0.0 && qber <= 0.5, "qber", "must lie in [0, 0.5]");
}

double raw_rate(const LinkParams& params) {
  params.validate();
  const double transmittance =
      std::pow(10.0, -params.attenuation_db_per_km * params.distance_km / 10.0);
  return params.source_rate_hz * params.sifting_factor * params.detector_efficiency * transmittance;
}

double binary_entropy(double q) {
  if (!(q >= 0.0 && q <= 1.0)) {
    throw Error(ErrorCode::DomainError, "binary_entropy argument outside [0, 1]");
  }
  if (q == 0.0 || q == 1.0) {
    return 0.0;
  }
  return -q * std::log2(q) - (1.0 - q) * std::log2(1.0 - q);
}

double secret_fraction(double qber) {
  if (!(qber >= 0.0 && qber <= 0.5)) {
    throw Error(ErrorCode::DomainError, "qber outside [0, 0.5]");
  }
  const double fraction = 1.0 - 2.0 * binary_entropy(qber);
  return fraction > 0.0 ? fraction : 0.0;
}

double secret_rate(const LinkParams& params) {
  return raw_rate(params) * secret_fraction(params.qber);
}

LinkState::LinkState(std::string link_id, LinkParams params, std::uint64_t pool_seed,
                     AuthBudget auth, PostProcessing post)
    : params_(params), post_(post), pool_(std::move(link_id), pool_seed), auth_(auth) {
  params_.validate();
  if (!(post_.cpu_cost_per_raw_bit >= 0.0) || !std::isfinite(post_.cpu_cost_per_raw_bit)) {
    throw Error(ErrorCode::DomainError, "cpu_cost_per_raw_bit must be >= 0");
  }
  if (post_.messages_per_round == 0) {
    throw Error(ErrorCode::DomainError, "messages_per_round must be > 0");
  }
  raw_rate_ = starqkd::raw_rate(params_);
  secret_rate_ = raw_rate_ * secret_fraction(params_.qber);
}

double LinkState::productive_seconds() const noexcept {
  return static_cast<double>(productive_ns_) / kNanosPerSecond;
}

TickYield LinkState::harvest(Seconds dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw Error(ErrorCode::InvalidArgument, "tick length must be positive");
  }
  TickYield yield;
  try {
    auth_consume(auth_, post_.messages_per_round);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::InsufficientAuthKey) {
      throw;
    }
    yield.auth_alarm = true;
    return yield;
  }

  productive_ns_ += std::llround(dt * kNanosPerSecond);
  const double elapsed = static_cast<double>(productive_ns_) / kNanosPerSecond;
  const auto due = static_cast<BitCount>(std::floor(secret_rate_ * elapsed));
  yield.secret_bits = due > released_ ? due - released_ : 0;
  released_ += yield.secret_bits;

  yield.raw_bits = raw_rate_ * dt;
  yield.cpu_cost = post_.cpu_cost_per_raw_bit * yield.raw_bits;
  cpu_cost_ += yield.cpu_cost;
  return yield;
}

TickYield tick(LinkState& state, Seconds dt) {
  TickYield yield = state.harvest(dt);
  if (yield.secret_bits > 0) {
    pool_deposit(state.pool(), yield.secret_bits);
  }
  return yield;
}

BitCount replenish_auth(LinkState& state, BitCount target_bits) {
  AuthBudget& auth = state.auth();
  if (auth.reserved_bits >= target_bits) {
    return 0;
  }
  const BitCount want = target_bits - auth.reserved_bits;
  const BitCount moved = std::min(want, state.pool().available_bits());
  if (moved == 0) {
    return 0;
  }
  (void)pool_draw(state.pool(), moved, Provenance::Quantum);
  auth.reserved_bits += moved;
  return moved;
}

}  // namespace starqkd
