#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "starqkd/keycore.hpp"
#include "starqkd/rng.hpp"

namespace starqkd {

using FieldElement = std::uint64_t;

inline constexpr std::uint64_t kMersenne61 = (std::uint64_t{1} << 61U) - 1U;

/// Largest prime for which secrecy_oracle will run its exhaustive search.
inline constexpr std::uint64_t kOracleMaxPrime = 257;

/// Arithmetic in GF(p) for primes below 2^63.
class PrimeField {
 public:
  explicit PrimeField(std::uint64_t prime);

  [[nodiscard]] std::uint64_t prime() const noexcept { return p_; }
  [[nodiscard]] FieldElement add(FieldElement a, FieldElement b) const noexcept;
  [[nodiscard]] FieldElement sub(FieldElement a, FieldElement b) const noexcept;
  [[nodiscard]] FieldElement mul(FieldElement a, FieldElement b) const noexcept;
  [[nodiscard]] FieldElement pow(FieldElement base, std::uint64_t exp) const noexcept;
  /// Throws DomainError for 0.
  [[nodiscard]] FieldElement inv(FieldElement a) const;
  /// Horner evaluation; coeffs[0] is the constant term.
  [[nodiscard]] FieldElement eval(std::span<const FieldElement> coeffs, FieldElement x) const noexcept;

 private:
  std::uint64_t p_;
};

[[nodiscard]] bool is_prime(std::uint64_t n) noexcept;

struct ShareConfig {
  std::uint32_t n_locations = 3;
  std::uint32_t threshold_k = 2;
  std::uint64_t field_prime = kMersenne61;

  /// InvalidArgument for bad n/k, BadField for a non-prime or p <= n or p >= 2^63.
  void validate() const;

  /// ceil(log2 p): bits needed to carry one field element.
  [[nodiscard]] BitCount share_encoding_bits() const noexcept;

  /// n (n - 1) one-time-pad-protected sub-shares per refresh.
  [[nodiscard]] BitCount refresh_cost_bits() const noexcept;
};

struct Share {
  FieldElement x = 0;
  FieldElement y = 0;
  std::uint64_t round = 0;

  friend bool operator==(const Share&, const Share&) = default;
};

/// Shamir split: P(0) = secret, random degree k-1 coefficients, x_i = i.
/// Errors: BadField, DomainError for secret >= p.
[[nodiscard]] std::vector<Share> split(FieldElement secret, const ShareConfig& cfg, Rng& rng);

/// Split with caller-chosen coefficients a_1..a_{k-1}.
[[nodiscard]] std::vector<Share> split_with_coefficients(FieldElement secret,
                                                         const ShareConfig& cfg,
                                                         std::span<const FieldElement> coefficients);

/// Lagrange interpolation at 0 over the first k shares.
/// Errors: NotEnoughShares, MixedRounds, DuplicateX.
[[nodiscard]] FieldElement reconstruct(std::span<const Share> shares, const ShareConfig& cfg);

/// Proactive refresh. Every location i draws a random polynomial Z_i with
/// Z_i(0) = 0 and sends Z_i(x_j) to every other location j under a one-time
/// pad of share_encoding_bits from `key_budget`; each location adds what it
/// receives. New shares lie on P + sum Z_i, so the secret is unchanged and
/// the round advances by one.
/// Errors: MissingShares, MixedRounds, DuplicateX, InsufficientKey (nothing
/// changes, including the budget).
[[nodiscard]] std::vector<Share> refresh(std::span<const Share> shares, const ShareConfig& cfg,
                                         Rng& rng, KeyPool& key_budget);

/// Refresh with a single given zero polynomial Z (coefficients z_1..z_{k-1};
/// the constant term is implicitly 0). Costs the same key budget.
[[nodiscard]] std::vector<Share> refresh_with_polynomial(std::span<const Share> shares,
                                                         const ShareConfig& cfg,
                                                         std::span<const FieldElement> zero_poly,
                                                         KeyPool& key_budget);

/// Exhaustive check that `subset` reveals nothing: for every candidate secret
/// s in the field, some polynomial of degree k-1 with P(0) = s passes through
/// all the given shares. Decided by Gaussian elimination per candidate.
/// Errors: FieldTooLarge for p > 257.
[[nodiscard]] bool secrecy_oracle(std::span<const Share> subset, const ShareConfig& cfg);

}  // namespace starqkd
