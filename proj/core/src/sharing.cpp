#include "starqkd/sharing.hpp"

#include <algorithm>
#include <bit>
#include <set>
#include <string>

#include "starqkd/error.hpp"

namespace starqkd {

namespace {

__extension__ using u128 = unsigned __int128;

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<u128>(a) * b % m);
}

std::uint64_t powmod(std::uint64_t base, std::uint64_t exp, std::uint64_t m) {
  std::uint64_t result = 1 % m;
  base %= m;
  while (exp > 0) {
    if ((exp & 1U) != 0U) {
      result = mulmod(result, base, m);
    }
    base = mulmod(base, base, m);
    exp >>= 1U;
  }
  return result;
}

void check_round_and_x(std::span<const Share> shares, const PrimeField& field) {
  std::set<FieldElement> xs;
  for (const auto& s : shares) {
    if (s.round != shares.front().round) {
      throw Error(ErrorCode::MixedRounds, "shares come from rounds " +
                                              std::to_string(shares.front().round) + " and " +
                                              std::to_string(s.round));
    }
    if (s.x == 0 || s.x >= field.prime() || s.y >= field.prime()) {
      throw Error(ErrorCode::DomainError, "share coordinates must be field elements with x != 0");
    }
    if (!xs.insert(s.x).second) {
      throw Error(ErrorCode::DuplicateX, "two shares at x = " + std::to_string(s.x));
    }
  }
}

std::uint64_t read_pad(const KeyMaterial& key) {
  std::uint64_t value = 0;
  const auto bytes = key.bytes();
  for (std::size_t i = 0; i < bytes.size() && i < 8; ++i) {
    value |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  }
  return value;
}

/// Sub-share exchange: location i evaluates its zero polynomial at every other
/// x_j and ships the value under a fresh pad; j unpads with its copy.
std::vector<Share> apply_refresh(std::span<const Share> shares, const ShareConfig& cfg,
                                 const std::vector<std::vector<FieldElement>>& polys,
                                 KeyPool& key_budget) {
  cfg.validate();
  const PrimeField field(cfg.field_prime);
  if (shares.size() != cfg.n_locations) {
    throw Error(ErrorCode::MissingShares, "refresh needs all " + std::to_string(cfg.n_locations) +
                                              " shares, got " + std::to_string(shares.size()));
  }
  check_round_and_x(shares, field);
  if (key_budget.available_bits() < cfg.refresh_cost_bits()) {
    throw Error(ErrorCode::InsufficientKey,
                "refresh needs " + std::to_string(cfg.refresh_cost_bits()) + " key bits, budget holds " +
                    std::to_string(key_budget.available_bits()));
  }

  const BitCount width = cfg.share_encoding_bits();
  const std::uint64_t mask = width >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << width) - 1U;
  std::vector<Share> next(shares.begin(), shares.end());
  for (std::size_t i = 0; i < shares.size(); ++i) {
    const auto& poly = polys[i];
    for (std::size_t j = 0; j < shares.size(); ++j) {
      const FieldElement sub = field.eval(poly, shares[j].x);
      if (i == j) {
        next[j].y = field.add(next[j].y, sub);
        continue;
      }
      KeyMaterial sender_pad = pool_draw(key_budget, width, Provenance::Relayed);
      KeyMaterial receiver_pad = sender_pad;
      const std::uint64_t wire = (sub ^ read_pad(sender_pad)) & mask;
      sender_pad.consume();
      const std::uint64_t received = (wire ^ read_pad(receiver_pad)) & mask;
      receiver_pad.consume();
      next[j].y = field.add(next[j].y, received);
    }
  }
  for (auto& s : next) {
    ++s.round;
  }
  return next;
}

}  // namespace

PrimeField::PrimeField(std::uint64_t prime) : p_(prime) {
  if (prime < 2 || prime >= (std::uint64_t{1} << 63U) || !is_prime(prime)) {
    throw Error(ErrorCode::BadField, std::to_string(prime) + " is not a usable prime");
  }
}

FieldElement PrimeField::add(FieldElement a, FieldElement b) const noexcept {
  const FieldElement s = a + b;
  return s >= p_ ? s - p_ : s;
}

FieldElement PrimeField::sub(FieldElement a, FieldElement b) const noexcept {
  return a >= b ? a - b : a + (p_ - b);
}

FieldElement PrimeField::mul(FieldElement a, FieldElement b) const noexcept {
  return mulmod(a, b, p_);
}

FieldElement PrimeField::pow(FieldElement base, std::uint64_t exp) const noexcept {
  return powmod(base, exp, p_);
}

FieldElement PrimeField::inv(FieldElement a) const {
  if (a % p_ == 0) {
    throw Error(ErrorCode::DomainError, "zero has no inverse");
  }
  return powmod(a, p_ - 2, p_);
}

FieldElement PrimeField::eval(std::span<const FieldElement> coeffs, FieldElement x) const noexcept {
  FieldElement acc = 0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) {
    acc = add(mul(acc, x), *it % p_);
  }
  return acc;
}

bool is_prime(std::uint64_t n) noexcept {
  if (n < 2) {
    return false;
  }
  for (const std::uint64_t small : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL,
                                    29ULL, 31ULL, 37ULL}) {
    if (n % small == 0) {
      return n == small;
    }
  }
  std::uint64_t d = n - 1;
  unsigned r = 0;
  while ((d & 1U) == 0U) {
    d >>= 1U;
    ++r;
  }
  // These bases are a deterministic witness set for all 64-bit integers.
  for (const std::uint64_t a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL,
                                31ULL, 37ULL}) {
    std::uint64_t x = powmod(a, d, n);
    if (x == 1 || x == n - 1) {
      continue;
    }
    bool composite = true;
    for (unsigned i = 1; i < r; ++i) {
      x = mulmod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) {
      return false;
    }
  }
  return true;
}

void ShareConfig::validate() const {
  if (n_locations < 2) {
    throw Error(ErrorCode::InvalidArgument, "n_locations must be >= 2");
  }
  if (threshold_k < 1 || threshold_k > n_locations) {
    throw Error(ErrorCode::InvalidArgument, "threshold_k must lie in [1, n_locations]");
  }
  if (field_prime <= n_locations) {
    throw Error(ErrorCode::BadField, "field prime must exceed the number of locations");
  }
  (void)PrimeField(field_prime);
}

BitCount ShareConfig::share_encoding_bits() const noexcept {
  return static_cast<BitCount>(std::bit_width(field_prime - 1));
}

BitCount ShareConfig::refresh_cost_bits() const noexcept {
  const BitCount n = n_locations;
  return n * (n - 1) * share_encoding_bits();
}

std::vector<Share> split_with_coefficients(FieldElement secret, const ShareConfig& cfg,
                                           std::span<const FieldElement> coefficients) {
  cfg.validate();
  const PrimeField field(cfg.field_prime);
  if (secret >= cfg.field_prime) {
    throw Error(ErrorCode::DomainError, "secret is not a field element");
  }
  if (coefficients.size() != cfg.threshold_k - 1) {
    throw Error(ErrorCode::InvalidArgument, "need exactly k-1 coefficients");
  }
  std::vector<FieldElement> poly{secret};
  poly.insert(poly.end(), coefficients.begin(), coefficients.end());
  std::vector<Share> shares;
  shares.reserve(cfg.n_locations);
  for (std::uint32_t i = 1; i <= cfg.n_locations; ++i) {
    shares.push_back(Share{i, field.eval(poly, i), 0});
  }
  return shares;
}

std::vector<Share> split(FieldElement secret, const ShareConfig& cfg, Rng& rng) {
  cfg.validate();
  std::vector<FieldElement> coeffs(cfg.threshold_k - 1);
  for (auto& c : coeffs) {
    c = rng.uniform_below(cfg.field_prime);
  }
  return split_with_coefficients(secret, cfg, coeffs);
}

FieldElement reconstruct(std::span<const Share> shares, const ShareConfig& cfg) {
  cfg.validate();
  const PrimeField field(cfg.field_prime);
  if (shares.size() < cfg.threshold_k) {
    throw Error(ErrorCode::NotEnoughShares, "need " + std::to_string(cfg.threshold_k) +
                                                " shares, got " + std::to_string(shares.size()));
  }
  check_round_and_x(shares, field);
  const auto used = shares.first(cfg.threshold_k);
  FieldElement secret = 0;
  for (std::size_t i = 0; i < used.size(); ++i) {
    // Lagrange basis at 0: prod_{j != i} x_j / (x_j - x_i).
    FieldElement num = 1;
    FieldElement den = 1;
    for (std::size_t j = 0; j < used.size(); ++j) {
      if (i == j) {
        continue;
      }
      num = field.mul(num, used[j].x);
      den = field.mul(den, field.sub(used[j].x, used[i].x));
    }
    secret = field.add(secret, field.mul(used[i].y, field.mul(num, field.inv(den))));
  }
  return secret;
}

std::vector<Share> refresh(std::span<const Share> shares, const ShareConfig& cfg, Rng& rng,
                           KeyPool& key_budget) {
  cfg.validate();
  std::vector<std::vector<FieldElement>> polys(cfg.n_locations);
  for (auto& poly : polys) {
    poly.assign(cfg.threshold_k, 0);
    for (std::size_t m = 1; m < poly.size(); ++m) {
      poly[m] = rng.uniform_below(cfg.field_prime);
    }
  }
  return apply_refresh(shares, cfg, polys, key_budget);
}

std::vector<Share> refresh_with_polynomial(std::span<const Share> shares, const ShareConfig& cfg,
                                           std::span<const FieldElement> zero_poly,
                                           KeyPool& key_budget) {
  cfg.validate();
  if (zero_poly.size() != cfg.threshold_k - 1) {
    throw Error(ErrorCode::InvalidArgument, "need exactly k-1 zero-polynomial coefficients");
  }
  std::vector<std::vector<FieldElement>> polys(cfg.n_locations,
                                               std::vector<FieldElement>(cfg.threshold_k, 0));
  std::copy(zero_poly.begin(), zero_poly.end(), polys.front().begin() + 1);
  return apply_refresh(shares, cfg, polys, key_budget);
}

bool secrecy_oracle(std::span<const Share> subset, const ShareConfig& cfg) {
  if (cfg.field_prime > kOracleMaxPrime) {
    throw Error(ErrorCode::FieldTooLarge, "exhaustive search is limited to p <= 257");
  }
  cfg.validate();
  const PrimeField field(cfg.field_prime);
  const std::size_t unknowns = cfg.threshold_k - 1;  // a_1 .. a_{k-1}

  for (FieldElement s = 0; s < cfg.field_prime; ++s) {
    // Rows: [x, x^2, ..., x^{k-1} | y - s]
    std::vector<std::vector<FieldElement>> rows;
    rows.reserve(subset.size());
    for (const auto& share : subset) {
      std::vector<FieldElement> row(unknowns + 1);
      FieldElement power = share.x % cfg.field_prime;
      for (std::size_t m = 0; m < unknowns; ++m) {
        row[m] = power;
        power = field.mul(power, share.x);
      }
      row[unknowns] = field.sub(share.y % cfg.field_prime, s);
      rows.push_back(std::move(row));
    }

    std::size_t pivot_row = 0;
    for (std::size_t col = 0; col < unknowns && pivot_row < rows.size(); ++col) {
      std::size_t found = pivot_row;
      while (found < rows.size() && rows[found][col] == 0) {
        ++found;
      }
      if (found == rows.size()) {
        continue;
      }
      std::swap(rows[pivot_row], rows[found]);
      const FieldElement inv = field.inv(rows[pivot_row][col]);
      for (auto& v : rows[pivot_row]) {
        v = field.mul(v, inv);
      }
      for (std::size_t r = 0; r < rows.size(); ++r) {
        if (r == pivot_row || rows[r][col] == 0) {
          continue;
        }
        const FieldElement factor = rows[r][col];
        for (std::size_t c = col; c <= unknowns; ++c) {
          rows[r][c] = field.sub(rows[r][c], field.mul(factor, rows[pivot_row][c]));
        }
      }
      ++pivot_row;
    }
    for (std::size_t r = pivot_row; r < rows.size(); ++r) {
      if (rows[r][unknowns] != 0) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace starqkd
