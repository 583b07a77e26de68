#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace starqkd {

[[nodiscard]] constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30U)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27U)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31U);
}

[[nodiscard]] constexpr std::uint64_t fnv1a64(std::string_view text) noexcept {
  std::uint64_t hash = 0xCBF29CE484222325ULL;
  for (const char c : text) {
    hash ^= static_cast<std::uint8_t>(c);
    hash *= 0x100000001B3ULL;
  }
  return hash;
}

/// Seed of the independent stream owned by the entity called `name`.
///
/// The stream is keyed by the entity name and the root seed only, so adding
/// or removing entities never shifts another entity's stream:
///
///   seed(root, name) = splitmix64(splitmix64(root) ^ splitmix64(fnv1a64(name)))
[[nodiscard]] constexpr std::uint64_t derive_stream_seed(std::uint64_t root,
                                                         std::string_view name) noexcept {
  return splitmix64(splitmix64(root) ^ splitmix64(fnv1a64(name)));
}

/// Deterministic generator. The engine is std::mt19937_64, whose output
/// sequence is fixed by the standard; the distributions below are written
/// out by hand because the standard library ones are not portable.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t root, std::string_view stream_name)
      : engine_(derive_stream_seed(root, stream_name)) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }
  result_type operator()() { return engine_(); }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t uniform_below(std::uint64_t bound);

  /// Uniform integer in [lo, hi], inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01();

  double uniform_real(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  bool coin() { return (engine_() >> 63U) != 0U; }

  void fill_bytes(std::span<std::uint8_t> out);

 private:
  std::mt19937_64 engine_;
};

}  // namespace starqkd
