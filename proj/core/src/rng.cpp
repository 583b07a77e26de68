#include "starqkd/rng.hpp"

#include "starqkd/error.hpp"

namespace starqkd {

std::uint64_t Rng::uniform_below(std::uint64_t bound) {
  if (bound == 0) {
    throw Error(ErrorCode::InvalidArgument, "uniform_below requires a positive bound");
  }
  // Reject the top partial block so every residue is equally likely.
  const std::uint64_t limit = max() - (max() % bound + 1) % bound;
  std::uint64_t draw = engine_();
  while (draw > limit) {
    draw = engine_();
  }
  return draw % bound;
}

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
  if (hi < lo) {
    throw Error(ErrorCode::InvalidArgument, "uniform_int requires lo <= hi");
  }
  const auto span = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo);
  if (span == max()) {
    return static_cast<std::int64_t>(engine_());
  }
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(lo) + uniform_below(span + 1));
}

double Rng::uniform01() {
  return static_cast<double>(engine_() >> 11U) * 0x1.0p-53;
}

void Rng::fill_bytes(std::span<std::uint8_t> out) {
  std::size_t i = 0;
  while (i < out.size()) {
    std::uint64_t word = engine_();
    for (int b = 0; b < 8 && i < out.size(); ++b, ++i) {
      out[i] = static_cast<std::uint8_t>(word & 0xFFU);
      word >>= 8U;
    }
  }
}

}  // namespace starqkd
