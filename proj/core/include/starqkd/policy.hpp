#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "starqkd/hybrid.hpp"
#include "starqkd/keycore.hpp"

namespace starqkd {

enum class DataState { AtRest, InMotion, InUse };

[[nodiscard]] std::string_view to_string(DataState s) noexcept;

/// An information asset tagged with its sensitivity class c (1 = public,
/// M_C = most critical) and time class t (1 = private for one period,
/// K_T = private for its whole lifecycle).
struct InfoAsset {
  std::string id;
  std::uint32_t sensitivity_index = 1;
  std::uint32_t time_index = 1;
  std::uint64_t size_bytes = 0;
  Seconds lifetime_seconds = 0.0;
  DataState data_state = DataState::InMotion;
};

// Protection techniques, weakest first.
struct ClassicalPublicKey {
  BitCount security_bits = 128;
  friend bool operator==(const ClassicalPublicKey&, const ClassicalPublicKey&) = default;
};
struct PostQuantum {
  BitCount security_bits = 128;
  friend bool operator==(const PostQuantum&, const PostQuantum&) = default;
};
struct Hybrid {
  BitCount master_bits = 256;
  BitCount session_bits = 128;
  BitCount quantum_bits = 256;
  double rotation_frequency_hz = 0.0;
  friend bool operator==(const Hybrid&, const Hybrid&) = default;
};
struct QkdOtp {
  friend bool operator==(const QkdOtp&, const QkdOtp&) = default;
};

using Technique = std::variant<ClassicalPublicKey, PostQuantum, Hybrid, QkdOtp>;

/// 0 = ClassicalPublicKey ... 3 = QkdOtp.
[[nodiscard]] inline int strength(const Technique& t) noexcept { return static_cast<int>(t.index()); }
[[nodiscard]] std::string_view technique_name(const Technique& t) noexcept;

using CellIndex = std::pair<std::uint32_t, std::uint32_t>;  // (sensitivity, time), 1-based

struct PolicyMatrix {
  std::uint32_t m_c = 0;
  std::uint32_t k_t = 0;
  std::map<CellIndex, Technique> cells;

  /// Throws IndexOutOfBounds outside the grid, InvalidArgument for a missing cell.
  [[nodiscard]] const Technique& at(std::uint32_t c, std::uint32_t t) const;
};

/// Corners fixed (weakest at (1,1), QkdOtp at (M_C,K_T)); the interior is
/// scored by s = (c-1)/(M_C-1) + (t-1)/(K_T-1): s < 0.5 PostQuantum,
/// s < 1.5 Hybrid, otherwise QkdOtp. Throws BadDimensions below 2x2.
[[nodiscard]] PolicyMatrix default_matrix(std::uint32_t m_c, std::uint32_t k_t);

enum class ViolationKind { MissingCell, OutOfGrid, CornerLow, CornerHigh, NotMonotone };

struct Violation {
  ViolationKind kind;
  CellIndex cell;
  CellIndex other;  // the neighbour for NotMonotone, else equal to cell
  std::string message;
};

[[nodiscard]] std::vector<Violation> validate_matrix(const PolicyMatrix& matrix);

/// Decade grid 10^-9 ... 10^0 Hz searched when sizing hybrid rotation.
[[nodiscard]] std::vector<double> default_frequency_grid();

struct Recommendation {
  std::string asset_id;
  Technique technique;
  SecurityHorizon horizon;
  bool feasible = false;
  bool escalated = false;
  /// AtRest data in the top classes is additionally split across locations.
  bool use_secret_sharing = false;
  bool store_now_decrypt_later_exposure = false;
  std::vector<std::string> notes;
};

/// Throws IndexOutOfBounds when the asset's classes fall outside the matrix.
[[nodiscard]] Recommendation recommend(const InfoAsset& asset, const PolicyMatrix& matrix,
                                       const AttackerModel& attacker,
                                       const std::vector<double>& frequency_grid = default_frequency_grid());

}  // namespace starqkd
