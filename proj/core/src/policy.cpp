#include "starqkd/policy.hpp"

#include <algorithm>
#include <cmath>

#include "starqkd/error.hpp"

namespace starqkd {

namespace {

std::string cell_str(CellIndex c) {
  return "(" + std::to_string(c.first) + "," + std::to_string(c.second) + ")";
}

}  // namespace

std::string_view to_string(DataState s) noexcept {
  switch (s) {
    case DataState::AtRest: return "AtRest";
    case DataState::InMotion: return "InMotion";
    case DataState::InUse: return "InUse";
  }
  return "Unknown";
}

std::string_view technique_name(const Technique& t) noexcept {
  constexpr std::string_view names[] = {"ClassicalPublicKey", "PostQuantum", "Hybrid", "QkdOtp"};
  return names[t.index()];
}

const Technique& PolicyMatrix::at(std::uint32_t c, std::uint32_t t) const {
  if (c < 1 || c > m_c || t < 1 || t > k_t) {
    throw Error(ErrorCode::IndexOutOfBounds,
                "cell " + cell_str({c, t}) + " outside " + std::to_string(m_c) + "x" +
                    std::to_string(k_t));
  }
  const auto it = cells.find({c, t});
  if (it == cells.end()) {
    throw Error(ErrorCode::InvalidArgument, "matrix has no cell " + cell_str({c, t}));
  }
  return it->second;
}

PolicyMatrix default_matrix(std::uint32_t m_c, std::uint32_t k_t) {
  if (m_c < 2 || k_t < 2) {
    throw Error(ErrorCode::BadDimensions, "policy matrix needs at least 2 classes on each axis");
  }
  PolicyMatrix matrix{m_c, k_t, {}};
  // With D = (M_C-1)(K_T-1), s * D = (c-1)(K_T-1) + (t-1)(M_C-1); compare in integers.
  const std::uint64_t d = static_cast<std::uint64_t>(m_c - 1) * (k_t - 1);
  for (std::uint32_t c = 1; c <= m_c; ++c) {
    for (std::uint32_t t = 1; t <= k_t; ++t) {
      const std::uint64_t scaled = static_cast<std::uint64_t>(c - 1) * (k_t - 1) +
                                   static_cast<std::uint64_t>(t - 1) * (m_c - 1);
      Technique tech;
      if (c == 1 && t == 1) {
        tech = ClassicalPublicKey{};
      } else if (c == m_c && t == k_t) {
        tech = QkdOtp{};
      } else if (2 * scaled < d) {
        tech = PostQuantum{};
      } else if (2 * scaled < 3 * d) {
        tech = Hybrid{};
      } else {
        tech = QkdOtp{};
      }
      matrix.cells.emplace(CellIndex{c, t}, tech);
    }
  }
  return matrix;
}

std::vector<Violation> validate_matrix(const PolicyMatrix& matrix) {
  std::vector<Violation> out;
  auto add = [&](ViolationKind kind, CellIndex a, CellIndex b, std::string msg) {
    out.push_back(Violation{kind, a, b, std::move(msg)});
  };
  for (const auto& [idx, tech] : matrix.cells) {
    if (idx.first < 1 || idx.first > matrix.m_c || idx.second < 1 || idx.second > matrix.k_t) {
      add(ViolationKind::OutOfGrid, idx, idx, "cell " + cell_str(idx) + " lies outside the grid");
    }
  }
  for (std::uint32_t c = 1; c <= matrix.m_c; ++c) {
    for (std::uint32_t t = 1; t <= matrix.k_t; ++t) {
      if (!matrix.cells.contains({c, t})) {
        add(ViolationKind::MissingCell, {c, t}, {c, t}, "cell " + cell_str({c, t}) + " is missing");
      }
    }
  }
  if (matrix.m_c == 0 || matrix.k_t == 0) {
    return out;
  }

  const auto low = matrix.cells.find({1, 1});
  if (low != matrix.cells.end() && !std::holds_alternative<ClassicalPublicKey>(low->second)) {
    add(ViolationKind::CornerLow, {1, 1}, {1, 1},
        "cell (1,1) must be ClassicalPublicKey, found " + std::string(technique_name(low->second)));
  }
  const CellIndex top{matrix.m_c, matrix.k_t};
  const auto high = matrix.cells.find(top);
  if (high != matrix.cells.end() && !std::holds_alternative<QkdOtp>(high->second)) {
    add(ViolationKind::CornerHigh, top, top,
        "cell " + cell_str(top) + " must be QkdOtp, found " +
            std::string(technique_name(high->second)));
  }

  auto check_pair = [&](CellIndex a, CellIndex b) {
    const auto ia = matrix.cells.find(a);
    const auto ib = matrix.cells.find(b);
    if (ia == matrix.cells.end() || ib == matrix.cells.end()) {
      return;
    }
    if (strength(ia->second) > strength(ib->second)) {
      add(ViolationKind::NotMonotone, a, b,
          "cell " + cell_str(a) + " (" + std::string(technique_name(ia->second)) +
              ") is stronger than " + cell_str(b) + " (" +
              std::string(technique_name(ib->second)) + ")");
    }
  };
  for (std::uint32_t c = 1; c <= matrix.m_c; ++c) {
    for (std::uint32_t t = 1; t <= matrix.k_t; ++t) {
      if (c < matrix.m_c) {
        check_pair({c, t}, {c + 1, t});
      }
      if (t < matrix.k_t) {
        check_pair({c, t}, {c, t + 1});
      }
    }
  }
  return out;
}

std::vector<double> default_frequency_grid() {
  std::vector<double> grid;
  for (int e = -9; e <= 0; ++e) {
    grid.push_back(std::pow(10.0, e));
  }
  return grid;
}

Recommendation recommend(const InfoAsset& asset, const PolicyMatrix& matrix,
                         const AttackerModel& attacker, const std::vector<double>& frequency_grid) {
  attacker.validate();
  if (!(asset.lifetime_seconds >= 0.0) || !std::isfinite(asset.lifetime_seconds)) {
    throw Error(ErrorCode::DomainError, "asset " + asset.id + " lifetime must be finite and >= 0");
  }
  const Technique& cell = matrix.at(asset.sensitivity_index, asset.time_index);
  const double lifetime = asset.lifetime_seconds;

  Recommendation rec;
  rec.asset_id = asset.id;
  rec.technique = cell;

  if (const auto* pk = std::get_if<ClassicalPublicKey>(&cell)) {
    if (attacker.has_quantum) {
      rec.horizon.t_s_seconds = 0.0;
      rec.horizon.t_sq_seconds = 0.0;
      rec.feasible = lifetime == 0.0;
      if (lifetime > 0.0) {
        rec.store_now_decrypt_later_exposure = true;
        rec.notes.emplace_back(
            "store now, decrypt later: public-key protection falls to a quantum attacker");
      }
    } else {
      const double t_s = estimate_t_s(pk->security_bits, attacker);
      rec.horizon.t_s_seconds = t_s;
      rec.horizon.t_sq_seconds = t_s;
      rec.feasible = t_s >= lifetime;
    }
  } else if (const auto* pq = std::get_if<PostQuantum>(&cell)) {
    // security_bits are already quoted against quantum search.
    AttackerModel classical = attacker;
    classical.has_quantum = false;
    const double t_s = estimate_t_s(pq->security_bits, classical);
    rec.horizon.t_s_seconds = t_s;
    rec.horizon.t_sq_seconds = t_s;
    rec.feasible = t_s >= lifetime;
    rec.notes.emplace_back("post-quantum: computational security only, not information-theoretic");
  } else if (const auto* hy = std::get_if<Hybrid>(&cell)) {
    std::vector<double> grid = frequency_grid;
    std::sort(grid.begin(), grid.end());
    bool sized = false;
    for (const double f : grid) {
      const SecurityHorizon h = estimate_t_sq(hy->session_bits, f, attacker, lifetime);
      if (h.t_sq_seconds >= lifetime) {
        Hybrid sized_params = *hy;
        sized_params.rotation_frequency_hz = f;
        rec.technique = sized_params;
        rec.horizon = h;
        rec.feasible = true;
        sized = true;
        break;
      }
    }
    if (!sized) {
      rec.technique = QkdOtp{};
      rec.escalated = true;
      rec.notes.emplace_back("no rotation frequency on the grid meets the lifetime; escalated to QKD one-time pad");
    }
  }
  if (std::holds_alternative<QkdOtp>(rec.technique)) {
    rec.horizon.t_s_seconds = kHorizonSentinelSeconds;
    rec.horizon.t_sq_seconds = kHorizonSentinelSeconds;
    rec.feasible = true;
  }

  if (asset.data_state == DataState::AtRest && std::holds_alternative<QkdOtp>(rec.technique)) {
    rec.use_secret_sharing = true;
    rec.notes.emplace_back("data at rest: protect with proactive secret sharing across locations");
  }
  if (asset.data_state == DataState::InUse) {
    rec.notes.emplace_back("data in use: must be decrypted to be processed; no technique covers it");
  }
  return rec;
}

}  // namespace starqkd
