#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "starqkd/hybrid.hpp"
#include "starqkd/policy.hpp"
#include "starqkd/sharing.hpp"
#include "starqkd/starnet.hpp"

namespace starqkd {

inline constexpr std::uint32_t kScenarioFormatVersion = 1;

/// Steady one-time-pad traffic. A destination equal to the hub id uses the
/// branch's own link; any other branch is reached with hub-relayed key.
struct OtpDemand {
  std::string from;
  std::string to;
  double bits_per_sec = 0.0;
};

/// Periodic request for a shared branch-to-branch key.
struct RelayDemand {
  std::string from;
  std::string to;
  BitCount bits = 0;
  double period_seconds = 0.0;
};

struct SharingInstance {
  std::string id;
  std::vector<std::string> locations;
  std::uint32_t threshold = 2;
  std::uint64_t field_prime = kMersenne61;
  double refresh_period_seconds = 0.0;
  std::optional<FieldElement> secret;

  [[nodiscard]] ShareConfig config() const {
    return ShareConfig{static_cast<std::uint32_t>(locations.size()), threshold, field_prime};
  }
};

/// Hybrid cipher on one branch link with master rotation at frequency_hz.
struct RotationSpec {
  std::string branch;
  double frequency_hz = 0.0;
  BitCount master_bits = 256;
  BitCount session_bits = 128;
};

struct Scenario {
  std::uint32_t format_version = kScenarioFormatVersion;
  std::string name = "scenario";
  std::uint64_t seed = 0;
  double duration_seconds = 0.0;
  double tick_seconds = 1.0;
  HubSpec hub;
  std::vector<BranchSpec> branches;
  AttackerModel attacker;
  std::optional<MigrationTimeline> timeline;
  std::uint32_t policy_m_c = 3;
  std::uint32_t policy_k_t = 3;
  std::optional<PolicyMatrix> matrix;
  std::vector<InfoAsset> assets;
  std::vector<OtpDemand> otp_traffic;
  std::vector<RelayDemand> relay_traffic;
  std::vector<SharingInstance> sharing;
  std::vector<RotationSpec> rotations;

  /// The custom matrix if present, else default_matrix(policy_m_c, policy_k_t).
  [[nodiscard]] PolicyMatrix effective_matrix() const;
};

struct IngestOptions {
  /// Unknown fields are errors when true, warnings when false.
  bool strict = true;
};

struct IngestResult {
  Scenario scenario;
  std::vector<std::string> warnings;
};

/// Parse and validate scenario text. Errors: ParseError (line/column),
/// ValidationError (field path).
[[nodiscard]] IngestResult parse_scenario(std::string_view text, const IngestOptions& options = {});

/// Read a scenario file. Adds IoError for unreadable files.
[[nodiscard]] IngestResult ingest_scenario(const std::filesystem::path& path,
                                           const IngestOptions& options = {});

/// Cross-field checks (ids resolve, ranges hold). Throws ValidationError.
void validate_scenario(const Scenario& scenario);

/// Full serialization with every default written out.
[[nodiscard]] nlohmann::ordered_json scenario_to_json(const Scenario& scenario);

// Building blocks shared with the asset/plan input of the CLI.
[[nodiscard]] nlohmann::ordered_json technique_to_json(const Technique& technique);
[[nodiscard]] nlohmann::ordered_json matrix_to_json(const PolicyMatrix& matrix);
[[nodiscard]] nlohmann::ordered_json asset_to_json(const InfoAsset& asset);

/// Inventory file for `plan`: assets, class counts, optional timeline and attacker.
struct AssetInventory {
  std::uint32_t m_c = 3;
  std::uint32_t k_t = 3;
  std::vector<InfoAsset> assets;
  std::optional<MigrationTimeline> timeline;
  std::optional<AttackerModel> attacker;
};

[[nodiscard]] AssetInventory parse_inventory(std::string_view text, const IngestOptions& options = {});
[[nodiscard]] AssetInventory ingest_inventory(const std::filesystem::path& path,
                                              const IngestOptions& options = {});
[[nodiscard]] PolicyMatrix parse_matrix(std::string_view text, const IngestOptions& options = {});
[[nodiscard]] PolicyMatrix ingest_matrix(const std::filesystem::path& path,
                                         const IngestOptions& options = {});

[[nodiscard]] std::string read_text_file(const std::filesystem::path& path);

}  // namespace starqkd
