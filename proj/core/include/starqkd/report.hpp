#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "starqkd/hybrid.hpp"
#include "starqkd/starnet.hpp"

namespace starqkd {

inline constexpr std::uint32_t kReportFormatVersion = 1;

/// State of one link at the end of a tick.
struct LinkSample {
  Seconds time = 0.0;
  bool active = false;
  BitCount deposited_bits = 0;  // reached the pool this tick
  BitCount pool_bits = 0;
  BitCount generated_bits = 0;  // cumulative
  BitCount pending_bits = 0;    // waiting in the hub queue
  BitCount auth_reserve_bits = 0;

  friend bool operator==(const LinkSample&, const LinkSample&) = default;
};

struct LinkSeries {
  std::string branch_id;
  double raw_rate = 0.0;
  double secret_rate = 0.0;
  std::vector<LinkSample> samples;

  friend bool operator==(const LinkSeries&, const LinkSeries&) = default;
};

struct HubSample {
  Seconds time = 0.0;
  std::uint32_t active_sessions = 0;
  double offered_cost = 0.0;
  double processed_cost = 0.0;
  double backlog_cost = 0.0;

  friend bool operator==(const HubSample&, const HubSample&) = default;
};

/// A demand that could not be served because a pool ran short.
struct UnmetDemand {
  Seconds time = 0.0;
  std::string kind;  // otp, relay, rotation, refresh
  std::string source;
  std::string target;
  BitCount bits = 0;

  friend bool operator==(const UnmetDemand&, const UnmetDemand&) = default;
};

struct AuthAlarm {
  Seconds time = 0.0;
  std::string branch_id;

  friend bool operator==(const AuthAlarm&, const AuthAlarm&) = default;
};

struct AssetReport {
  std::string asset_id;
  std::string technique;
  double rotation_frequency_hz = 0.0;  // Hybrid only
  double t_s_seconds = 0.0;
  double t_sq_seconds = 0.0;
  std::string horizon_model;
  bool feasible = false;
  bool escalated = false;
  bool secret_sharing = false;
  bool store_now_decrypt_later = false;
  std::vector<std::string> notes;

  friend bool operator==(const AssetReport&, const AssetReport&) = default;
};

/// One proactive refresh. The previous shares were live during
/// [window_start, window_end); an attacker had that long to collect k of them.
struct RefreshRecord {
  Seconds time = 0.0;
  std::string instance_id;
  std::uint64_t round = 0;
  BitCount key_bits = 0;
  Seconds window_start = 0.0;
  Seconds window_end = 0.0;

  friend bool operator==(const RefreshRecord&, const RefreshRecord&) = default;
};

struct RotationSummary {
  std::string branch_id;
  double frequency_hz = 0.0;
  std::uint64_t rotations = 0;
  std::uint64_t missed = 0;
  std::string master_id;
  double t_s_seconds = 0.0;
  double t_sq_seconds = 0.0;  // over the run duration

  friend bool operator==(const RotationSummary&, const RotationSummary&) = default;
};

/// Where every generated quantum bit went.
struct ConsumptionLedger {
  BitCount generated = 0;
  BitCount pool_residue = 0;
  BitCount otp = 0;
  BitCount relay = 0;
  BitCount rotation = 0;
  BitCount refresh = 0;
  BitCount auth = 0;

  [[nodiscard]] BitCount consumed() const noexcept { return otp + relay + rotation + refresh + auth; }
  [[nodiscard]] bool balanced() const noexcept { return generated == pool_residue + consumed(); }

  friend bool operator==(const ConsumptionLedger&, const ConsumptionLedger&) = default;
};

struct MetricsReport {
  std::uint32_t format_version = kReportFormatVersion;
  std::string scenario_name;
  std::uint64_t seed = 0;
  Seconds duration_seconds = 0.0;
  Seconds tick_seconds = 0.0;
  std::uint32_t channel_count = 0;
  std::uint32_t max_active_sessions = 0;
  std::uint64_t events_processed = 0;
  std::vector<LinkSeries> links;
  std::vector<HubSample> hub;
  std::vector<UnmetDemand> unmet_demand;
  std::vector<AuthAlarm> auth_alarms;
  std::vector<AssetReport> assets;
  std::vector<RelayRecord> relays;
  std::vector<RefreshRecord> refreshes;
  std::vector<RotationSummary> rotations;
  ConsumptionLedger consumption;
  std::optional<MigrationTimeline> timeline;
  std::optional<bool> mosca_at_risk;

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

enum class ReportFormat { Json, Csv };

/// Throws InvalidArgument for anything but "json" or "csv".
[[nodiscard]] ReportFormat parse_report_format(std::string_view name);

[[nodiscard]] nlohmann::ordered_json report_to_json(const MetricsReport& report);
/// Inverse of report_to_json. Throws ValidationError on a malformed document.
[[nodiscard]] MetricsReport report_from_json(const nlohmann::json& doc);
/// Pretty-printed JSON document, newline-terminated.
[[nodiscard]] std::string report_to_string(const MetricsReport& report);

/// Writes report.json, or one CSV per series plus manifest.csv, into `dir`
/// (created if needed). Returns the files written. Throws IoError.
std::vector<std::filesystem::path> emit_report(const MetricsReport& report, ReportFormat format,
                                               const std::filesystem::path& dir);

}  // namespace starqkd
