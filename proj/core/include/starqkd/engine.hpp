#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "starqkd/error.hpp"
#include "starqkd/report.hpp"
#include "starqkd/scenario.hpp"
#include "starqkd/starnet.hpp"

namespace starqkd {

enum class EventKind { LinkTick, Rotation, RelayRequest, Refresh, TrafficSend, Report };

[[nodiscard]] std::string_view to_string(EventKind kind) noexcept;

struct Event {
  Seconds time = 0.0;
  std::uint64_t sequence = 0;
  EventKind kind = EventKind::LinkTick;
  std::size_t subject = 0;      // index into the matching scenario list
  std::uint64_t occurrence = 0; // 1-based count of this recurring event

  /// Priority order: earlier time first, then lower sequence.
  friend bool operator<(const Event& a, const Event& b) noexcept {
    return a.time != b.time ? a.time < b.time : a.sequence < b.sequence;
  }
};

/// Raised when a run fails validation; carries the offending field path.
class ScenarioError : public Error {
 public:
  ScenarioError(std::string path, const std::string& message);
  [[nodiscard]] const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// A cross-module invariant failed mid-run. This is a bug, not bad input.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// One scenario run. Single-threaded; every random draw comes from a stream
/// named after the entity that makes it, all keyed by the scenario seed.
class Simulation {
 public:
  /// Throws ScenarioError if the scenario does not validate.
  explicit Simulation(Scenario scenario);

  /// Executes the event queue up to the scenario duration. Call once.
  MetricsReport run();

  [[nodiscard]] const Scenario& scenario() const noexcept { return scenario_; }
  [[nodiscard]] const StarTopology& topology() const noexcept { return topology_; }
  /// Every executed event in execution order.
  [[nodiscard]] const std::vector<Event>& trace() const noexcept { return trace_; }
  /// Active-session count for every executed link tick.
  [[nodiscard]] const std::vector<std::uint32_t>& sessions_per_tick() const noexcept {
    return sessions_per_tick_;
  }

 private:
  struct Impl;
  Scenario scenario_;
  StarTopology topology_;
  std::vector<Event> trace_;
  std::vector<std::uint32_t> sessions_per_tick_;
  bool ran_ = false;
};

/// Simulation(scenario).run().
[[nodiscard]] MetricsReport run(const Scenario& scenario);

}  // namespace starqkd
