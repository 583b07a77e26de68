#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "starqkd/keycore.hpp"
#include "starqkd/qkdlink.hpp"
#include "starqkd/rng.hpp"

namespace starqkd {

enum class NodeKind { Hub, Branch };

struct Node {
  std::string id;
  NodeKind kind = NodeKind::Branch;
  std::uint32_t channel_count = 0;    // hub only
  double cpu_capacity_per_sec = 0.0;  // hub only
  double capex = 0.0;                 // report metadata
};

struct HubSpec {
  std::string id = "hub";
  std::uint32_t channel_count = 1;
  double cpu_capacity_per_sec = 1.0e7;
  double capex = 0.0;
};

inline constexpr BitCount kDefaultAuthReserveBits = 4096;
inline constexpr BitCount kDefaultPoolTargetBits = 1U << 20U;

struct BranchSpec {
  std::string id;
  LinkParams link;
  PostProcessing post;
  BitCount tag_cost_bits = kDefaultTagCostBits;
  /// Pre-shared authentication key; also the level the reserve is topped up to.
  BitCount auth_reserve_bits = kDefaultAuthReserveBits;
  /// Denominator of the pool fill ratio used by the scheduler.
  BitCount pool_target_bits = kDefaultPoolTargetBits;
  double capex = 0.0;
};

/// Hub-side view of one branch link.
struct StarLink {
  Node branch;
  LinkState state;
  BitCount auth_target_bits = 0;
  BitCount pool_target_bits = 0;
  /// Secret bits distilled but not yet through the hub's post-processing queue.
  BitCount pending_bits = 0;
  double pending_cost = 0.0;
  std::int64_t last_active_round = -1;
  bool active = false;

  [[nodiscard]] double fill_ratio() const noexcept;
};

struct RelayRecord {
  std::string branch_i;
  std::string branch_j;
  BitCount bits = 0;
  Seconds time = 0.0;
  std::string key_id;

  friend bool operator==(const RelayRecord&, const RelayRecord&) = default;
};

struct RelayResult {
  KeyMaterial key_i;
  KeyMaterial key_j;
  RelayRecord record;
};

struct LinkBacklog {
  std::string branch_id;
  double offered_cost = 0.0;
  double deferred_cost = 0.0;
  BitCount deposited_bits = 0;
  BitCount deferred_bits = 0;
};

struct BacklogReport {
  double capacity = 0.0;
  double offered_cost = 0.0;
  double processed_cost = 0.0;
  double backlog_cost = 0.0;
  BitCount deposited_bits = 0;
  BitCount deferred_bits = 0;
  std::vector<LinkBacklog> links;
};

struct StepReport {
  std::vector<std::string> active;
  std::vector<std::string> auth_alarms;
  BitCount auth_replenished_bits = 0;
  BacklogReport backlog;
};

/// Hub (the "Bob" data center) plus N branch links. Branch-to-branch links
/// do not exist; shared branch keys are relayed through the hub.
class StarTopology {
 public:
  [[nodiscard]] const Node& hub() const noexcept { return hub_; }
  [[nodiscard]] std::size_t size() const noexcept { return links_.size(); }
  [[nodiscard]] const std::vector<StarLink>& links() const noexcept { return links_; }
  [[nodiscard]] std::vector<StarLink>& links() noexcept { return links_; }

  [[nodiscard]] bool contains(std::string_view branch_id) const noexcept;
  /// Throws UnknownNode.
  [[nodiscard]] StarLink& link(std::string_view branch_id);
  [[nodiscard]] const StarLink& link(std::string_view branch_id) const;

 private:
  friend StarTopology build_star(const HubSpec&, const std::vector<BranchSpec>&, std::uint64_t);
  friend std::vector<std::string> schedule_channels(StarTopology&, Seconds);
  friend RelayResult relay_key(StarTopology&, std::string_view, std::string_view, BitCount, Rng&,
                               Seconds);

  Node hub_;
  std::vector<StarLink> links_;
  std::int64_t round_ = 0;
  std::uint64_t relay_serial_ = 0;
};

/// Errors: NoBranches, DuplicateId, DomainError for bad link parameters or a
/// hub with no channels / capacity.
[[nodiscard]] StarTopology build_star(const HubSpec& hub, const std::vector<BranchSpec>& branches,
                                      std::uint64_t seed);

/// Trusted-hub relay: the hub draws a fresh uniform K and sends K xor K_i to
/// branch i and K xor K_j to branch j, with the pads K_i, K_j taken from the
/// two link pools. Both returned keys carry K and provenance Relayed.
/// Atomic: if either pool is short, nothing changes (InsufficientKey).
[[nodiscard]] RelayResult relay_key(StarTopology& topology, std::string_view branch_i,
                                    std::string_view branch_j, BitCount n_bits, Rng& rng,
                                    Seconds now = 0.0);

/// Picks at most channel_count links for this round, starved links first:
/// ascending (pool fill ratio, last round served, branch id). Ties on fill
/// therefore rotate round-robin. Marks the chosen links active and returns
/// their ids in selection order.
std::vector<std::string> schedule_channels(StarTopology& topology, Seconds now);

/// Queue distilled bits and their post-processing cost at the hub.
void enqueue_post_processing(StarTopology& topology, std::string_view branch_id, BitCount bits,
                             double cost);

/// Run the hub's post-processing queue for dt seconds. When the queued cost
/// exceeds capacity * dt, every link gets the same fraction capacity/queued
/// of its work done and of its bits released; the remainder stays queued.
BacklogReport hub_cpu_step(StarTopology& topology, Seconds dt);

/// One full round: schedule, harvest the active links into the hub queue,
/// run the queue, then top up authentication reserves from the pools.
StepReport step(StarTopology& topology, Seconds now, Seconds dt);

}  // namespace starqkd
