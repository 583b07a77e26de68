#include "starqkd/starnet.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>
#include <utility>

#include "starqkd/error.hpp"

namespace starqkd {

double StarLink::fill_ratio() const noexcept {
  if (pool_target_bits == 0) {
    return 0.0;
  }
  return static_cast<double>(state.pool().available_bits()) /
         static_cast<double>(pool_target_bits);
}

bool StarTopology::contains(std::string_view branch_id) const noexcept {
  return std::any_of(links_.begin(), links_.end(),
                     [&](const StarLink& l) { return l.branch.id == branch_id; });
}

StarLink& StarTopology::link(std::string_view branch_id) {
  for (auto& l : links_) {
    if (l.branch.id == branch_id) {
      return l;
    }
  }
  throw Error(ErrorCode::UnknownNode, "no branch '" + std::string(branch_id) + "'");
}

const StarLink& StarTopology::link(std::string_view branch_id) const {
  return const_cast<StarTopology*>(this)->link(branch_id);
}

StarTopology build_star(const HubSpec& hub, const std::vector<BranchSpec>& branches,
                        std::uint64_t seed) {
  if (branches.empty()) {
    throw Error(ErrorCode::NoBranches, "a star needs at least one branch");
  }
  if (hub.channel_count == 0) {
    throw Error(ErrorCode::DomainError, "hub channel_count must be positive");
  }
  if (!(hub.cpu_capacity_per_sec > 0.0) || !std::isfinite(hub.cpu_capacity_per_sec)) {
    throw Error(ErrorCode::DomainError, "hub cpu_capacity_per_sec must be positive");
  }
  std::set<std::string> ids{hub.id};
  for (const auto& b : branches) {
    if (b.id.empty()) {
      throw Error(ErrorCode::InvalidArgument, "branch id must not be empty");
    }
    if (!ids.insert(b.id).second) {
      throw Error(ErrorCode::DuplicateId, "id '" + b.id + "' is used twice");
    }
  }

  StarTopology topo;
  topo.hub_ = Node{hub.id, NodeKind::Hub, hub.channel_count, hub.cpu_capacity_per_sec, hub.capex};
  topo.links_.reserve(branches.size());
  for (const auto& b : branches) {
    AuthBudget auth{b.auth_reserve_bits, b.tag_cost_bits};
    LinkState state(b.id, b.link, derive_stream_seed(seed, "pool:" + b.id), auth, b.post);
    StarLink link{Node{b.id, NodeKind::Branch, 0, 0.0, b.capex}, std::move(state),
                  b.auth_reserve_bits, b.pool_target_bits};
    topo.links_.push_back(std::move(link));
  }
  return topo;
}

RelayResult relay_key(StarTopology& topology, std::string_view branch_i, std::string_view branch_j,
                      BitCount n_bits, Rng& rng, Seconds now) {
  if (branch_i == branch_j) {
    throw Error(ErrorCode::InvalidArgument, "relay endpoints must differ");
  }
  if (n_bits == 0) {
    throw Error(ErrorCode::InvalidArgument, "relay size must be positive");
  }
  StarLink& li = topology.link(branch_i);
  StarLink& lj = topology.link(branch_j);
  for (const StarLink* l : {&li, &lj}) {
    if (l->state.pool().available_bits() < n_bits) {
      throw Error(ErrorCode::InsufficientKey,
                  "relay needs " + std::to_string(n_bits) + " bits on link " + l->branch.id +
                      ", pool holds " + std::to_string(l->state.pool().available_bits()));
    }
  }

  const KeyId id{"relay:" + topology.hub_.id, topology.relay_serial_++};
  const KeyMaterial fresh = KeyMaterial::random(id, n_bits, Provenance::Relayed, rng, now);

  // Each pad exists twice: the hub's copy and the branch's copy of the same QKD bits.
  auto deliver = [&](StarLink& link) {
    KeyMaterial hub_pad = pool_draw(link.state.pool(), n_bits, Provenance::Quantum, now);
    KeyMaterial branch_pad = hub_pad;
    const KeyMaterial wire = mix_keys(fresh, hub_pad, KeyId{"wire:" + link.branch.id, id.serial}, now);
    const KeyMaterial recovered = mix_keys(wire, branch_pad, id, now);
    return KeyMaterial(id, std::vector<std::uint8_t>(recovered.bytes().begin(), recovered.bytes().end()), n_bits,
                       Provenance::Relayed, now);
  };
  KeyMaterial key_i = deliver(li);
  KeyMaterial key_j = deliver(lj);

  RelayRecord record{li.branch.id, lj.branch.id, n_bits, now, id.str()};
  return RelayResult{std::move(key_i), std::move(key_j), std::move(record)};
}

std::vector<std::string> schedule_channels(StarTopology& topology, Seconds /*now*/) {
  std::vector<StarLink*> order;
  order.reserve(topology.links_.size());
  for (auto& l : topology.links_) {
    l.active = false;
    order.push_back(&l);
  }
  std::sort(order.begin(), order.end(), [](const StarLink* a, const StarLink* b) {
    return std::make_tuple(a->fill_ratio(), a->last_active_round, std::cref(a->branch.id)) <
           std::make_tuple(b->fill_ratio(), b->last_active_round, std::cref(b->branch.id));
  });
  const std::size_t slots =
      std::min<std::size_t>(topology.hub_.channel_count, topology.links_.size());
  std::vector<std::string> active;
  active.reserve(slots);
  for (std::size_t i = 0; i < slots; ++i) {
    order[i]->active = true;
    order[i]->last_active_round = topology.round_;
    active.push_back(order[i]->branch.id);
  }
  ++topology.round_;
  return active;
}

void enqueue_post_processing(StarTopology& topology, std::string_view branch_id, BitCount bits,
                             double cost) {
  if (!(cost >= 0.0) || !std::isfinite(cost)) {
    throw Error(ErrorCode::InvalidArgument, "post-processing cost must be finite and >= 0");
  }
  StarLink& link = topology.link(branch_id);
  link.pending_bits += bits;
  link.pending_cost += cost;
}

BacklogReport hub_cpu_step(StarTopology& topology, Seconds dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw Error(ErrorCode::InvalidArgument, "hub step length must be positive");
  }
  BacklogReport report;
  report.capacity = topology.hub().cpu_capacity_per_sec * dt;
  for (const auto& l : topology.links()) {
    report.offered_cost += l.pending_cost;
  }
  const bool overloaded = report.offered_cost > report.capacity;
  const double ratio = overloaded ? report.capacity / report.offered_cost : 1.0;

  for (auto& l : topology.links()) {
    LinkBacklog entry;
    entry.branch_id = l.branch.id;
    entry.offered_cost = l.pending_cost;
    BitCount release = l.pending_bits;
    if (overloaded) {
      if (l.pending_cost > 0.0) {
        release = static_cast<BitCount>(std::floor(static_cast<double>(l.pending_bits) * ratio));
      }
      const double processed = l.pending_cost * ratio;
      l.pending_cost -= processed;
      report.processed_cost += processed;
    } else {
      report.processed_cost += l.pending_cost;
      l.pending_cost = 0.0;
    }
    l.pending_bits -= release;
    if (release > 0) {
      pool_deposit(l.state.pool(), release);
    }
    entry.deposited_bits = release;
    entry.deferred_bits = l.pending_bits;
    entry.deferred_cost = l.pending_cost;
    report.deposited_bits += release;
    report.deferred_bits += l.pending_bits;
    report.backlog_cost += l.pending_cost;
    report.links.push_back(std::move(entry));
  }
  return report;
}

StepReport step(StarTopology& topology, Seconds now, Seconds dt) {
  StepReport report;
  report.active = schedule_channels(topology, now);
  for (const auto& id : report.active) {
    StarLink& link = topology.link(id);
    const TickYield yield = link.state.harvest(dt);
    if (yield.auth_alarm) {
      report.auth_alarms.push_back(id);
      continue;
    }
    enqueue_post_processing(topology, id, yield.secret_bits, yield.cpu_cost);
  }
  report.backlog = hub_cpu_step(topology, dt);
  for (auto& link : topology.links()) {
    report.auth_replenished_bits += replenish_auth(link.state, link.auth_target_bits);
  }
  return report;
}

}  // namespace starqkd
