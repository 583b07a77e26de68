#include "starqkd/engine.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <queue>

#include "starqkd/hybrid.hpp"
#include "starqkd/policy.hpp"
#include "starqkd/sharing.hpp"

namespace starqkd {

std::string_view to_string(EventKind kind) noexcept {
  switch (kind) {
    case EventKind::LinkTick: return "LinkTick";
    case EventKind::Rotation: return "Rotation";
    case EventKind::RelayRequest: return "RelayRequest";
    case EventKind::Refresh: return "Refresh";
    case EventKind::TrafficSend: return "TrafficSend";
    case EventKind::Report: return "Report";
  }
  return "Unknown";
}

ScenarioError::ScenarioError(std::string path, const std::string& message)
    : Error(ErrorCode::ScenarioInvalid, path + ": " + message), path_(std::move(path)) {}

namespace {

Scenario checked(Scenario s) {
  try {
    validate_scenario(s);
  } catch (const ValidationError& e) {
    throw ScenarioError(e.path(), e.what());
  }
  return s;
}

void require(bool ok, const std::string& what) {
  if (!ok) {
    throw InvariantViolation(what);
  }
}

BitCount total_consumed(const StarTopology& topo) {
  BitCount sum = 0;
  for (const auto& l : topo.links()) {
    sum += l.state.pool().total_consumed_bits();
  }
  return sum;
}

BitCount total_generated(const StarTopology& topo) {
  BitCount sum = 0;
  for (const auto& l : topo.links()) {
    sum += l.state.pool().total_generated_bits();
  }
  return sum;
}

bool is_insufficient(const Error& e) { return e.code() == ErrorCode::InsufficientKey; }

/// True while the k-th occurrence of a period still falls inside the run.
bool within(Seconds t, Seconds duration, Seconds period) { return t <= duration + 1e-9 * period; }

}  // namespace

struct Simulation::Impl {
  struct Later {
    bool operator()(const Event& a, const Event& b) const noexcept { return b < a; }
  };

  struct OtpState {
    Rng rng;
    std::uint64_t sent_bytes = 0;  // cumulative target already handled
  };
  struct RelayState {
    Rng rng;
  };
  struct SharingState {
    Rng rng;
    FieldElement secret = 0;
    std::vector<Share> shares;
    KeyPool budget;
    Seconds live_since = 0.0;
  };
  struct RotationState {
    Rng rng;
    HybridCipherState cipher;
    std::uint64_t missed = 0;
  };

  Simulation& sim;
  const Scenario& s;
  StarTopology& topo;
  MetricsReport report;
  std::priority_queue<Event, std::vector<Event>, Later> queue;
  std::uint64_t next_sequence = 0;
  std::uint64_t full_ticks = 0;
  Seconds partial_tick = 0.0;
  std::vector<OtpState> otp;
  std::vector<RelayState> relay;
  std::vector<SharingState> sharing;
  std::vector<RotationState> rotation;

  Impl(Simulation& owner)
      : sim(owner), s(owner.scenario_), topo(owner.topology_) {
    const double ticks = std::floor(s.duration_seconds / s.tick_seconds + 1e-9);
    full_ticks = static_cast<std::uint64_t>(ticks);
    const Seconds rest = s.duration_seconds - ticks * s.tick_seconds;
    partial_tick = rest > 1e-9 * s.tick_seconds ? rest : 0.0;

    for (std::size_t i = 0; i < s.otp_traffic.size(); ++i) {
      otp.push_back(OtpState{Rng(s.seed, "traffic.otp:" + std::to_string(i))});
    }
    for (std::size_t i = 0; i < s.relay_traffic.size(); ++i) {
      relay.push_back(RelayState{Rng(s.seed, "traffic.relay:" + std::to_string(i))});
    }
    for (const auto& inst : s.sharing) {
      Rng rng(s.seed, "sharing:" + inst.id);
      const ShareConfig cfg = inst.config();
      const FieldElement secret = inst.secret ? *inst.secret : rng.uniform_below(cfg.field_prime);
      auto shares = split(secret, cfg, rng);
      sharing.push_back(SharingState{std::move(rng), secret, std::move(shares),
                                     KeyPool("refresh:" + inst.id, derive_stream_seed(s.seed, "refresh:" + inst.id)),
                                     0.0});
    }
    for (const auto& spec : s.rotations) {
      Rng rng(s.seed, "hybrid:" + spec.branch);
      KeyMaterial master = KeyMaterial::random(KeyId{"master:" + spec.branch, 0}, spec.master_bits,
                                               Provenance::Master, rng);
      KeyMaterial session = KeyMaterial::random(KeyId{"session:" + spec.branch, 0}, spec.session_bits,
                                                Provenance::Session, rng);
      HybridCipherState cipher(std::move(master), std::move(session), spec.frequency_hz);
      rotation.push_back(RotationState{std::move(rng), std::move(cipher), 0});
    }

    report.scenario_name = s.name;
    report.seed = s.seed;
    report.duration_seconds = s.duration_seconds;
    report.tick_seconds = s.tick_seconds;
    report.channel_count = s.hub.channel_count;
    report.timeline = s.timeline;
    for (const auto& l : topo.links()) {
      report.links.push_back(LinkSeries{l.branch.id, l.state.raw_rate(), l.state.secret_rate(), {}});
    }
  }

  void push(Seconds time, EventKind kind, std::size_t subject, std::uint64_t occurrence) {
    queue.push(Event{time, next_sequence++, kind, subject, occurrence});
  }

  [[nodiscard]] Seconds tick_time(std::uint64_t k) const {
    return k <= full_ticks ? static_cast<double>(k) * s.tick_seconds : s.duration_seconds;
  }
  [[nodiscard]] std::uint64_t tick_count() const { return full_ticks + (partial_tick > 0.0 ? 1 : 0); }

  /// Schedules occurrence k of a periodic event, if it falls inside the run.
  void push_periodic(EventKind kind, std::size_t subject, std::uint64_t k, Seconds period) {
    const Seconds t = static_cast<double>(k) * period;
    if (within(t, s.duration_seconds, period)) {
      push(std::min(t, s.duration_seconds), kind, subject, k);
    }
  }

  void seed_queue() {
    if (tick_count() > 0) {
      push(tick_time(1), EventKind::LinkTick, 0, 1);
      for (std::size_t i = 0; i < s.otp_traffic.size(); ++i) {
        push(tick_time(1), EventKind::TrafficSend, i, 1);
      }
    }
    for (std::size_t i = 0; i < s.relay_traffic.size(); ++i) {
      push_periodic(EventKind::RelayRequest, i, 1, s.relay_traffic[i].period_seconds);
    }
    for (std::size_t i = 0; i < s.rotations.size(); ++i) {
      if (s.rotations[i].frequency_hz > 0.0) {
        push_periodic(EventKind::Rotation, i, 1, 1.0 / s.rotations[i].frequency_hz);
      }
    }
    for (std::size_t i = 0; i < s.sharing.size(); ++i) {
      push_periodic(EventKind::Refresh, i, 1, s.sharing[i].refresh_period_seconds);
    }
  }

  void on_link_tick(const Event& e) {
    const Seconds dt = e.occurrence <= full_ticks ? s.tick_seconds : partial_tick;
    const BitCount generated_before = total_generated(topo);
    const BitCount consumed_before = total_consumed(topo);

    const StepReport step_report = step(topo, e.time, dt);

    const auto sessions = static_cast<std::uint32_t>(step_report.active.size());
    const auto flagged = std::count_if(topo.links().begin(), topo.links().end(),
                                       [](const StarLink& l) { return l.active; });
    require(sessions <= s.hub.channel_count && static_cast<std::size_t>(flagged) == sessions,
            "more active sessions than hub channels at t=" + std::to_string(e.time));
    require(total_generated(topo) - generated_before == step_report.backlog.deposited_bits,
            "tick deposits disagree with the hub queue");
    require(total_consumed(topo) - consumed_before == step_report.auth_replenished_bits,
            "tick consumed more than the authentication top-up");
    sim.sessions_per_tick_.push_back(sessions);
    report.max_active_sessions = std::max(report.max_active_sessions, sessions);
    report.consumption.auth += step_report.auth_replenished_bits;

    for (const auto& id : step_report.auth_alarms) {
      report.auth_alarms.push_back(AuthAlarm{e.time, id});
    }
    const auto& links = topo.links();
    for (std::size_t i = 0; i < links.size(); ++i) {
      const auto& l = links[i];
      require(l.state.pool().conserved(), "pool " + l.branch.id + " lost conservation");
      report.links[i].samples.push_back(LinkSample{e.time, l.active, step_report.backlog.links[i].deposited_bits,
                                                   l.state.pool().available_bits(),
                                                   l.state.pool().total_generated_bits(), l.pending_bits,
                                                   l.state.auth().reserved_bits});
    }
    report.hub.push_back(HubSample{e.time, sessions, step_report.backlog.offered_cost,
                                   step_report.backlog.processed_cost, step_report.backlog.backlog_cost});

    if (e.occurrence < tick_count()) {
      push(tick_time(e.occurrence + 1), EventKind::LinkTick, 0, e.occurrence + 1);
    }
  }

  void on_traffic(const Event& e) {
    const OtpDemand& d = s.otp_traffic[e.subject];
    OtpState& st = otp[e.subject];
    const auto target = static_cast<std::uint64_t>(std::floor(d.bits_per_sec * e.time / 8.0));
    const std::uint64_t bytes = target > st.sent_bytes ? target - st.sent_bytes : 0;
    st.sent_bytes = std::max(st.sent_bytes, target);

    if (bytes > 0) {
      const BitCount bits = bytes * 8;
      std::vector<std::uint8_t> message(bytes);
      st.rng.fill_bytes(message);
      const BitCount before = total_consumed(topo);
      try {
        std::vector<std::uint8_t> recovered;
        BitCount charged = 0;
        if (d.to == s.hub.id) {
          KeyMaterial sender = pool_draw(topo.link(d.from).state.pool(), bits, Provenance::Quantum, e.time);
          KeyMaterial receiver = sender;
          recovered = otp_decrypt(receiver, otp_encrypt(sender, message));
          charged = bits;
        } else {
          RelayResult r = relay_key(topo, d.from, d.to, bits, st.rng, e.time);
          require(r.key_i.same_bits(r.key_j), "relayed OTP key differs between endpoints");
          recovered = otp_decrypt(r.key_j, otp_encrypt(r.key_i, message));
          charged = 2 * bits;
        }
        require(recovered == message, "one-time pad round trip failed");
        require(total_consumed(topo) - before == charged, "OTP traffic consumed an unexpected amount");
        report.consumption.otp += charged;
      } catch (const Error& err) {
        if (!is_insufficient(err)) {
          throw;
        }
        require(total_consumed(topo) == before, "failed OTP send touched a pool");
        report.unmet_demand.push_back(UnmetDemand{e.time, "otp", d.from, d.to, bits});
      }
    }
    if (e.occurrence < tick_count()) {
      push(tick_time(e.occurrence + 1), EventKind::TrafficSend, e.subject, e.occurrence + 1);
    }
  }

  void on_relay(const Event& e) {
    const RelayDemand& d = s.relay_traffic[e.subject];
    const BitCount before = total_consumed(topo);
    try {
      RelayResult r = relay_key(topo, d.from, d.to, d.bits, relay[e.subject].rng, e.time);
      require(r.key_i.same_bits(r.key_j) && r.key_i.id() == r.key_j.id(),
              "relay delivered different keys");
      require(total_consumed(topo) - before == 2 * d.bits, "relay consumed an unexpected amount");
      report.consumption.relay += 2 * d.bits;
      report.relays.push_back(std::move(r.record));
    } catch (const Error& err) {
      if (!is_insufficient(err)) {
        throw;
      }
      require(total_consumed(topo) == before, "failed relay touched a pool");
      report.unmet_demand.push_back(UnmetDemand{e.time, "relay", d.from, d.to, d.bits});
    }
    push_periodic(EventKind::RelayRequest, e.subject, e.occurrence + 1, d.period_seconds);
  }

  void on_rotation(const Event& e) {
    const RotationSpec& spec = s.rotations[e.subject];
    RotationState& st = rotation[e.subject];
    KeyPool& pool = topo.link(spec.branch).state.pool();
    if (pool.available_bits() < spec.master_bits) {
      ++st.missed;
      report.unmet_demand.push_back(UnmetDemand{e.time, "rotation", spec.branch, s.hub.id, spec.master_bits});
    } else {
      const std::uint64_t count = st.cipher.rotation_count();
      KeyMaterial k_q = pool_draw(pool, spec.master_bits, Provenance::Quantum, e.time);
      rotate_master(st.cipher, k_q, e.time);
      require(k_q.consumed() && st.cipher.rotation_count() == count + 1, "rotation did not take effect");
      std::vector<std::uint8_t> probe(32);
      st.rng.fill_bytes(probe);
      require(decrypt_hybrid(st.cipher, encrypt_hybrid(st.cipher, probe)) == probe,
              "hybrid cipher round trip failed");
      report.consumption.rotation += spec.master_bits;
    }
    push_periodic(EventKind::Rotation, e.subject, e.occurrence + 1, 1.0 / spec.frequency_hz);
  }

  void on_refresh(const Event& e) {
    const SharingInstance& inst = s.sharing[e.subject];
    SharingState& st = sharing[e.subject];
    const ShareConfig cfg = inst.config();
    const BitCount enc = cfg.share_encoding_bits();
    const BitCount per_location = 2 * (cfg.n_locations - 1) * enc;
    const BitCount link_cost = 2 * cfg.refresh_cost_bits();

    const bool affordable = std::all_of(inst.locations.begin(), inst.locations.end(), [&](const std::string& id) {
      return topo.link(id).state.pool().available_bits() >= per_location;
    });
    if (!affordable) {
      report.unmet_demand.push_back(UnmetDemand{e.time, "refresh", inst.id, s.hub.id, link_cost});
    } else {
      const BitCount before = total_consumed(topo);
      // One relayed pad per ordered pair carries one sub-share.
      for (const auto& from : inst.locations) {
        for (const auto& to : inst.locations) {
          if (from != to) {
            (void)relay_key(topo, from, to, enc, st.rng, e.time);
          }
        }
      }
      pool_deposit(st.budget, cfg.refresh_cost_bits());
      const std::uint64_t round = st.shares.front().round;
      st.shares = refresh(st.shares, cfg, st.rng, st.budget);
      require(total_consumed(topo) - before == link_cost, "refresh consumed an unexpected amount");
      require(st.budget.available_bits() == 0 && st.budget.conserved(), "refresh budget not spent exactly");
      require(st.shares.front().round == round + 1, "refresh did not advance the round");
      const std::span<const Share> all(st.shares);
      require(reconstruct(all.first(cfg.threshold_k), cfg) == st.secret &&
                  reconstruct(all.last(cfg.threshold_k), cfg) == st.secret,
              "refresh changed the shared secret");
      report.consumption.refresh += link_cost;
      report.refreshes.push_back(RefreshRecord{e.time, inst.id, round + 1, link_cost, st.live_since, e.time});
      st.live_since = e.time;
    }
    push_periodic(EventKind::Refresh, e.subject, e.occurrence + 1, inst.refresh_period_seconds);
  }

  void on_report() {
    const PolicyMatrix matrix = s.effective_matrix();
    for (const auto& asset : s.assets) {
      const Recommendation rec = recommend(asset, matrix, s.attacker);
      AssetReport a;
      a.asset_id = rec.asset_id;
      a.technique = std::string(technique_name(rec.technique));
      if (const auto* h = std::get_if<Hybrid>(&rec.technique)) {
        a.rotation_frequency_hz = h->rotation_frequency_hz;
      }
      a.t_s_seconds = rec.horizon.t_s_seconds;
      a.t_sq_seconds = rec.horizon.t_sq_seconds;
      a.horizon_model = rec.horizon.model_id;
      a.feasible = rec.feasible;
      a.escalated = rec.escalated;
      a.secret_sharing = rec.use_secret_sharing;
      a.store_now_decrypt_later = rec.store_now_decrypt_later_exposure;
      a.notes = rec.notes;
      report.assets.push_back(std::move(a));
    }
    for (std::size_t i = 0; i < s.rotations.size(); ++i) {
      const RotationState& st = rotation[i];
      const SecurityHorizon h = estimate_t_sq(st.cipher, s.attacker, s.duration_seconds);
      report.rotations.push_back(RotationSummary{s.rotations[i].branch, s.rotations[i].frequency_hz,
                                                 st.cipher.rotation_count(), st.missed,
                                                 st.cipher.master()->id().str(), h.t_s_seconds,
                                                 h.t_sq_seconds});
    }
    if (s.timeline) {
      report.mosca_at_risk = mosca_at_risk(*s.timeline);
    }

    ConsumptionLedger& c = report.consumption;
    c.generated = total_generated(topo);
    c.pool_residue = 0;
    for (const auto& l : topo.links()) {
      c.pool_residue += l.state.pool().available_bits();
    }
    require(c.consumed() == total_consumed(topo), "consumption categories do not cover the pools");
    require(c.balanced(), "generated bits are not accounted for");
  }

  void execute(const Event& e) {
    if (!sim.trace_.empty()) {
      require(sim.trace_.back() < e, "event executed out of (time, sequence) order");
    }
    sim.trace_.push_back(e);
    switch (e.kind) {
      case EventKind::LinkTick: on_link_tick(e); break;
      case EventKind::TrafficSend: on_traffic(e); break;
      case EventKind::RelayRequest: on_relay(e); break;
      case EventKind::Rotation: on_rotation(e); break;
      case EventKind::Refresh: on_refresh(e); break;
      case EventKind::Report: on_report(); break;
    }
  }

  MetricsReport run() {
    seed_queue();
    while (!queue.empty()) {
      const Event e = queue.top();
      queue.pop();
      execute(e);
    }
    execute(Event{s.duration_seconds, next_sequence++, EventKind::Report, 0, 1});
    report.events_processed = sim.trace_.size();
    return std::move(report);
  }
};

Simulation::Simulation(Scenario scenario)
    : scenario_(checked(std::move(scenario))),
      topology_(build_star(scenario_.hub, scenario_.branches, scenario_.seed)) {}

MetricsReport Simulation::run() {
  if (ran_) {
    throw Error(ErrorCode::InvalidArgument, "a simulation runs only once");
  }
  ran_ = true;
  Impl impl(*this);
  return impl.run();
}

MetricsReport run(const Scenario& scenario) { return Simulation(scenario).run(); }

}  // namespace starqkd
