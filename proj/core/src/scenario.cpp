#include "starqkd/scenario.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <set>
#include <sstream>

#include "starqkd/error.hpp"

namespace starqkd {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

struct Context {
  bool strict = true;
  std::vector<std::string>* warnings = nullptr;
};

std::string join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

std::string index_path(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

/// Typed, path-tracking access to one JSON object. Every key read is
/// remembered so finish() can reject (or warn about) the rest.
class Reader {
 public:
  Reader(const json& value, std::string path, Context& ctx)
      : value_(value), path_(std::move(path)), ctx_(ctx) {
    if (!value_.is_object()) {
      throw ValidationError(path_.empty() ? "<root>" : path_, "expected an object");
    }
  }

  [[nodiscard]] const std::string& path() const noexcept { return path_; }

  const json* find(std::string_view key) {
    seen_.emplace(key);
    const auto it = value_.find(std::string(key));
    return it == value_.end() ? nullptr : &*it;
  }

  const json& require(std::string_view key) {
    const json* v = find(key);
    if (v == nullptr) {
      throw ValidationError(join(path_, key), "required field is missing");
    }
    return *v;
  }

  double number(std::string_view key, std::optional<double> fallback,
                const std::function<bool(double)>& ok = {}, std::string_view rule = "") {
    const json* v = fallback ? find(key) : &require(key);
    if (v == nullptr) {
      return *fallback;
    }
    if (!v->is_number()) {
      throw ValidationError(join(path_, key), "expected a number");
    }
    const double d = v->get<double>();
    if (!std::isfinite(d) || (ok && !ok(d))) {
      throw ValidationError(join(path_, key), rule.empty() ? "value out of range" : std::string(rule));
    }
    return d;
  }

  std::uint64_t unsigned_int(std::string_view key, std::optional<std::uint64_t> fallback,
                             std::uint64_t min = 0,
                             std::uint64_t max = std::numeric_limits<std::uint64_t>::max()) {
    const json* v = fallback ? find(key) : &require(key);
    if (v == nullptr) {
      return *fallback;
    }
    if (!v->is_number_integer() || (v->is_number_integer() && !v->is_number_unsigned() && v->get<std::int64_t>() < 0)) {
      throw ValidationError(join(path_, key), "expected a non-negative integer");
    }
    const auto u = v->get<std::uint64_t>();
    if (u < min || u > max) {
      throw ValidationError(join(path_, key), "must lie in [" + std::to_string(min) + ", " +
                                                  std::to_string(max) + "]");
    }
    return u;
  }

  std::string string(std::string_view key, std::optional<std::string> fallback) {
    const json* v = fallback ? find(key) : &require(key);
    if (v == nullptr) {
      return *fallback;
    }
    if (!v->is_string()) {
      throw ValidationError(join(path_, key), "expected a string");
    }
    return v->get<std::string>();
  }

  bool boolean(std::string_view key, bool fallback) {
    const json* v = find(key);
    if (v == nullptr) {
      return fallback;
    }
    if (!v->is_boolean()) {
      throw ValidationError(join(path_, key), "expected true or false");
    }
    return v->get<bool>();
  }

  void finish() {
    for (const auto& [key, unused] : value_.items()) {
      (void)unused;
      if (seen_.contains(key)) {
        continue;
      }
      if (ctx_.strict) {
        throw ValidationError(join(path_, key), "unknown field");
      }
      if (ctx_.warnings != nullptr) {
        ctx_.warnings->push_back(join(path_, key) + ": unknown field ignored");
      }
    }
  }

 private:
  const json& value_;
  std::string path_;
  Context& ctx_;
  std::set<std::string, std::less<>> seen_;
};

const json& require_array(const json& v, const std::string& path) {
  if (!v.is_array()) {
    throw ValidationError(path, "expected an array");
  }
  return v;
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    // e.byte is the 1-based offset of the offending character.
    std::size_t line = 1;
    std::size_t column = 1;
    const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    std::string what = e.what();
    const auto colon = what.rfind(": ");
    throw ParseError(line, column, colon == std::string::npos ? what : what.substr(colon + 2));
  }
}

auto positive = [](double d) { return d > 0.0; };
auto non_negative = [](double d) { return d >= 0.0; };
auto unit_interval = [](double d) { return d > 0.0 && d <= 1.0; };

LinkParams read_link(const json& v, const std::string& path, Context& ctx) {
  Reader r(v, path, ctx);
  LinkParams p;
  p.distance_km = r.number("distance_km", p.distance_km, non_negative, "must be >= 0");
  p.attenuation_db_per_km = r.number("attenuation_db_per_km", p.attenuation_db_per_km, positive, "must be > 0");
  p.source_rate_hz = r.number("source_rate_hz", p.source_rate_hz, positive, "must be > 0");
  p.detector_efficiency = r.number("detector_efficiency", p.detector_efficiency, unit_interval, "must lie in (0, 1]");
  p.sifting_factor = r.number("sifting_factor", p.sifting_factor, unit_interval, "must lie in (0, 1]");
  p.qber = r.number("qber", p.qber, [](double d) { return d >= 0.0 && d <= 0.5; }, "must lie in [0, 0.5]");
  r.finish();
  return p;
}

BranchSpec read_branch(const json& v, const std::string& path, Context& ctx) {
  Reader r(v, path, ctx);
  BranchSpec b;
  b.id = r.string("id", std::nullopt);
  if (b.id.empty()) {
    throw ValidationError(join(path, "id"), "must not be empty");
  }
  if (const json* link = r.find("link")) {
    b.link = read_link(*link, join(path, "link"), ctx);
  }
  if (const json* post = r.find("post_processing")) {
    Reader pr(*post, join(path, "post_processing"), ctx);
    b.post.cpu_cost_per_raw_bit =
        pr.number("cpu_cost_per_raw_bit", b.post.cpu_cost_per_raw_bit, non_negative, "must be >= 0");
    b.post.messages_per_round = static_cast<std::uint32_t>(
        pr.unsigned_int("messages_per_round", b.post.messages_per_round, 1, 1U << 20U));
    pr.finish();
  }
  b.tag_cost_bits = r.unsigned_int("tag_cost_bits", b.tag_cost_bits, 1);
  b.auth_reserve_bits = r.unsigned_int("auth_reserve_bits", b.auth_reserve_bits);
  b.pool_target_bits = r.unsigned_int("pool_target_bits", b.pool_target_bits, 1);
  b.capex = r.number("capex", b.capex, non_negative, "must be >= 0");
  r.finish();
  return b;
}

AttackerModel read_attacker(const json& v, const std::string& path, Context& ctx) {
  Reader r(v, path, ctx);
  AttackerModel a;
  a.classical_ops_per_sec = r.number("classical_ops_per_sec", a.classical_ops_per_sec, positive, "must be > 0");
  a.has_quantum = r.boolean("has_quantum", a.has_quantum);
  a.records_traffic = r.boolean("records_traffic", a.records_traffic);
  r.finish();
  return a;
}

MigrationTimeline read_timeline(const json& v, const std::string& path, Context& ctx) {
  Reader r(v, path, ctx);
  MigrationTimeline t;
  t.x_years = r.number("x_years", std::nullopt, non_negative, "must be >= 0");
  t.y_years = r.number("y_years", std::nullopt, non_negative, "must be >= 0");
  t.z_years = r.number("z_years", std::nullopt, non_negative, "must be >= 0");
  r.finish();
  return t;
}

Technique read_technique(const json& v, const std::string& path, Context& ctx) {
  Reader r(v, path, ctx);
  const std::string kind = r.string("kind", std::nullopt);
  Technique t;
  if (kind == "ClassicalPublicKey") {
    ClassicalPublicKey pk;
    pk.security_bits = r.unsigned_int("security_bits", pk.security_bits, 1);
    t = pk;
  } else if (kind == "PostQuantum") {
    PostQuantum pq;
    pq.security_bits = r.unsigned_int("security_bits", pq.security_bits, 1);
    t = pq;
  } else if (kind == "Hybrid") {
    Hybrid h;
    h.master_bits = r.unsigned_int("master_bits", h.master_bits, 1);
    h.session_bits = r.unsigned_int("session_bits", h.session_bits, 1);
    h.quantum_bits = r.unsigned_int("quantum_bits", h.quantum_bits, 1);
    h.rotation_frequency_hz = r.number("rotation_frequency_hz", h.rotation_frequency_hz, non_negative, "must be >= 0");
    t = h;
  } else if (kind == "QkdOtp") {
    t = QkdOtp{};
  } else {
    throw ValidationError(join(path, "kind"), "unknown technique '" + kind + "'");
  }
  r.finish();
  return t;
}

PolicyMatrix read_matrix(const json& v, const std::string& path, Context& ctx) {
  Reader r(v, path, ctx);
  PolicyMatrix m;
  m.m_c = static_cast<std::uint32_t>(r.unsigned_int("m_c", std::nullopt, 2, 1000));
  m.k_t = static_cast<std::uint32_t>(r.unsigned_int("k_t", std::nullopt, 2, 1000));
  const std::string cells_path = join(path, "cells");
  const json& cells = require_array(r.require("cells"), cells_path);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const std::string cp = index_path(cells_path, i);
    Reader cr(cells[i], cp, ctx);
    const auto c = static_cast<std::uint32_t>(cr.unsigned_int("c", std::nullopt, 1, m.m_c));
    const auto t = static_cast<std::uint32_t>(cr.unsigned_int("t", std::nullopt, 1, m.k_t));
    const Technique tech = read_technique(cr.require("technique"), join(cp, "technique"), ctx);
    cr.finish();
    if (!m.cells.emplace(CellIndex{c, t}, tech).second) {
      throw ValidationError(cp, "cell (" + std::to_string(c) + "," + std::to_string(t) + ") given twice");
    }
  }
  r.finish();
  const auto violations = validate_matrix(m);
  if (!violations.empty()) {
    throw ValidationError(path, violations.front().message);
  }
  return m;
}

DataState parse_data_state(const std::string& s, const std::string& path) {
  if (s == "AtRest") return DataState::AtRest;
  if (s == "InMotion") return DataState::InMotion;
  if (s == "InUse") return DataState::InUse;
  throw ValidationError(path, "expected AtRest, InMotion or InUse");
}

std::vector<InfoAsset> read_assets(const json& v, const std::string& path, Context& ctx,
                                   std::uint32_t m_c, std::uint32_t k_t) {
  const json& arr = require_array(v, path);
  std::vector<InfoAsset> assets;
  std::set<std::string> ids;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string ap = index_path(path, i);
    Reader r(arr[i], ap, ctx);
    InfoAsset a;
    a.id = r.string("id", std::nullopt);
    if (!ids.insert(a.id).second) {
      throw ValidationError(join(ap, "id"), "duplicate asset id '" + a.id + "'");
    }
    a.sensitivity_index = static_cast<std::uint32_t>(r.unsigned_int("sensitivity_index", std::nullopt, 1, m_c));
    a.time_index = static_cast<std::uint32_t>(r.unsigned_int("time_index", std::nullopt, 1, k_t));
    a.size_bytes = r.unsigned_int("size_bytes", a.size_bytes);
    a.lifetime_seconds = r.number("lifetime_seconds", std::nullopt, non_negative, "must be >= 0");
    a.data_state = parse_data_state(r.string("data_state", "InMotion"), join(ap, "data_state"));
    r.finish();
    assets.push_back(std::move(a));
  }
  return assets;
}

ordered_json link_to_json(const LinkParams& p) {
  ordered_json j;
  j["distance_km"] = p.distance_km;
  j["attenuation_db_per_km"] = p.attenuation_db_per_km;
  j["source_rate_hz"] = p.source_rate_hz;
  j["detector_efficiency"] = p.detector_efficiency;
  j["sifting_factor"] = p.sifting_factor;
  j["qber"] = p.qber;
  return j;
}

ordered_json attacker_to_json(const AttackerModel& a) {
  ordered_json j;
  j["classical_ops_per_sec"] = a.classical_ops_per_sec;
  j["has_quantum"] = a.has_quantum;
  j["records_traffic"] = a.records_traffic;
  return j;
}

ordered_json timeline_to_json(const MigrationTimeline& t) {
  ordered_json j;
  j["x_years"] = t.x_years;
  j["y_years"] = t.y_years;
  j["z_years"] = t.z_years;
  return j;
}

}  // namespace

PolicyMatrix Scenario::effective_matrix() const {
  return matrix ? *matrix : default_matrix(policy_m_c, policy_k_t);
}

IngestResult parse_scenario(std::string_view text, const IngestOptions& options) {
  const json doc = parse_json(text);
  IngestResult result;
  Context ctx{options.strict, &result.warnings};
  Scenario& s = result.scenario;

  Reader r(doc, "", ctx);
  s.format_version = static_cast<std::uint32_t>(
      r.unsigned_int("format_version", kScenarioFormatVersion, kScenarioFormatVersion, kScenarioFormatVersion));
  s.name = r.string("name", s.name);
  s.seed = r.unsigned_int("seed", s.seed);
  s.duration_seconds = r.number("duration_seconds", std::nullopt, positive, "must be > 0");
  s.tick_seconds = r.number("tick_seconds", s.tick_seconds, positive, "must be > 0");

  if (const json* hub = r.find("hub")) {
    Reader hr(*hub, "hub", ctx);
    s.hub.id = hr.string("id", s.hub.id);
    s.hub.channel_count = static_cast<std::uint32_t>(hr.unsigned_int("channel_count", s.hub.channel_count, 1, 1U << 16U));
    s.hub.cpu_capacity_per_sec = hr.number("cpu_capacity_per_sec", s.hub.cpu_capacity_per_sec, positive, "must be > 0");
    s.hub.capex = hr.number("capex", s.hub.capex, non_negative, "must be >= 0");
    hr.finish();
  }

  const json& branches = require_array(r.require("branches"), "branches");
  for (std::size_t i = 0; i < branches.size(); ++i) {
    s.branches.push_back(read_branch(branches[i], index_path("branches", i), ctx));
  }

  if (const json* a = r.find("attacker")) {
    s.attacker = read_attacker(*a, "attacker", ctx);
  }
  if (const json* t = r.find("timeline")) {
    s.timeline = read_timeline(*t, "timeline", ctx);
  }
  if (const json* p = r.find("policy")) {
    Reader pr(*p, "policy", ctx);
    s.policy_m_c = static_cast<std::uint32_t>(pr.unsigned_int("m_c", s.policy_m_c, 2, 1000));
    s.policy_k_t = static_cast<std::uint32_t>(pr.unsigned_int("k_t", s.policy_k_t, 2, 1000));
    if (const json* m = pr.find("matrix")) {
      s.matrix = read_matrix(*m, "policy.matrix", ctx);
      if (s.matrix->m_c != s.policy_m_c || s.matrix->k_t != s.policy_k_t) {
        throw ValidationError("policy.matrix", "dimensions differ from policy.m_c/k_t");
      }
    }
    pr.finish();
  }
  if (const json* a = r.find("assets")) {
    s.assets = read_assets(*a, "assets", ctx, s.policy_m_c, s.policy_k_t);
  }
  if (const json* t = r.find("traffic")) {
    Reader tr(*t, "traffic", ctx);
    if (const json* otp = tr.find("otp")) {
      const json& arr = require_array(*otp, "traffic.otp");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        Reader dr(arr[i], index_path("traffic.otp", i), ctx);
        OtpDemand d;
        d.from = dr.string("from", std::nullopt);
        d.to = dr.string("to", std::nullopt);
        d.bits_per_sec = dr.number("bits_per_sec", std::nullopt, non_negative, "must be >= 0");
        dr.finish();
        s.otp_traffic.push_back(std::move(d));
      }
    }
    if (const json* relay = tr.find("relay")) {
      const json& arr = require_array(*relay, "traffic.relay");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        Reader dr(arr[i], index_path("traffic.relay", i), ctx);
        RelayDemand d;
        d.from = dr.string("from", std::nullopt);
        d.to = dr.string("to", std::nullopt);
        d.bits = dr.unsigned_int("bits", std::nullopt, 1);
        d.period_seconds = dr.number("period_seconds", std::nullopt, positive, "must be > 0");
        dr.finish();
        s.relay_traffic.push_back(std::move(d));
      }
    }
    tr.finish();
  }
  if (const json* sh = r.find("sharing")) {
    const json& arr = require_array(*sh, "sharing");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string sp = index_path("sharing", i);
      Reader dr(arr[i], sp, ctx);
      SharingInstance inst;
      inst.id = dr.string("id", std::nullopt);
      const json& locs = require_array(dr.require("locations"), join(sp, "locations"));
      for (std::size_t k = 0; k < locs.size(); ++k) {
        if (!locs[k].is_string()) {
          throw ValidationError(index_path(join(sp, "locations"), k), "expected a branch id");
        }
        inst.locations.push_back(locs[k].get<std::string>());
      }
      inst.threshold = static_cast<std::uint32_t>(dr.unsigned_int("threshold", inst.threshold, 1, 1U << 16U));
      inst.field_prime = dr.unsigned_int("field_prime", inst.field_prime, 2);
      inst.refresh_period_seconds = dr.number("refresh_period_seconds", std::nullopt, positive, "must be > 0");
      if (dr.find("secret") != nullptr) {
        inst.secret = dr.unsigned_int("secret", std::nullopt);
      }
      dr.finish();
      s.sharing.push_back(std::move(inst));
    }
  }
  if (const json* rot = r.find("rotations")) {
    const json& arr = require_array(*rot, "rotations");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      Reader dr(arr[i], index_path("rotations", i), ctx);
      RotationSpec spec;
      spec.branch = dr.string("branch", std::nullopt);
      spec.frequency_hz = dr.number("frequency_hz", std::nullopt, non_negative, "must be >= 0");
      spec.master_bits = dr.unsigned_int("master_bits", spec.master_bits, 1, 1U << 20U);
      spec.session_bits = dr.unsigned_int("session_bits", spec.session_bits, 1, 1U << 20U);
      dr.finish();
      s.rotations.push_back(std::move(spec));
    }
  }
  r.finish();
  validate_scenario(s);
  return result;
}

void validate_scenario(const Scenario& s) {
  if (!(s.duration_seconds > 0.0) || !std::isfinite(s.duration_seconds)) {
    throw ValidationError("duration_seconds", "must be > 0");
  }
  if (!(s.tick_seconds > 0.0) || !std::isfinite(s.tick_seconds)) {
    throw ValidationError("tick_seconds", "must be > 0");
  }
  if (s.hub.id.empty()) {
    throw ValidationError("hub.id", "must not be empty");
  }
  if (s.branches.empty()) {
    throw ValidationError("branches", "at least one branch is required");
  }
  std::set<std::string> branch_ids;
  for (std::size_t i = 0; i < s.branches.size(); ++i) {
    const auto& b = s.branches[i];
    if (b.id == s.hub.id || !branch_ids.insert(b.id).second) {
      throw ValidationError(index_path("branches", i) + ".id", "duplicate id '" + b.id + "'");
    }
    const auto& l = b.link;
    const std::string link_path = index_path("branches", i) + ".link.";
    auto check = [&](bool ok, const char* field, const char* why) {
      if (!ok) throw ValidationError(link_path + field, why);
    };
    check(std::isfinite(l.distance_km) && l.distance_km >= 0.0, "distance_km", "must be >= 0");
    check(std::isfinite(l.attenuation_db_per_km) && l.attenuation_db_per_km > 0.0, "attenuation_db_per_km",
          "must be > 0");
    check(std::isfinite(l.source_rate_hz) && l.source_rate_hz > 0.0, "source_rate_hz", "must be > 0");
    check(l.detector_efficiency > 0.0 && l.detector_efficiency <= 1.0, "detector_efficiency", "must lie in (0, 1]");
    check(l.sifting_factor > 0.0 && l.sifting_factor <= 1.0, "sifting_factor", "must lie in (0, 1]");
    check(l.qber >= 0.0 && l.qber <= 0.5, "qber", "must lie in [0, 0.5]");
  }
  auto is_branch = [&](const std::string& id) { return branch_ids.contains(id); };

  for (std::size_t i = 0; i < s.assets.size(); ++i) {
    const auto& a = s.assets[i];
    const std::string ap = index_path("assets", i);
    if (a.sensitivity_index < 1 || a.sensitivity_index > s.policy_m_c) {
      throw ValidationError(ap + ".sensitivity_index", "outside [1, policy.m_c]");
    }
    if (a.time_index < 1 || a.time_index > s.policy_k_t) {
      throw ValidationError(ap + ".time_index", "outside [1, policy.k_t]");
    }
  }
  for (std::size_t i = 0; i < s.otp_traffic.size(); ++i) {
    const auto& d = s.otp_traffic[i];
    const std::string dp = index_path("traffic.otp", i);
    if (!is_branch(d.from)) {
      throw ValidationError(dp + ".from", "unknown branch '" + d.from + "'");
    }
    if (!is_branch(d.to) && d.to != s.hub.id) {
      throw ValidationError(dp + ".to", "unknown node '" + d.to + "'");
    }
    if (d.from == d.to) {
      throw ValidationError(dp + ".to", "source and destination are the same");
    }
  }
  for (std::size_t i = 0; i < s.relay_traffic.size(); ++i) {
    const auto& d = s.relay_traffic[i];
    const std::string dp = index_path("traffic.relay", i);
    if (!is_branch(d.from)) {
      throw ValidationError(dp + ".from", "unknown branch '" + d.from + "'");
    }
    if (!is_branch(d.to)) {
      throw ValidationError(dp + ".to", "unknown branch '" + d.to + "'");
    }
    if (d.from == d.to) {
      throw ValidationError(dp + ".to", "relay endpoints must differ");
    }
  }
  std::set<std::string> sharing_ids;
  for (std::size_t i = 0; i < s.sharing.size(); ++i) {
    const auto& inst = s.sharing[i];
    const std::string sp = index_path("sharing", i);
    if (!sharing_ids.insert(inst.id).second) {
      throw ValidationError(sp + ".id", "duplicate sharing id '" + inst.id + "'");
    }
    std::set<std::string> locs;
    for (std::size_t k = 0; k < inst.locations.size(); ++k) {
      const std::string lp = index_path(sp + ".locations", k);
      if (!is_branch(inst.locations[k])) {
        throw ValidationError(lp, "unknown branch '" + inst.locations[k] + "'");
      }
      if (!locs.insert(inst.locations[k]).second) {
        throw ValidationError(lp, "location listed twice");
      }
    }
    if (inst.locations.size() < 2) {
      throw ValidationError(sp + ".locations", "at least two locations are required");
    }
    if (inst.threshold < 1 || inst.threshold > inst.locations.size()) {
      throw ValidationError(sp + ".threshold", "must lie in [1, number of locations]");
    }
    try {
      inst.config().validate();
    } catch (const Error& e) {
      throw ValidationError(sp + ".field_prime", e.what());
    }
    if (inst.secret && *inst.secret >= inst.field_prime) {
      throw ValidationError(sp + ".secret", "must be smaller than field_prime");
    }
    if (!(inst.refresh_period_seconds > 0.0)) {
      throw ValidationError(sp + ".refresh_period_seconds", "must be > 0");
    }
  }
  std::set<std::string> rotated;
  for (std::size_t i = 0; i < s.rotations.size(); ++i) {
    const auto& spec = s.rotations[i];
    const std::string rp = index_path("rotations", i);
    if (!is_branch(spec.branch)) {
      throw ValidationError(rp + ".branch", "unknown branch '" + spec.branch + "'");
    }
    if (!rotated.insert(spec.branch).second) {
      throw ValidationError(rp + ".branch", "branch already has a rotation schedule");
    }
    if (!(spec.frequency_hz >= 0.0) || !std::isfinite(spec.frequency_hz)) {
      throw ValidationError(rp + ".frequency_hz", "must be >= 0");
    }
    if (spec.master_bits == 0 || spec.session_bits == 0) {
      throw ValidationError(rp, "key sizes must be positive");
    }
  }
  if (s.matrix) {
    const auto violations = validate_matrix(*s.matrix);
    if (!violations.empty()) {
      throw ValidationError("policy.matrix", violations.front().message);
    }
  }
}

IngestResult ingest_scenario(const std::filesystem::path& path, const IngestOptions& options) {
  return parse_scenario(read_text_file(path), options);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::IoError, "cannot open " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

ordered_json technique_to_json(const Technique& technique) {
  ordered_json j;
  j["kind"] = std::string(technique_name(technique));
  if (const auto* pk = std::get_if<ClassicalPublicKey>(&technique)) {
    j["security_bits"] = pk->security_bits;
  } else if (const auto* pq = std::get_if<PostQuantum>(&technique)) {
    j["security_bits"] = pq->security_bits;
  } else if (const auto* h = std::get_if<Hybrid>(&technique)) {
    j["master_bits"] = h->master_bits;
    j["session_bits"] = h->session_bits;
    j["quantum_bits"] = h->quantum_bits;
    j["rotation_frequency_hz"] = h->rotation_frequency_hz;
  }
  return j;
}

ordered_json matrix_to_json(const PolicyMatrix& matrix) {
  ordered_json j;
  j["m_c"] = matrix.m_c;
  j["k_t"] = matrix.k_t;
  ordered_json cells = ordered_json::array();
  for (const auto& [idx, tech] : matrix.cells) {
    ordered_json cell;
    cell["c"] = idx.first;
    cell["t"] = idx.second;
    cell["technique"] = technique_to_json(tech);
    cells.push_back(std::move(cell));
  }
  j["cells"] = std::move(cells);
  return j;
}

ordered_json asset_to_json(const InfoAsset& a) {
  ordered_json j;
  j["id"] = a.id;
  j["sensitivity_index"] = a.sensitivity_index;
  j["time_index"] = a.time_index;
  j["size_bytes"] = a.size_bytes;
  j["lifetime_seconds"] = a.lifetime_seconds;
  j["data_state"] = std::string(to_string(a.data_state));
  return j;
}

ordered_json scenario_to_json(const Scenario& s) {
  ordered_json j;
  j["format_version"] = s.format_version;
  j["name"] = s.name;
  j["seed"] = s.seed;
  j["duration_seconds"] = s.duration_seconds;
  j["tick_seconds"] = s.tick_seconds;
  j["hub"] = {{"id", s.hub.id},
              {"channel_count", s.hub.channel_count},
              {"cpu_capacity_per_sec", s.hub.cpu_capacity_per_sec},
              {"capex", s.hub.capex}};
  ordered_json branches = ordered_json::array();
  for (const auto& b : s.branches) {
    ordered_json bj;
    bj["id"] = b.id;
    bj["link"] = link_to_json(b.link);
    bj["post_processing"] = {{"cpu_cost_per_raw_bit", b.post.cpu_cost_per_raw_bit},
                             {"messages_per_round", b.post.messages_per_round}};
    bj["tag_cost_bits"] = b.tag_cost_bits;
    bj["auth_reserve_bits"] = b.auth_reserve_bits;
    bj["pool_target_bits"] = b.pool_target_bits;
    bj["capex"] = b.capex;
    branches.push_back(std::move(bj));
  }
  j["branches"] = std::move(branches);
  j["attacker"] = attacker_to_json(s.attacker);
  if (s.timeline) {
    j["timeline"] = timeline_to_json(*s.timeline);
  }
  ordered_json policy;
  policy["m_c"] = s.policy_m_c;
  policy["k_t"] = s.policy_k_t;
  if (s.matrix) {
    policy["matrix"] = matrix_to_json(*s.matrix);
  }
  j["policy"] = std::move(policy);
  ordered_json assets = ordered_json::array();
  for (const auto& a : s.assets) {
    assets.push_back(asset_to_json(a));
  }
  j["assets"] = std::move(assets);
  ordered_json otp = ordered_json::array();
  for (const auto& d : s.otp_traffic) {
    otp.push_back({{"from", d.from}, {"to", d.to}, {"bits_per_sec", d.bits_per_sec}});
  }
  ordered_json relay = ordered_json::array();
  for (const auto& d : s.relay_traffic) {
    relay.push_back({{"from", d.from}, {"to", d.to}, {"bits", d.bits}, {"period_seconds", d.period_seconds}});
  }
  j["traffic"] = {{"otp", std::move(otp)}, {"relay", std::move(relay)}};
  ordered_json sharing = ordered_json::array();
  for (const auto& inst : s.sharing) {
    ordered_json ij;
    ij["id"] = inst.id;
    ij["locations"] = inst.locations;
    ij["threshold"] = inst.threshold;
    ij["field_prime"] = inst.field_prime;
    ij["refresh_period_seconds"] = inst.refresh_period_seconds;
    if (inst.secret) {
      ij["secret"] = *inst.secret;
    }
    sharing.push_back(std::move(ij));
  }
  j["sharing"] = std::move(sharing);
  ordered_json rotations = ordered_json::array();
  for (const auto& r : s.rotations) {
    rotations.push_back({{"branch", r.branch},
                         {"frequency_hz", r.frequency_hz},
                         {"master_bits", r.master_bits},
                         {"session_bits", r.session_bits}});
  }
  j["rotations"] = std::move(rotations);
  return j;
}

AssetInventory parse_inventory(std::string_view text, const IngestOptions& options) {
  const json doc = parse_json(text);
  std::vector<std::string> warnings;
  Context ctx{options.strict, &warnings};
  Reader r(doc, "", ctx);
  AssetInventory inv;
  inv.m_c = static_cast<std::uint32_t>(r.unsigned_int("m_c", inv.m_c, 2, 1000));
  inv.k_t = static_cast<std::uint32_t>(r.unsigned_int("k_t", inv.k_t, 2, 1000));
  inv.assets = read_assets(r.require("assets"), "assets", ctx, inv.m_c, inv.k_t);
  if (const json* t = r.find("timeline")) {
    inv.timeline = read_timeline(*t, "timeline", ctx);
  }
  if (const json* a = r.find("attacker")) {
    inv.attacker = read_attacker(*a, "attacker", ctx);
  }
  r.finish();
  return inv;
}

AssetInventory ingest_inventory(const std::filesystem::path& path, const IngestOptions& options) {
  return parse_inventory(read_text_file(path), options);
}

PolicyMatrix parse_matrix(std::string_view text, const IngestOptions& options) {
  const json doc = parse_json(text);
  Context ctx{options.strict, nullptr};
  return read_matrix(doc, "", ctx);
}

PolicyMatrix ingest_matrix(const std::filesystem::path& path, const IngestOptions& options) {
  return parse_matrix(read_text_file(path), options);
}

}  // namespace starqkd
