#include "starqkd/report.hpp"

#include <fstream>
#include <sstream>

#include "starqkd/error.hpp"

namespace starqkd {

using nlohmann::json;
using nlohmann::ordered_json;

ReportFormat parse_report_format(std::string_view name) {
  if (name == "json") return ReportFormat::Json;
  if (name == "csv") return ReportFormat::Csv;
  throw Error(ErrorCode::InvalidArgument, "unknown report format '" + std::string(name) + "'");
}

ordered_json report_to_json(const MetricsReport& r) {
  ordered_json j;
  j["format_version"] = r.format_version;
  j["scenario"] = r.scenario_name;
  j["seed"] = r.seed;
  j["duration_seconds"] = r.duration_seconds;
  j["tick_seconds"] = r.tick_seconds;
  j["channel_count"] = r.channel_count;
  j["max_active_sessions"] = r.max_active_sessions;
  j["events_processed"] = r.events_processed;

  ordered_json links = ordered_json::array();
  for (const auto& l : r.links) {
    ordered_json lj;
    lj["branch"] = l.branch_id;
    lj["raw_rate"] = l.raw_rate;
    lj["secret_rate"] = l.secret_rate;
    ordered_json samples = ordered_json::array();
    for (const auto& s : l.samples) {
      samples.push_back(ordered_json{{"time", s.time},
                                     {"active", s.active},
                                     {"deposited_bits", s.deposited_bits},
                                     {"pool_bits", s.pool_bits},
                                     {"generated_bits", s.generated_bits},
                                     {"pending_bits", s.pending_bits},
                                     {"auth_reserve_bits", s.auth_reserve_bits}});
    }
    lj["samples"] = std::move(samples);
    links.push_back(std::move(lj));
  }
  j["links"] = std::move(links);

  ordered_json hub = ordered_json::array();
  for (const auto& h : r.hub) {
    hub.push_back(ordered_json{{"time", h.time},
                               {"active_sessions", h.active_sessions},
                               {"offered_cost", h.offered_cost},
                               {"processed_cost", h.processed_cost},
                               {"backlog_cost", h.backlog_cost}});
  }
  j["hub"] = std::move(hub);

  ordered_json unmet = ordered_json::array();
  for (const auto& u : r.unmet_demand) {
    unmet.push_back(ordered_json{
        {"time", u.time}, {"kind", u.kind}, {"source", u.source}, {"target", u.target}, {"bits", u.bits}});
  }
  j["unmet_demand"] = std::move(unmet);

  ordered_json alarms = ordered_json::array();
  for (const auto& a : r.auth_alarms) {
    alarms.push_back(ordered_json{{"time", a.time}, {"branch", a.branch_id}});
  }
  j["auth_alarms"] = std::move(alarms);

  ordered_json assets = ordered_json::array();
  for (const auto& a : r.assets) {
    assets.push_back(ordered_json{{"asset", a.asset_id},
                                  {"technique", a.technique},
                                  {"rotation_frequency_hz", a.rotation_frequency_hz},
                                  {"t_s_seconds", a.t_s_seconds},
                                  {"t_sq_seconds", a.t_sq_seconds},
                                  {"horizon_model", a.horizon_model},
                                  {"feasible", a.feasible},
                                  {"escalated", a.escalated},
                                  {"secret_sharing", a.secret_sharing},
                                  {"store_now_decrypt_later", a.store_now_decrypt_later},
                                  {"notes", a.notes}});
  }
  j["assets"] = std::move(assets);

  ordered_json relays = ordered_json::array();
  for (const auto& x : r.relays) {
    relays.push_back(ordered_json{{"time", x.time},
                                  {"branch_i", x.branch_i},
                                  {"branch_j", x.branch_j},
                                  {"bits", x.bits},
                                  {"key_id", x.key_id}});
  }
  j["relays"] = std::move(relays);

  ordered_json refreshes = ordered_json::array();
  for (const auto& x : r.refreshes) {
    refreshes.push_back(ordered_json{{"time", x.time},
                                     {"instance", x.instance_id},
                                     {"round", x.round},
                                     {"key_bits", x.key_bits},
                                     {"window_start", x.window_start},
                                     {"window_end", x.window_end}});
  }
  j["refreshes"] = std::move(refreshes);

  ordered_json rotations = ordered_json::array();
  for (const auto& x : r.rotations) {
    rotations.push_back(ordered_json{{"branch", x.branch_id},
                                     {"frequency_hz", x.frequency_hz},
                                     {"rotations", x.rotations},
                                     {"missed", x.missed},
                                     {"master_id", x.master_id},
                                     {"t_s_seconds", x.t_s_seconds},
                                     {"t_sq_seconds", x.t_sq_seconds}});
  }
  j["rotations"] = std::move(rotations);

  const auto& c = r.consumption;
  j["consumption"] = ordered_json{{"generated", c.generated},
                                  {"pool_residue", c.pool_residue},
                                  {"otp", c.otp},
                                  {"relay", c.relay},
                                  {"rotation", c.rotation},
                                  {"refresh", c.refresh},
                                  {"auth", c.auth},
                                  {"balanced", c.balanced()}};
  if (r.timeline) {
    j["timeline"] = ordered_json{
        {"x_years", r.timeline->x_years}, {"y_years", r.timeline->y_years}, {"z_years", r.timeline->z_years}};
  } else {
    j["timeline"] = nullptr;
  }
  j["mosca_at_risk"] = r.mosca_at_risk ? ordered_json(*r.mosca_at_risk) : ordered_json(nullptr);
  return j;
}

namespace {

template <typename T>
T field(const json& obj, const char* key, const std::string& path) {
  const auto it = obj.find(key);
  if (it == obj.end()) {
    throw ValidationError(path + "." + key, "required field is missing");
  }
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ValidationError(path + "." + key, "wrong type");
  }
}

const json& array_at(const json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_array()) {
    throw ValidationError(key, "expected an array");
  }
  return *it;
}

}  // namespace

MetricsReport report_from_json(const json& doc) {
  if (!doc.is_object()) {
    throw ValidationError("<root>", "expected an object");
  }
  const std::string root;
  MetricsReport r;
  r.format_version = field<std::uint32_t>(doc, "format_version", root);
  if (r.format_version != kReportFormatVersion) {
    throw ValidationError("format_version", "unsupported version " + std::to_string(r.format_version));
  }
  r.scenario_name = field<std::string>(doc, "scenario", root);
  r.seed = field<std::uint64_t>(doc, "seed", root);
  r.duration_seconds = field<double>(doc, "duration_seconds", root);
  r.tick_seconds = field<double>(doc, "tick_seconds", root);
  r.channel_count = field<std::uint32_t>(doc, "channel_count", root);
  r.max_active_sessions = field<std::uint32_t>(doc, "max_active_sessions", root);
  r.events_processed = field<std::uint64_t>(doc, "events_processed", root);

  const json& links = array_at(doc, "links");
  for (std::size_t i = 0; i < links.size(); ++i) {
    const std::string p = "links[" + std::to_string(i) + "]";
    const json& lj = links[i];
    LinkSeries l{field<std::string>(lj, "branch", p), field<double>(lj, "raw_rate", p),
                 field<double>(lj, "secret_rate", p), {}};
    for (const auto& s : array_at(lj, "samples")) {
      l.samples.push_back(LinkSample{field<double>(s, "time", p), field<bool>(s, "active", p),
                                     field<BitCount>(s, "deposited_bits", p), field<BitCount>(s, "pool_bits", p),
                                     field<BitCount>(s, "generated_bits", p), field<BitCount>(s, "pending_bits", p),
                                     field<BitCount>(s, "auth_reserve_bits", p)});
    }
    r.links.push_back(std::move(l));
  }
  for (const auto& h : array_at(doc, "hub")) {
    r.hub.push_back(HubSample{field<double>(h, "time", "hub"), field<std::uint32_t>(h, "active_sessions", "hub"),
                              field<double>(h, "offered_cost", "hub"), field<double>(h, "processed_cost", "hub"),
                              field<double>(h, "backlog_cost", "hub")});
  }
  for (const auto& u : array_at(doc, "unmet_demand")) {
    const std::string p = "unmet_demand";
    r.unmet_demand.push_back(UnmetDemand{field<double>(u, "time", p), field<std::string>(u, "kind", p),
                                         field<std::string>(u, "source", p), field<std::string>(u, "target", p),
                                         field<BitCount>(u, "bits", p)});
  }
  for (const auto& a : array_at(doc, "auth_alarms")) {
    r.auth_alarms.push_back(AuthAlarm{field<double>(a, "time", "auth_alarms"),
                                      field<std::string>(a, "branch", "auth_alarms")});
  }
  for (const auto& a : array_at(doc, "assets")) {
    const std::string p = "assets";
    AssetReport x;
    x.asset_id = field<std::string>(a, "asset", p);
    x.technique = field<std::string>(a, "technique", p);
    x.rotation_frequency_hz = field<double>(a, "rotation_frequency_hz", p);
    x.t_s_seconds = field<double>(a, "t_s_seconds", p);
    x.t_sq_seconds = field<double>(a, "t_sq_seconds", p);
    x.horizon_model = field<std::string>(a, "horizon_model", p);
    x.feasible = field<bool>(a, "feasible", p);
    x.escalated = field<bool>(a, "escalated", p);
    x.secret_sharing = field<bool>(a, "secret_sharing", p);
    x.store_now_decrypt_later = field<bool>(a, "store_now_decrypt_later", p);
    x.notes = field<std::vector<std::string>>(a, "notes", p);
    r.assets.push_back(std::move(x));
  }
  for (const auto& x : array_at(doc, "relays")) {
    const std::string p = "relays";
    r.relays.push_back(RelayRecord{field<std::string>(x, "branch_i", p), field<std::string>(x, "branch_j", p),
                                   field<BitCount>(x, "bits", p), field<double>(x, "time", p),
                                   field<std::string>(x, "key_id", p)});
  }
  for (const auto& x : array_at(doc, "refreshes")) {
    const std::string p = "refreshes";
    r.refreshes.push_back(RefreshRecord{field<double>(x, "time", p), field<std::string>(x, "instance", p),
                                        field<std::uint64_t>(x, "round", p), field<BitCount>(x, "key_bits", p),
                                        field<double>(x, "window_start", p), field<double>(x, "window_end", p)});
  }
  for (const auto& x : array_at(doc, "rotations")) {
    const std::string p = "rotations";
    r.rotations.push_back(RotationSummary{field<std::string>(x, "branch", p), field<double>(x, "frequency_hz", p),
                                          field<std::uint64_t>(x, "rotations", p),
                                          field<std::uint64_t>(x, "missed", p),
                                          field<std::string>(x, "master_id", p),
                                          field<double>(x, "t_s_seconds", p), field<double>(x, "t_sq_seconds", p)});
  }
  const auto it = doc.find("consumption");
  if (it == doc.end() || !it->is_object()) {
    throw ValidationError("consumption", "expected an object");
  }
  const std::string p = "consumption";
  r.consumption = ConsumptionLedger{field<BitCount>(*it, "generated", p), field<BitCount>(*it, "pool_residue", p),
                                    field<BitCount>(*it, "otp", p),       field<BitCount>(*it, "relay", p),
                                    field<BitCount>(*it, "rotation", p),  field<BitCount>(*it, "refresh", p),
                                    field<BitCount>(*it, "auth", p)};
  if (const auto t = doc.find("timeline"); t != doc.end() && !t->is_null()) {
    r.timeline = MigrationTimeline{field<double>(*t, "x_years", "timeline"), field<double>(*t, "y_years", "timeline"),
                                   field<double>(*t, "z_years", "timeline")};
  }
  if (const auto m = doc.find("mosca_at_risk"); m != doc.end() && !m->is_null()) {
    if (!m->is_boolean()) {
      throw ValidationError("mosca_at_risk", "expected true, false or null");
    }
    r.mosca_at_risk = m->get<bool>();
  }
  return r;
}

std::string report_to_string(const MetricsReport& report) {
  return report_to_json(report).dump(2) + "\n";
}

namespace {

/// Shortest text that reads back as the same double.
std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) {
    return s;
  }
  std::string out = "\"";
  for (const char c : s) {
    out += c;
    if (c == '"') {
      out += '"';
    }
  }
  return out + "\"";
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::IoError, "cannot write " + path.string());
  }
  out << content;
  out.flush();
  if (!out) {
    throw Error(ErrorCode::IoError, "write failed for " + path.string());
  }
}

std::string safe_name(const std::string& id) {
  std::string out;
  for (const char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' || c == '_';
    out += ok ? c : '_';
  }
  return out;
}

}  // namespace

std::vector<std::filesystem::path> emit_report(const MetricsReport& r, ReportFormat format,
                                               const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
  }
  std::vector<std::filesystem::path> written;
  auto emit = [&](const std::string& name, const std::string& content) {
    const auto path = dir / name;
    write_file(path, content);
    written.push_back(path);
  };

  if (format == ReportFormat::Json) {
    emit("report.json", report_to_string(r));
    return written;
  }

  std::ostringstream manifest;
  manifest << "key,value\n"
           << "format_version," << r.format_version << "\n"
           << "scenario," << csv_field(r.scenario_name) << "\n"
           << "seed," << r.seed << "\n"
           << "duration_seconds," << num(r.duration_seconds) << "\n"
           << "tick_seconds," << num(r.tick_seconds) << "\n"
           << "channel_count," << r.channel_count << "\n"
           << "max_active_sessions," << r.max_active_sessions << "\n"
           << "events_processed," << r.events_processed << "\n"
           << "generated_bits," << r.consumption.generated << "\n"
           << "pool_residue_bits," << r.consumption.pool_residue << "\n"
           << "otp_bits," << r.consumption.otp << "\n"
           << "relay_bits," << r.consumption.relay << "\n"
           << "rotation_bits," << r.consumption.rotation << "\n"
           << "refresh_bits," << r.consumption.refresh << "\n"
           << "auth_bits," << r.consumption.auth << "\n"
           << "balanced," << (r.consumption.balanced() ? "true" : "false") << "\n"
           << "mosca_at_risk," << (r.mosca_at_risk ? (*r.mosca_at_risk ? "true" : "false") : "") << "\n";
  emit("manifest.csv", manifest.str());

  for (const auto& l : r.links) {
    std::ostringstream os;
    os << "time,active,deposited_bits,pool_bits,generated_bits,pending_bits,auth_reserve_bits\n";
    for (const auto& s : l.samples) {
      os << num(s.time) << ',' << (s.active ? 1 : 0) << ',' << s.deposited_bits << ',' << s.pool_bits << ','
         << s.generated_bits << ',' << s.pending_bits << ',' << s.auth_reserve_bits << '\n';
    }
    emit("link_" + safe_name(l.branch_id) + ".csv", os.str());
  }

  std::ostringstream hub;
  hub << "time,active_sessions,offered_cost,processed_cost,backlog_cost\n";
  for (const auto& h : r.hub) {
    hub << num(h.time) << ',' << h.active_sessions << ',' << num(h.offered_cost) << ',' << num(h.processed_cost)
        << ',' << num(h.backlog_cost) << '\n';
  }
  emit("hub.csv", hub.str());

  std::ostringstream unmet;
  unmet << "time,kind,source,target,bits\n";
  for (const auto& u : r.unmet_demand) {
    unmet << num(u.time) << ',' << u.kind << ',' << csv_field(u.source) << ',' << csv_field(u.target) << ','
          << u.bits << '\n';
  }
  emit("unmet_demand.csv", unmet.str());

  std::ostringstream alarms;
  alarms << "time,branch\n";
  for (const auto& a : r.auth_alarms) {
    alarms << num(a.time) << ',' << csv_field(a.branch_id) << '\n';
  }
  emit("auth_alarms.csv", alarms.str());

  std::ostringstream relays;
  relays << "time,branch_i,branch_j,bits,key_id\n";
  for (const auto& x : r.relays) {
    relays << num(x.time) << ',' << csv_field(x.branch_i) << ',' << csv_field(x.branch_j) << ',' << x.bits << ','
           << csv_field(x.key_id) << '\n';
  }
  emit("relays.csv", relays.str());

  std::ostringstream refreshes;
  refreshes << "time,instance,round,key_bits,window_start,window_end\n";
  for (const auto& x : r.refreshes) {
    refreshes << num(x.time) << ',' << csv_field(x.instance_id) << ',' << x.round << ',' << x.key_bits << ','
              << num(x.window_start) << ',' << num(x.window_end) << '\n';
  }
  emit("refreshes.csv", refreshes.str());

  std::ostringstream rotations;
  rotations << "branch,frequency_hz,rotations,missed,master_id,t_s_seconds,t_sq_seconds\n";
  for (const auto& x : r.rotations) {
    rotations << csv_field(x.branch_id) << ',' << num(x.frequency_hz) << ',' << x.rotations << ',' << x.missed
              << ',' << csv_field(x.master_id) << ',' << num(x.t_s_seconds) << ',' << num(x.t_sq_seconds) << '\n';
  }
  emit("rotations.csv", rotations.str());

  std::ostringstream assets;
  assets << "asset,technique,rotation_frequency_hz,t_s_seconds,t_sq_seconds,feasible,escalated,secret_sharing,"
            "store_now_decrypt_later\n";
  for (const auto& a : r.assets) {
    assets << csv_field(a.asset_id) << ',' << a.technique << ',' << num(a.rotation_frequency_hz) << ','
           << num(a.t_s_seconds) << ',' << num(a.t_sq_seconds) << ',' << a.feasible << ',' << a.escalated << ','
           << a.secret_sharing << ',' << a.store_now_decrypt_later << '\n';
  }
  emit("assets.csv", assets.str());
  return written;
}

}  // namespace starqkd
