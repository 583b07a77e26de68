// starqkd: run star-network QKD scenarios, plan asset protection, demo relays.

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include "starqkd/engine.hpp"
#include "starqkd/policy.hpp"
#include "starqkd/report.hpp"
#include "starqkd/scenario.hpp"
#include "starqkd/starnet.hpp"

namespace fs = std::filesystem;
using namespace starqkd;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitRuntime = 2;

/// Human-readable one-liner for input errors.
std::string describe(const std::exception& e, const std::string& file) {
  if (const auto* p = dynamic_cast<const ParseError*>(&e)) {
    return file + ":" + std::to_string(p->line()) + ":" + std::to_string(p->column()) + ": " + p->what();
  }
  return file + ": " + e.what();
}

bool is_input_error(const Error& e) {
  return e.code() == ErrorCode::ParseError || e.code() == ErrorCode::ValidationError ||
         e.code() == ErrorCode::ScenarioInvalid;
}

std::string years(double seconds) {
  if (seconds >= kHorizonSentinelSeconds) {
    return "inf";
  }
  std::ostringstream os;
  os << std::setprecision(4) << seconds / kSecondsPerYear << "y";
  return os.str();
}

struct SimulateArgs {
  std::vector<std::string> files;
  std::optional<std::uint64_t> seed;
  std::optional<double> duration;
  std::string out;
  std::string format = "json";
  bool lax = false;
  unsigned jobs = 1;
};

struct RunOutcome {
  int code = kExitOk;
  std::string message;
  std::optional<MetricsReport> report;
};

RunOutcome run_one(const std::string& file, const SimulateArgs& args) {
  RunOutcome outcome;
  try {
    IngestResult in = ingest_scenario(file, IngestOptions{!args.lax});
    for (const auto& w : in.warnings) {
      outcome.message += file + ": warning: " + w + "\n";
    }
    if (args.seed) in.scenario.seed = *args.seed;
    if (args.duration) in.scenario.duration_seconds = *args.duration;
    outcome.report = run(in.scenario);
  } catch (const Error& e) {
    outcome.code = is_input_error(e) ? kExitInvalid : kExitRuntime;
    outcome.message += describe(e, file) + "\n";
  } catch (const std::exception& e) {
    outcome.code = kExitRuntime;
    outcome.message += file + ": " + e.what() + "\n";
  }
  return outcome;
}

int cmd_simulate(const SimulateArgs& args) {
  const ReportFormat format = parse_report_format(args.format);
  if (format == ReportFormat::Csv && args.out.empty()) {
    std::cerr << "csv output needs --out DIR\n";
    return kExitInvalid;
  }
  if (args.files.size() > 1 && args.out.empty()) {
    std::cerr << "several scenarios need --out DIR\n";
    return kExitInvalid;
  }

  // Runs share nothing; results are collected by index and written afterwards.
  std::vector<RunOutcome> outcomes(args.files.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < args.files.size(); i = next++) {
      outcomes[i] = run_one(args.files[i], args);
    }
  };
  const unsigned workers = std::max(1U, std::min<unsigned>(args.jobs, static_cast<unsigned>(args.files.size())));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) {
    pool.emplace_back(worker);
  }
  worker();
  for (auto& t : pool) {
    t.join();
  }

  int code = kExitOk;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const RunOutcome& o = outcomes[i];
    std::cerr << o.message;
    code = std::max(code, o.code);
    if (!o.report) {
      continue;
    }
    const MetricsReport& r = *o.report;
    if (args.out.empty()) {
      std::cout << report_to_string(r);
    } else {
      fs::path dir = args.out;
      if (args.files.size() > 1) {
        dir /= fs::path(args.files[i]).stem();
      }
      try {
        for (const auto& p : emit_report(r, format, dir)) {
          std::cerr << "wrote " << p.string() << "\n";
        }
      } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        code = std::max(code, kExitRuntime);
        continue;
      }
    }
    std::cerr << r.scenario_name << ": seed " << r.seed << ", " << r.events_processed << " events, "
              << r.consumption.generated << " bits generated, " << r.unmet_demand.size()
              << " unmet demands, " << r.auth_alarms.size() << " auth alarms\n";
  }
  return code;
}

int cmd_validate(const std::string& file, bool lax) {
  try {
    const IngestResult in = ingest_scenario(file, IngestOptions{!lax});
    for (const auto& w : in.warnings) {
      std::cerr << file << ": warning: " << w << "\n";
    }
    // Building the topology checks the link models as the engine would see them.
    (void)build_star(in.scenario.hub, in.scenario.branches, in.scenario.seed);
    (void)in.scenario.effective_matrix();
    std::cout << file << ": ok (" << in.scenario.branches.size() << " branches, "
              << in.scenario.duration_seconds << " s)\n";
    return kExitOk;
  } catch (const Error& e) {
    std::cerr << describe(e, file) << "\n";
    return kExitInvalid;
  }
}

int cmd_plan(const std::string& file, const std::string& matrix_file, const std::string& attacker_kind) {
  try {
    const AssetInventory inv = ingest_inventory(file);
    const PolicyMatrix matrix = matrix_file.empty() ? default_matrix(inv.m_c, inv.k_t) : ingest_matrix(matrix_file);
    const auto violations = validate_matrix(matrix);
    if (!violations.empty()) {
      for (const auto& v : violations) {
        std::cerr << matrix_file << ": " << v.message << "\n";
      }
      return kExitInvalid;
    }
    AttackerModel attacker = inv.attacker.value_or(AttackerModel{});
    if (!attacker_kind.empty()) {
      attacker.has_quantum = attacker_kind == "quantum";
    } else if (!inv.attacker) {
      attacker.has_quantum = true;
    }

    std::cout << "attacker: " << (attacker.has_quantum ? "quantum" : "classical") << ", "
              << attacker.classical_ops_per_sec << " ops/s\n";
    std::cout << std::left << std::setw(20) << "asset" << std::setw(5) << "c,t" << std::setw(20) << "technique"
              << std::setw(10) << "f (Hz)" << std::setw(11) << "T_S" << std::setw(11) << "T_S+Q"
              << "flags\n";
    for (const auto& asset : inv.assets) {
      const Recommendation rec = recommend(asset, matrix, attacker);
      std::ostringstream freq;
      if (const auto* h = std::get_if<Hybrid>(&rec.technique)) {
        freq << h->rotation_frequency_hz;
      } else {
        freq << "-";
      }
      std::string flags;
      if (!rec.feasible) flags += " infeasible";
      if (rec.escalated) flags += " escalated";
      if (rec.use_secret_sharing) flags += " secret-sharing";
      if (rec.store_now_decrypt_later_exposure) flags += " store-now-decrypt-later";
      if (asset.data_state == DataState::InUse) flags += " in-use";
      std::cout << std::setw(20) << asset.id << std::setw(5)
                << (std::to_string(asset.sensitivity_index) + "," + std::to_string(asset.time_index))
                << std::setw(20) << technique_name(rec.technique) << std::setw(10) << freq.str() << std::setw(11)
                << years(rec.horizon.t_s_seconds) << std::setw(11) << years(rec.horizon.t_sq_seconds)
                << (flags.empty() ? "" : flags.substr(1)) << "\n";
    }
    if (inv.timeline) {
      const auto& t = *inv.timeline;
      std::cout << "mosca: x=" << t.x_years << " y=" << t.y_years << " z=" << t.z_years << " -> "
                << (mosca_at_risk(t) ? "AT RISK (x + y > z)" : "ok (x + y <= z)") << "\n";
    }
    return kExitOk;
  } catch (const Error& e) {
    std::cerr << describe(e, file) << "\n";
    return is_input_error(e) || e.code() == ErrorCode::IndexOutOfBounds ? kExitInvalid : kExitRuntime;
  }
}

int cmd_relay_demo(std::uint32_t n_branches, BitCount bits, std::uint64_t seed) {
  if (n_branches < 2 || bits == 0) {
    std::cerr << "relay-demo needs at least 2 branches and a positive bit count\n";
    return kExitInvalid;
  }
  HubSpec hub;
  hub.id = "hub";
  hub.channel_count = n_branches;
  std::vector<BranchSpec> branches;
  for (std::uint32_t i = 1; i <= n_branches; ++i) {
    BranchSpec b;
    b.id = "b" + std::to_string(i);
    b.link.distance_km = 5.0 * i;
    branches.push_back(b);
  }
  StarTopology topo = build_star(hub, branches, seed);
  Rng rng(seed, "relay-demo");

  Seconds now = 0.0;
  auto shortest = [&] {
    BitCount m = ~BitCount{0};
    for (const auto& l : topo.links()) m = std::min(m, l.state.pool().available_bits());
    return m;
  };
  while (shortest() < 2 * bits) {
    now += 1.0;
    (void)step(topo, now, 1.0);
    if (now > 1.0e6) {
      std::cerr << "links never produce " << 2 * bits << " bits\n";
      return kExitRuntime;
    }
  }
  std::cout << "time,branch_i,branch_j,bits,key_id,identical\n";
  for (std::uint32_t i = 0; i < n_branches; ++i) {
    const std::string a = branches[i].id;
    const std::string b = branches[(i + 1) % n_branches].id;
    if (n_branches == 2 && i == 1) break;
    const RelayResult r = relay_key(topo, a, b, bits, rng, now);
    std::cout << r.record.time << ',' << r.record.branch_i << ',' << r.record.branch_j << ',' << r.record.bits
              << ',' << r.record.key_id << ',' << (r.key_i.same_bits(r.key_j) ? "yes" : "no") << "\n";
  }
  for (const auto& l : topo.links()) {
    std::cout << "# " << l.branch.id << " pool " << l.state.pool().available_bits() << " bits left of "
              << l.state.pool().total_generated_bits() << " generated\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum-safe star network simulator"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Run one or more scenarios and emit metrics reports");
  simulate->add_option("scenario", sim.files, "Scenario JSON file(s)")->required()->check(CLI::ExistingFile);
  simulate->add_option("--seed", sim.seed, "Override the scenario seed");
  simulate->add_option("--duration", sim.duration, "Override the run length in seconds")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--out", sim.out, "Output directory (default: JSON on stdout)");
  simulate->add_option("--format", sim.format, "Report format")->check(CLI::IsMember({"json", "csv"}));
  simulate->add_flag("--lax", sim.lax, "Warn about unknown fields instead of failing");
  simulate->add_option("--jobs,-j", sim.jobs, "Scenarios run in parallel")->check(CLI::Range(1U, 256U));

  std::string plan_file;
  std::string matrix_file;
  std::string attacker_kind;
  auto* plan = app.add_subcommand("plan", "Recommend a protection technique per asset");
  plan->add_option("assets", plan_file, "Asset inventory JSON")->required()->check(CLI::ExistingFile);
  plan->add_option("--matrix", matrix_file, "Custom policy matrix JSON")->check(CLI::ExistingFile);
  plan->add_option("--attacker", attacker_kind, "Attacker model")->check(CLI::IsMember({"quantum", "classical"}));

  std::uint32_t demo_branches = 4;
  BitCount demo_bits = 256;
  std::uint64_t demo_seed = 1;
  auto* demo = app.add_subcommand("relay-demo", "Relay keys between neighbouring branches and print the ledger");
  demo->add_option("--branches", demo_branches, "Number of branches")->required();
  demo->add_option("--bits", demo_bits, "Bits per relayed key")->required();
  demo->add_option("--seed", demo_seed, "Root seed");

  std::string validate_file;
  bool validate_lax = false;
  auto* validate = app.add_subcommand("validate", "Parse and check a scenario without running it");
  validate->add_option("scenario", validate_file, "Scenario JSON file")->required();
  validate->add_flag("--lax", validate_lax, "Warn about unknown fields instead of failing");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (*simulate) return cmd_simulate(sim);
    if (*plan) return cmd_plan(plan_file, matrix_file, attacker_kind);
    if (*demo) return cmd_relay_demo(demo_branches, demo_bits, demo_seed);
    if (*validate) return cmd_validate(validate_file, validate_lax);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}
