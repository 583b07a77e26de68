#include <benchmark/benchmark.h>

#include "starqkd/engine.hpp"
#include "starqkd/sharing.hpp"
#include "starqkd/starnet.hpp"

using namespace starqkd;

static void BM_PoolDraw(benchmark::State& state) {
  const auto bits = static_cast<BitCount>(state.range(0));
  KeyPool pool("bench", 1);
  for (auto _ : state) {
    if (pool.available_bits() < bits) pool_deposit(pool, bits * 1024);
    benchmark::DoNotOptimize(pool_draw(pool, bits, Provenance::Quantum));
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0) / 8);
}
BENCHMARK(BM_PoolDraw)->Arg(256)->Arg(8192)->Arg(1 << 20);

static void BM_OtpEncrypt(benchmark::State& state) {
  const auto bytes = static_cast<std::size_t>(state.range(0));
  Rng rng(2);
  std::vector<std::uint8_t> msg(bytes, 0x5A);
  for (auto _ : state) {
    state.PauseTiming();
    auto key = KeyMaterial::random(KeyId{"k", 0}, bytes * 8, Provenance::Quantum, rng);
    state.ResumeTiming();
    benchmark::DoNotOptimize(otp_encrypt(key, msg));
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * bytes));
}
BENCHMARK(BM_OtpEncrypt)->Arg(64)->Arg(65536);

static void BM_RelayKey(benchmark::State& state) {
  std::vector<BranchSpec> specs(2);
  specs[0].id = "a";
  specs[1].id = "b";
  auto topo = build_star(HubSpec{}, specs, 3);
  Rng rng(3);
  const auto bits = static_cast<BitCount>(state.range(0));
  for (auto _ : state) {
    for (auto& l : topo.links()) {
      if (l.state.pool().available_bits() < bits) pool_deposit(l.state.pool(), bits * 1024);
    }
    benchmark::DoNotOptimize(relay_key(topo, "a", "b", bits, rng));
  }
}
BENCHMARK(BM_RelayKey)->Arg(256)->Arg(65536);

static void BM_SplitReconstruct(benchmark::State& state) {
  const auto n = static_cast<std::uint32_t>(state.range(0));
  const ShareConfig cfg{n, n / 2 + 1, kMersenne61};
  Rng rng(4);
  for (auto _ : state) {
    const auto shares = split(123456789, cfg, rng);
    benchmark::DoNotOptimize(reconstruct(shares, cfg));
  }
}
BENCHMARK(BM_SplitReconstruct)->Arg(3)->Arg(10)->Arg(32);

static void BM_Refresh(benchmark::State& state) {
  const auto n = static_cast<std::uint32_t>(state.range(0));
  const ShareConfig cfg{n, n / 2 + 1, kMersenne61};
  Rng rng(5);
  auto shares = split(42, cfg, rng);
  KeyPool budget("budget", 5);
  for (auto _ : state) {
    if (budget.available_bits() < cfg.refresh_cost_bits()) pool_deposit(budget, cfg.refresh_cost_bits() * 1024);
    shares = refresh(shares, cfg, rng, budget);
  }
}
BENCHMARK(BM_Refresh)->Arg(3)->Arg(10);

static void BM_TenBranchRun(benchmark::State& state) {
  const auto scenario = ingest_scenario(STARQKD_SCENARIO_DIR "/ten_branch.json").scenario;
  for (auto _ : state) benchmark::DoNotOptimize(run(scenario));
}
BENCHMARK(BM_TenBranchRun)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
