#include <benchmark/benchmark.h>

#include "trafwarden/gestures.hpp"
#include "trafwarden/kinematics.hpp"
#include "trafwarden/session.hpp"
#include "trafwarden/sim.hpp"

using namespace trafwarden;

static void BM_Interpolate(benchmark::State& state) {
  const auto from = signal_target_pose(TrafficSignal::AllStop);
  const auto to = signal_target_pose(TrafficSignal::StartLeft);
  for (auto _ : state) {
    auto r = interpolate(from, to, 1.0, 0.05);
    benchmark::DoNotOptimize(r);
  }
}
BENCHMARK(BM_Interpolate);

static void BM_ForwardKinematics(benchmark::State& state) {
  const auto pose = signal_target_pose(TrafficSignal::ChangeSign);
  for (auto _ : state) {
    auto f = forward_kinematics(pose);
    benchmark::DoNotOptimize(f);
  }
}
BENCHMARK(BM_ForwardKinematics);

// One simulation step with a loaded intersection; arg is lambda in veh/h.
static void BM_SimStep(benchmark::State& state) {
  ScenarioConfig cfg;
  const double lambda = static_cast<double>(state.range(0)) / 3600.0;
  cfg.arrival_rate = {lambda, lambda, lambda, lambda};
  Session session(cfg, ControlMode::QueuePriority);
  for (int i = 0; i < 2000; ++i) session.advance();
  auto warm = session.state();
  auto s = warm;
  for (auto _ : state) {
    step(s, cfg);
    if (s.step_index > warm.step_index + 10000) {
      state.PauseTiming();
      s = warm;
      state.ResumeTiming();
    }
  }
  state.counters["vehicles"] = static_cast<double>(warm.in_system());
}
BENCHMARK(BM_SimStep)->Arg(360)->Arg(720);

static void BM_HeadlessRun(benchmark::State& state) {
  ScenarioConfig cfg;
  for (auto _ : state) {
    auto r = run_headless(cfg, ControlMode::QueuePriority);
    benchmark::DoNotOptimize(r);
  }
  state.SetLabel("600 s at 0.1 veh/s per approach");
}
BENCHMARK(BM_HeadlessRun)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
