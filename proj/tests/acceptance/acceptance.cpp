// Acceptance suite: one [PASS]/[FAIL] line per criterion, nonzero exit when
// any criterion fails. Tolerances and time budgets are fixed below.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "oracles.hpp"
#include "trafwarden/gestures.hpp"
#include "trafwarden/kinematics.hpp"
#include "trafwarden/scenario.hpp"
#include "trafwarden/session.hpp"
#include "trafwarden/sim.hpp"

using namespace trafwarden;
namespace fs = std::filesystem;

namespace {

constexpr double kFkRelTol = 1e-9;
constexpr double kGapTol = 1e-9;
constexpr int kRandomCases = 1000;
constexpr int kSafetySeeds = 100;
constexpr int kDominanceSeeds = 10;
constexpr int kDominanceRequired = 9;

struct Outcome {
  bool ok = true;
  std::string detail;

  void fail(std::string why) {
    if (ok) detail = std::move(why);
    ok = false;
  }
};

struct Criterion {
  std::string name;
  double budget_s;  // 0: no time limit
  std::function<Outcome()> check;
};

RobotPose random_pose(std::mt19937_64& gen, const JointLimits& lim) {
  RobotPose p;
  for (auto j : kAllJoints) {
    std::uniform_real_distribution<double> d(lim[j].min, lim[j].max);
    p.set(j, d(gen));
  }
  return p;
}

Outcome pose_tables() {
  Outcome out;
  int checked = 0;
  for (const auto& row : oracle::appendix_arm_table()) {
    const auto p = primitive_partial(row.primitive, row.side);
    if (p.assigned_count() != kArmJointCount) out.fail("primitive assigns wrong joint count");
    for (std::size_t k = 0; k < kArmJointCount; ++k) {
      const auto j = arm_joint(row.side, static_cast<ArmJoint>(k));
      if (p.get(j) != row.joints[k]) {
        out.fail(fmt::format("{} {}", primitive_name(row.primitive), joint_name(j)));
      }
    }
    ++checked;
  }
  for (const auto& row : oracle::appendix_signal_table()) {
    const auto pose = signal_target_pose(row.signal);
    for (std::size_t k = 0; k < kArmJointCount; ++k) {
      const auto role = static_cast<ArmJoint>(k);
      if (pose[arm_joint(Side::Left, role)] != oracle::arm_row(row.left, Side::Left)[k] ||
          pose[arm_joint(Side::Right, role)] != oracle::arm_row(row.right, Side::Right)[k]) {
        out.fail(fmt::format("{} arm joint {}", signal_name(row.signal), k));
      }
    }
    if (pose[JointId::HeadYaw] != row.head) out.fail(fmt::format("{} head", signal_name(row.signal)));
    ++checked;
  }
  if (out.ok) out.detail = fmt::format("{} poses exact", checked);
  return out;
}

Outcome interpolation() {
  Outcome out;
  std::mt19937_64 gen(20240601);
  const auto lim = default_limits();
  std::uniform_real_distribution<double> omega(0.2, 5.0);
  std::uniform_real_distribution<double> step_dt(0.01, 0.1);
  long total_steps = 0;
  for (int trial = 0; trial < kRandomCases && out.ok; ++trial) {
    const auto from = random_pose(gen, lim);
    const auto to = random_pose(gen, lim);
    const double w = omega(gen);
    const double dt = step_dt(gen);
    const double expected = std::ceil(motion_duration(from, to, w) / dt);
    auto pose = from;
    long steps = 0;
    bool done = false;
    while (!done && steps < 100000) {
      const auto next = interpolate(pose, to, w, dt);
      for (auto j : kAllJoints) {
        if (j == JointId::TorsoLift) continue;
        const double before = to[j] - pose[j];
        const double after = to[j] - next.pose[j];
        if (std::abs(after) > std::abs(before) + 1e-15) out.fail(fmt::format("trial {}: moved away", trial));
        if (before * after < -1e-18 || (to[j] - from[j]) * after < -1e-18) {
          out.fail(fmt::format("trial {}: overshoot on {}", trial, joint_name(j)));
        }
      }
      pose = next.pose;
      done = next.done;
      ++steps;
    }
    if (std::abs(static_cast<double>(steps) - expected) > 1.0) {
      out.fail(fmt::format("trial {}: {} steps, expected {}", trial, steps, expected));
    }
    total_steps += steps;
  }
  if (out.ok) out.detail = fmt::format("{} pairs, {} steps", kRandomCases, total_steps);
  return out;
}

double rel(double got, double want) {
  return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

Outcome fk_properties() {
  Outcome out;
  const LinkModel links;
  auto check = [&](const RobotPose& p, const std::string& label) {
    const auto f = forward_kinematics(p, links);
    for (const auto* arm : {&f.left, &f.right}) {
      if (rel(distance(arm->shoulder, arm->elbow), links.upper_arm) > kFkRelTol ||
          rel(distance(arm->elbow, arm->wrist), links.forearm) > kFkRelTol ||
          rel(distance(arm->wrist, arm->fingertip), links.hand) > kFkRelTol) {
        out.fail(label + ": segment length");
      }
    }
    const auto m = forward_kinematics(mirror_pose(p), links);
    auto mirrored = [&](Point2 a, Point2 b) {
      const double scale = std::max(1.0, std::hypot(a.x, a.y));
      return std::abs(a.x + b.x) <= kFkRelTol * scale && std::abs(a.y - b.y) <= kFkRelTol * scale;
    };
    const ArmFrame* pairs[2][2] = {{&f.left, &m.right}, {&f.right, &m.left}};
    for (const auto& pr : pairs) {
      if (!mirrored(pr[0]->shoulder, pr[1]->shoulder) || !mirrored(pr[0]->elbow, pr[1]->elbow) ||
          !mirrored(pr[0]->wrist, pr[1]->wrist) ||
          !mirrored(pr[0]->fingertip, pr[1]->fingertip)) {
        out.fail(label + ": mirror");
      }
    }
  };
  for (auto s : kAllSignals) check(signal_target_pose(s), std::string(signal_name(s)));
  std::mt19937_64 gen(77);
  const auto lim = default_limits();
  for (int i = 0; i < kRandomCases; ++i) check(random_pose(gen, lim), fmt::format("random {}", i));
  if (out.ok) out.detail = fmt::format("{} poses", kAllSignals.size() + kRandomCases);
  return out;
}

Outcome delta_semantics() {
  Outcome out;
  int cases = 0;
  for (unsigned bits = 0; bits < 16; ++bits) {
    PermissionState s;
    for (auto a : kAllApproaches) s[a] = (bits >> index_of(a)) & 1U ? Permission::Go : Permission::Stop;
    for (const auto& row : oracle::delta_table()) {
      PermissionState want = s;
      for (auto a : kAllApproaches) {
        const char c = row.assign[index_of(a)];
        if (c == 'G') want[a] = Permission::Go;
        if (c == 'S') want[a] = Permission::Stop;
      }
      if (apply_delta(s, permission_delta(row.signal)) != want) {
        out.fail(fmt::format("{} on state {:04b}", signal_name(row.signal), bits));
      }
      ++cases;
    }
  }
  for (auto sig : kAllSignals) {
    if (is_conflicting(apply_delta(PermissionState::all_stop(), permission_delta(sig)))) {
      out.fail(fmt::format("{} from all-stop conflicts", signal_name(sig)));
    }
  }
  if (out.ok) out.detail = fmt::format("{} state/signal pairs", cases);
  return out;
}

Outcome sim_invariants() {
  Outcome out;
  ScenarioConfig cfg;
  cfg.arrival_rate = {0.1, 0.1, 0.1, 0.1};
  cfg.duration = 600.0;
  cfg.seed = 1;
  Session session(cfg, ControlMode::QueuePriority);
  const double min_gap = cfg.vehicle_length + cfg.standstill_gap;
  std::uint64_t vehicles_seen = 0;
  while (!session.finished() && out.ok) {
    session.advance();
    const auto& s = session.state();
    std::uint64_t spawned = 0;
    std::uint64_t retired = 0;
    for (const auto& c : s.counters) {
      spawned += c.spawned;
      retired += c.crossed;
    }
    if (spawned != retired + s.in_system()) {
      out.fail(fmt::format("t={:.2f}: conservation {} != {} + {}", s.clock, spawned, retired,
                           s.in_system()));
    }
    vehicles_seen = spawned;
    for (auto a : kAllApproaches) {
      const auto& lane = s.lane(a);
      for (std::size_t i = 1; i < lane.size(); ++i) {
        if (lane[i].id <= lane[i - 1].id) out.fail(fmt::format("t={:.2f}: overtaking", s.clock));
        if (lane[i].position - lane[i - 1].position < min_gap - kGapTol) {
          out.fail(fmt::format("t={:.2f}: gap {:.4f} on {}", s.clock,
                               lane[i].position - lane[i - 1].position, approach_name(a)));
        }
      }
    }
  }
  if (session.state().stop_line_violations != 0) out.fail("stop line violated");
  if (out.ok) out.detail = fmt::format("{} vehicles over 600 s", vehicles_seen);
  return out;
}

Outcome stop_line_compliance() {
  Outcome out;
  ScenarioConfig cfg;
  cfg.arrival_rate = {0.0, 0.0, 0.0, 0.0};
  cfg.reaction_delay = 0.0;
  const double braking = cfg.free_speed * cfg.free_speed / (2.0 * cfg.accel);
  double worst = 0.0;
  for (const double stop_at : {120.0, 60.0, braking + 1.0, braking * 0.5}) {
    auto s = make_initial_state(cfg);
    apply_grant(s, cfg, ApproachPair::FrontBehind);
    Vehicle v;
    v.id = s.next_vehicle_id++;
    v.position = cfg.approach_length;
    v.speed = cfg.free_speed;
    s.lane(Approach::Front).push_back(v);
    ++s.counters[0].attempted;
    ++s.counters[0].spawned;
    while (s.lane(Approach::Front).front().position > stop_at) step(s, cfg);
    const double d0 = s.lane(Approach::Front).front().position;
    const double t0 = s.clock;
    apply_signal(s, cfg, TrafficSignal::FrontStop);
    while (s.clock < t0 + 30.0) {
      step(s, cfg);
      if (s.lane(Approach::Front).empty()) break;
      if (d0 >= braking) {
        const double want = oracle::braking_position(d0, cfg.free_speed, cfg.accel, s.clock - t0);
        worst = std::max(worst, std::abs(s.lane(Approach::Front).front().position - want));
      }
    }
    if (s.stop_line_violations != 0) out.fail(fmt::format("stop at {:.1f}: violation", stop_at));
    if (d0 >= braking) {
      if (s.lane(Approach::Front).size() != 1 || s.lane(Approach::Front).front().position < 0.0) {
        out.fail(fmt::format("early stop at {:.1f}: vehicle crossed", stop_at));
      }
    } else if (s.counters[0].crossed != 1 || s.committed_crossings != 1) {
      out.fail(fmt::format("late stop at {:.1f}: committed vehicle did not proceed", stop_at));
    }
  }
  const double one_step = cfg.free_speed * cfg.dt;
  if (worst > one_step) out.fail(fmt::format("position error {:.4f} m > {:.4f} m", worst, one_step));
  if (out.ok) out.detail = fmt::format("max position error {:.4f} m (limit {:.2f} m)", worst, one_step);
  return out;
}

ScenarioConfig safety_config(std::uint64_t seed) {
  ScenarioConfig cfg;
  cfg.arrival_rate = {0.1, 0.1, 0.1, 0.1};
  cfg.duration = 600.0;
  cfg.seed = seed;
  return cfg;
}

Outcome controller_safety() {
  Outcome out;
  std::uint64_t crossed = 0;
  for (auto mode : {ControlMode::RoundRobin, ControlMode::QueuePriority}) {
    for (std::uint64_t seed = 1; seed <= kSafetySeeds; ++seed) {
      const auto r = run_headless(safety_config(seed), mode).metrics;
      if (r.conflicts != 0) {
        out.fail(fmt::format("{} seed {}: {} conflicts", mode_name(mode), seed, r.conflicts));
      }
      crossed += r.total.crossed;
    }
  }
  if (out.ok) out.detail = fmt::format("{} runs, {} crossings, 0 conflicts", 2 * kSafetySeeds, crossed);
  return out;
}

Outcome priority_dominance() {
  Outcome out;
  int wins = 0;
  std::string rows;
  for (std::uint64_t seed = 1; seed <= kDominanceSeeds; ++seed) {
    ScenarioConfig cfg;
    cfg.arrival_rate = {0.2, 0.2, 0.02, 0.02};
    cfg.duration = 600.0;
    cfg.seed = seed;
    const double rr = run_headless(cfg, ControlMode::RoundRobin).metrics.total.mean_delay;
    const double qp = run_headless(cfg, ControlMode::QueuePriority).metrics.total.mean_delay;
    if (qp < rr) ++wins;
    rows += fmt::format(" {}:{:.2f}/{:.2f}", seed, qp, rr);
  }
  if (wins < kDominanceRequired) out.fail("");
  out.detail = fmt::format("QP < RR in {}/{} seeds (qp/rr s:{})", wins, kDominanceSeeds, rows);
  return out;
}

Outcome arm_speed() {
  Outcome out;
  std::string rows;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    ScenarioConfig cfg;
    cfg.seed = seed;
    cfg.joint_speed = 0.5;
    const double slow = run_headless(cfg, ControlMode::RoundRobin).metrics.total.mean_delay;
    cfg.joint_speed = 2.0;
    const double fast = run_headless(cfg, ControlMode::RoundRobin).metrics.total.mean_delay;
    if (fast > slow) out.fail("");
    rows += fmt::format(" {}:{:.2f}/{:.2f}", seed, fast, slow);
  }
  out.detail = fmt::format("delay at 2.0/0.5 rad/s:{}", rows);
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cli(const std::string& args) {
  const std::string cmd = std::string(TRAFWARDEN_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome determinism() {
  Outcome out;
  const auto dir = fs::temp_directory_path() / "trafwarden_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  ScenarioConfig cfg;
  cfg.arrival_rate = {0.15, 0.15, 0.08, 0.08};
  cfg.seed = 31;
  std::ofstream(dir / "scenario.toml") << write_scenario(cfg);
  const auto scenario = (dir / "scenario.toml").string();

  for (const char* policy : {"round_robin", "queue_priority"}) {
    for (const char* sub : {"a", "b"}) {
      if (cli(fmt::format("run --scenario {} --policy {} --out-dir {}", scenario, policy,
                          (dir / policy / sub).string())) != 0) {
        out.fail(fmt::format("run {} failed", policy));
      }
    }
    for (const char* file : {"metrics.csv", "trace.csv"}) {
      const auto a = slurp(dir / policy / "a" / file);
      if (a.empty() || a != slurp(dir / policy / "b" / file)) {
        out.fail(fmt::format("{} {} differs between runs", policy, file));
      }
    }
  }

  // Operator session, recorded, then replayed through the CLI.
  Session woz(cfg, ControlMode::WizardOfOz);
  const std::vector<std::pair<double, TrafficSignal>> script = {
      {2.0, TrafficSignal::LeftRightStop}, {40.0, TrafficSignal::ChangeSign},
      {44.0, TrafficSignal::FrontBehindStop}, {80.0, TrafficSignal::StartLeft},
      {95.0, TrafficSignal::StartRight}, {120.0, TrafficSignal::ChangeSign},
      {124.0, TrafficSignal::LeftRightStop}, {300.0, TrafficSignal::AllStop},
      {310.0, TrafficSignal::FrontBehindStop}};
  std::size_t next = 0;
  while (!woz.finished()) {
    while (next < script.size() && woz.state().clock >= script[next].first) {
      woz.submit_operator(script[next++].second);
    }
    woz.advance();
  }
  std::ofstream(dir / "woz_trace.csv", std::ios::binary) << woz.trace_text();
  const auto recorded = metrics_csv(woz.metrics());
  if (cli(fmt::format("replay --trace {} --scenario {} --out-dir {}", (dir / "woz_trace.csv").string(),
                      scenario, (dir / "replay").string())) != 0) {
    out.fail("replay of operator trace failed");
  } else if (slurp(dir / "replay" / "metrics.csv") != recorded) {
    out.fail("replayed metrics differ from the recording");
  }
  if (out.ok) {
    out.detail = fmt::format("2 policies x 2 runs identical; operator trace of {} commands replayed",
                             woz.trace().size());
  }
  fs::remove_all(dir);
  return out;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"pose tables exact", 1.0, pose_tables},
      {"interpolation monotone, no overshoot, step count", 5.0, interpolation},
      {"forward kinematics isometry and mirror", 0.0, fk_properties},
      {"permission delta table exhaustive", 0.0, delta_semantics},
      {"sim conservation, ordering, gap safety (600 s)", 10.0, sim_invariants},
      {"stop-line braking within one step", 0.0, stop_line_compliance},
      {"controller safety, 100 seeds per policy", 0.0, controller_safety},
      {"queue priority beats round robin on asymmetric demand", 60.0, priority_dominance},
      {"faster arm never increases delay", 0.0, arm_speed},
      {"determinism: run and replay byte-identical", 0.0, determinism},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome r;
    try {
      r = c.check();
    } catch (const std::exception& e) {
      r.fail(fmt::format("exception: {}", e.what()));
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget_s > 0.0 && elapsed > c.budget_s) {
      r.ok = false;
      r.detail += fmt::format(" [over budget: {:.2f} s > {:.0f} s]", elapsed, c.budget_s);
    }
    if (!r.ok) ++failed;
    fmt::print("[{}] {} ({:.2f} s): {}\n", r.ok ? "PASS" : "FAIL", c.name, elapsed, r.detail);
  }
  fmt::print("{} of {} criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
