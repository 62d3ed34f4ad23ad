#include "trafwarden/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace trafwarden {

namespace {

constexpr double kTimeEps = 1e-9;
constexpr double kStoppedSpeed = 0.1;

// Re-evaluates effective permissions. Approaches that just turned Stop mark
// the vehicles that can no longer brake before the line as committed.
void refresh_effective(SimState& s, const ScenarioConfig& cfg) {
  const auto next = effective_permissions(s.effective, s.commanded, s.robot.motion_done, s.clock,
                                          cfg.reaction_delay);
  for (auto a : kAllApproaches) {
    if (s.effective[a] == Permission::Go && next[a] == Permission::Stop) {
      for (auto& v : s.lane(a)) {
        if (v.in_box()) continue;
        const double braking = v.speed * v.speed / (2.0 * cfg.accel);
        v.committed = braking > v.position;
      }
    }
  }
  s.effective = next;
}

void advance_lane(SimState& s, const ScenarioConfig& cfg, Approach a) {
  auto& lane = s.lane(a);
  const bool stop = s.effective[a] == Permission::Stop;
  const double dt = cfg.dt;
  const double exit = -(cfg.box_size + cfg.vehicle_length);
  const double spacing = cfg.vehicle_length + cfg.standstill_gap;
  constexpr double kInf = std::numeric_limits<double>::infinity();

  std::size_t retired = 0;
  for (std::size_t i = 0; i < lane.size(); ++i) {
    Vehicle& v = lane[i];
    double room = kInf;
    if (stop && !v.committed && v.position >= 0.0) room = v.position;
    if (i > 0) room = std::min(room, v.position - (lane[i - 1].position + spacing));
    room = std::max(room, 0.0);

    double speed = std::min(v.speed + cfg.accel * dt, cfg.free_speed);
    double travel = speed * dt;
    if (room < kInf) {
      speed = std::min(speed, std::sqrt(2.0 * cfg.accel * room));
      travel = speed * dt;
      if (travel >= room) {
        travel = room;
        speed = room / dt;
      }
    }

    const double before = v.position;
    v.position = before - travel;
    v.speed = speed;

    if (before >= 0.0 && v.position < 0.0 && stop) {
      if (v.committed) {
        ++s.committed_crossings;
      } else {
        ++s.stop_line_violations;
      }
    }

    if (v.position <= exit) {
      const double fraction = travel > 0.0 ? (before - exit) / travel : 1.0;
      const double done = s.clock - dt + dt * fraction;
      v.cross_complete_time = done;
      auto& c = s.counters[index_of(a)];
      ++c.crossed;
      c.crossed_delay_sum += std::max(0.0, (done - v.spawn_time) - cfg.free_flow_time());
      ++retired;
    }
  }
  // Only a prefix can leave: order never changes.
  lane.erase(lane.begin(), lane.begin() + static_cast<std::ptrdiff_t>(retired));
}

}  // namespace

std::size_t SimState::in_system() const {
  std::size_t n = 0;
  for (const auto& lane : lanes) n += lane.size();
  return n;
}

EffectivePermission effective_permissions(const EffectivePermission& prior,
                                          const PermissionState& commanded,
                                          std::optional<double> gesture_done, double now,
                                          double reaction) {
  EffectivePermission out = prior;
  for (auto a : kAllApproaches) {
    const auto i = index_of(a);
    if (commanded[a] == Permission::Stop) {
      if (prior[a] == Permission::Go) {
        out.value[a] = Permission::Stop;
        out.since[i] = now;
      }
      continue;
    }
    if (prior[a] == Permission::Go || !gesture_done) continue;
    const double at = *gesture_done + reaction;
    if (now + kTimeEps >= at) {
      out.value[a] = Permission::Go;
      out.since[i] = at;
    }
  }
  return out;
}

SimState make_initial_state(const ScenarioConfig& cfg) {
  SimState s;
  s.rng = SplitMix64(cfg.seed);
  return s;
}

std::vector<Vehicle> spawn_arrivals(SimState& s, const ScenarioConfig& cfg) {
  std::vector<Vehicle> spawned;
  const double entrance_clear = cfg.approach_length - (cfg.vehicle_length + cfg.standstill_gap);
  for (auto a : kAllApproaches) {
    if (!s.rng.bernoulli(cfg.lambda(a) * cfg.dt)) continue;
    auto& c = s.counters[index_of(a)];
    ++c.attempted;
    auto& lane = s.lane(a);
    if (!lane.empty() && lane.back().position > entrance_clear) {
      ++c.blocked;
      continue;
    }
    Vehicle v;
    v.id = s.next_vehicle_id++;
    v.approach = a;
    v.position = cfg.approach_length;
    v.speed = cfg.free_speed;
    v.spawn_time = s.clock;
    lane.push_back(v);
    ++c.spawned;
    spawned.push_back(v);
  }
  return spawned;
}

void apply_signal(SimState& s, const ScenarioConfig& cfg, TrafficSignal signal) {
  s.commanded = apply_delta(s.commanded, permission_delta(signal));
  s.robot.signal = signal;
  s.robot.target = signal_target_pose(signal);
  s.robot.motion_done.reset();
  if (motion_duration(s.robot.pose, s.robot.target, cfg.joint_speed) <= kDoneTolerance) {
    s.robot.motion_done = s.clock;
  }
  ++s.commands_applied;
  refresh_effective(s, cfg);
}

void apply_grant(SimState& s, const ScenarioConfig& cfg, ApproachPair pair) {
  for (auto a : kAllApproaches) {
    if (pair_of(a) == pair) s.commanded[a] = Permission::Go;
  }
  ++s.commands_applied;
  refresh_effective(s, cfg);
}

std::uint64_t detect_conflicts(SimState& s) {
  std::uint64_t added = 0;
  for (auto fb : {Approach::Front, Approach::Behind}) {
    for (const auto& v : s.lane(fb)) {
      if (!v.in_box()) continue;
      for (auto lr : {Approach::Left, Approach::Right}) {
        for (const auto& w : s.lane(lr)) {
          if (!w.in_box()) continue;
          if (s.conflict_pairs.emplace(v.id, w.id).second) ++added;
        }
      }
    }
  }
  s.conflicts += added;
  return added;
}

std::array<std::uint64_t, 4> queue_lengths(const SimState& s) {
  std::array<std::uint64_t, 4> q{};
  for (auto a : kAllApproaches) {
    for (const auto& v : s.lane(a)) {
      if (v.position >= 0.0 && v.speed < kStoppedSpeed) ++q[index_of(a)];
    }
  }
  return q;
}

void step(SimState& s, const ScenarioConfig& cfg) {
  ++s.step_index;
  s.clock = static_cast<double>(s.step_index) * cfg.dt;

  const auto motion = interpolate(s.robot.pose, s.robot.target, cfg.joint_speed, cfg.dt);
  s.robot.pose = motion.pose;
  if (motion.done && !s.robot.motion_done) s.robot.motion_done = s.clock;

  refresh_effective(s, cfg);
  for (auto a : kAllApproaches) advance_lane(s, cfg, a);
  spawn_arrivals(s, cfg);
  detect_conflicts(s);

  const auto q = queue_lengths(s);
  std::uint64_t total = 0;
  for (auto a : kAllApproaches) {
    auto& c = s.counters[index_of(a)];
    c.max_queue = std::max(c.max_queue, q[index_of(a)]);
    total += q[index_of(a)];
  }
  s.total_max_queue = std::max(s.total_max_queue, total);
}

MetricsReport collect_metrics(const SimState& s, const ScenarioConfig& cfg) {
  MetricsReport r;
  double total_delay = 0.0;
  std::uint64_t total_count = 0;
  const double free_flow = cfg.free_flow_time();

  for (auto a : kAllApproaches) {
    const auto& c = s.counters[index_of(a)];
    auto& m = r.approach[index_of(a)];
    m.arrivals = c.spawned;
    m.crossed = c.crossed;
    m.blocked = c.blocked;
    m.in_system = s.lane(a).size();
    m.max_queue = c.max_queue;

    double delay = c.crossed_delay_sum;
    for (const auto& v : s.lane(a)) delay += std::max(0.0, (s.clock - v.spawn_time) - free_flow);
    const auto count = m.crossed + m.in_system;
    m.mean_delay = count > 0 ? delay / static_cast<double>(count) : 0.0;

    total_delay += delay;
    total_count += count;
    r.total.arrivals += m.arrivals;
    r.total.crossed += m.crossed;
    r.total.blocked += m.blocked;
    r.total.in_system += m.in_system;
  }
  r.total.mean_delay = total_count > 0 ? total_delay / static_cast<double>(total_count) : 0.0;
  r.total.max_queue = s.total_max_queue;
  r.conflicts = s.conflicts;
  r.trace_length = s.commands_applied;
  r.end_time = s.clock;
  return r;
}

std::string metrics_csv(const MetricsReport& r) {
  std::string out = "approach,arrivals,crossed,mean_delay_s,max_queue\n";
  auto row = [&out](std::string_view name, const ApproachMetrics& m) {
    out += fmt::format("{},{},{},{:.6f},{}\n", name, m.arrivals, m.crossed, m.mean_delay,
                       m.max_queue);
  };
  for (auto a : kAllApproaches) row(approach_name(a), r.approach[index_of(a)]);
  row("total", r.total);
  out += fmt::format("conflicts,{},,,\n", r.conflicts);
  return out;
}

}  // namespace trafwarden
