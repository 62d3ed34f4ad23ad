#include "trafwarden/controller.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace trafwarden {

namespace {

constexpr double kTimeEps = 1e-9;

bool elapsed(double since, double now, double span) { return now - since + kTimeEps >= span; }

std::array<bool, 4> served_by(Phase p) {
  switch (p) {
    case Phase::FrontBehindGo: return {true, true, false, false};
    case Phase::LeftRightGo: return {false, false, true, true};
    case Phase::LeftGo: return {false, false, true, false};
    case Phase::RightGo: return {false, false, false, true};
    case Phase::AllStop:
    case Phase::Interim: break;
  }
  return {};
}

bool is_go_phase(Phase p) {
  return p == Phase::FrontBehindGo || p == Phase::LeftRightGo || p == Phase::LeftGo ||
         p == Phase::RightGo;
}

bool in_left_right_family(Phase p) {
  return p == Phase::LeftRightGo || p == Phase::LeftGo || p == Phase::RightGo;
}

// Left/right service shaped by which side actually has a queue.
Phase left_right_phase(const SensorReading& s) {
  const bool left = s[Approach::Left] > 0.0;
  const bool right = s[Approach::Right] > 0.0;
  if (left && !right) return Phase::LeftGo;
  if (right && !left) return Phase::RightGo;
  return Phase::LeftRightGo;
}

double demand(const std::array<bool, 4>& mask, const SensorReading& s) {
  double d = 0.0;
  for (auto a : kAllApproaches) {
    if (mask[index_of(a)]) d += s[a];
  }
  return d;
}

// Queue on approaches `next` serves that `current` does not.
double waiting_demand(Phase current, Phase next, const SensorReading& s) {
  const auto cur = served_by(current);
  auto add = served_by(next);
  for (std::size_t i = 0; i < add.size(); ++i) add[i] = add[i] && !cur[i];
  return demand(add, s);
}

std::vector<SignalCommand> enter(ControllerState& cs, Phase phase, double now) {
  cs.phase = phase;
  cs.phase_start = now;
  return phase_entry_commands(phase, now);
}

std::vector<SignalCommand> begin_interim(ControllerState& cs, Phase next, double now) {
  cs.next = next;
  cs.needs_clearance = false;
  return enter(cs, Phase::Interim, now);
}

Phase opposite_full(Phase p) {
  return p == Phase::FrontBehindGo ? Phase::LeftRightGo : Phase::FrontBehindGo;
}

}  // namespace

std::string_view mode_name(ControlMode m) {
  switch (m) {
    case ControlMode::WizardOfOz: return "wizard_of_oz";
    case ControlMode::RoundRobin: return "round_robin";
    case ControlMode::QueuePriority: return "queue_priority";
  }
  return "?";
}

std::optional<ControlMode> mode_from_name(std::string_view name) {
  for (auto m : {ControlMode::WizardOfOz, ControlMode::RoundRobin, ControlMode::QueuePriority}) {
    if (mode_name(m) == name) return m;
  }
  return std::nullopt;
}

std::string_view source_name(CommandSource s) {
  switch (s) {
    case CommandSource::Operator: return "operator";
    case CommandSource::Policy: return "policy";
    case CommandSource::System: return "system";
  }
  return "?";
}

std::optional<CommandSource> source_from_name(std::string_view name) {
  for (auto s : {CommandSource::Operator, CommandSource::Policy, CommandSource::System}) {
    if (source_name(s) == name) return s;
  }
  return std::nullopt;
}

std::string_view phase_name(Phase p) {
  switch (p) {
    case Phase::FrontBehindGo: return "front_behind_go";
    case Phase::LeftRightGo: return "left_right_go";
    case Phase::LeftGo: return "left_go";
    case Phase::RightGo: return "right_go";
    case Phase::AllStop: return "all_stop";
    case Phase::Interim: return "interim";
  }
  return "?";
}

std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Accept: return "accept";
    case Verdict::AcceptWithWarning: return "warn";
    case Verdict::Reject: return "reject";
  }
  return "?";
}

std::optional<Verdict> verdict_from_name(std::string_view name) {
  for (auto v : {Verdict::Accept, Verdict::AcceptWithWarning, Verdict::Reject}) {
    if (verdict_name(v) == name) return v;
  }
  return std::nullopt;
}

PermissionState resulting_state(const PermissionState& state, const SignalCommand& cmd) {
  auto out = apply_delta(state, permission_delta(cmd.signal));
  if (cmd.grant) {
    for (auto a : kAllApproaches) {
      if (pair_of(a) == *cmd.grant) out[a] = Permission::Go;
    }
  }
  return out;
}

PolicyConfig PolicyConfig::from_scenario(const ScenarioConfig& cfg, ControlMode mode) {
  return PolicyConfig{
      .mode = mode,
      .min_green = cfg.min_green,
      .max_green = cfg.max_green,
      .interim = cfg.interim,
      .sensor_noise = cfg.sensor_noise,
  };
}

void PolicyConfig::validate() const {
  if (!(min_green > 0.0 && min_green <= max_green)) {
    throw std::invalid_argument("policy: need 0 < min_green <= max_green");
  }
  if (!(interim > 0.0)) throw std::invalid_argument("policy: interim must be > 0");
  if (!(sensor_noise >= 0.0)) throw std::invalid_argument("policy: sensor_noise must be >= 0");
}

SensorReading read_sensors(const std::array<std::uint64_t, 4>& stopped, double now, double sigma,
                           SplitMix64& rng) {
  SensorReading r;
  r.timestamp = now;
  for (std::size_t i = 0; i < stopped.size(); ++i) {
    const auto exact = static_cast<double>(stopped[i]);
    r.queue[i] = sigma > 0.0 ? std::max(0.0, std::round(exact + sigma * rng.normal())) : exact;
  }
  return r;
}

std::vector<SignalCommand> phase_entry_commands(Phase phase, double now, CommandSource source) {
  auto cmd = [&](TrafficSignal s, std::optional<ApproachPair> grant = std::nullopt) {
    return SignalCommand{.signal = s, .issued_at = now, .source = source, .grant = grant};
  };
  switch (phase) {
    case Phase::FrontBehindGo:
      return {cmd(TrafficSignal::LeftRightStop, ApproachPair::FrontBehind)};
    case Phase::LeftRightGo:
      return {cmd(TrafficSignal::FrontBehindStop, ApproachPair::LeftRight)};
    case Phase::LeftGo: return {cmd(TrafficSignal::StartLeft)};
    case Phase::RightGo: return {cmd(TrafficSignal::StartRight)};
    case Phase::AllStop: return {cmd(TrafficSignal::AllStop)};
    case Phase::Interim: return {cmd(TrafficSignal::ChangeSign)};
  }
  return {};
}

std::vector<SignalCommand> round_robin(ControllerState& cs, const PolicyConfig& cfg, double now) {
  switch (cs.phase) {
    case Phase::AllStop:
      if (cs.needs_clearance) return begin_interim(cs, Phase::FrontBehindGo, now);
      return enter(cs, Phase::FrontBehindGo, now);
    case Phase::Interim:
      if (elapsed(cs.phase_start, now, cfg.interim)) return enter(cs, cs.next, now);
      return {};
    case Phase::FrontBehindGo:
    case Phase::LeftRightGo:
    case Phase::LeftGo:
    case Phase::RightGo:
      if (elapsed(cs.phase_start, now, cfg.max_green)) {
        return begin_interim(cs, opposite_full(cs.phase), now);
      }
      return {};
  }
  return {};
}

std::vector<SignalCommand> queue_priority(ControllerState& cs, const PolicyConfig& cfg,
                                          const SensorReading& sensors, double now) {
  if (cs.phase == Phase::AllStop) {
    const double fb = sensors[Approach::Front] + sensors[Approach::Behind];
    const double lr = sensors[Approach::Left] + sensors[Approach::Right];
    const Phase first = lr > fb ? left_right_phase(sensors) : Phase::FrontBehindGo;
    if (cs.needs_clearance) return begin_interim(cs, first, now);
    return enter(cs, first, now);
  }

  if (cs.phase == Phase::Interim) {
    if (!elapsed(cs.phase_start, now, cfg.interim)) return {};
    Phase next = cs.next;
    if (in_left_right_family(next)) {
      const bool any = sensors[Approach::Left] > 0.0 || sensors[Approach::Right] > 0.0;
      if (any) next = left_right_phase(sensors);
    }
    return enter(cs, next, now);
  }

  // Single-side service widens to both sides as soon as the other side
  // queues; no crossing stream is involved so no interim is needed.
  if ((cs.phase == Phase::LeftGo && sensors[Approach::Right] > 0.0) ||
      (cs.phase == Phase::RightGo && sensors[Approach::Left] > 0.0)) {
    cs.phase = Phase::LeftRightGo;
    return phase_entry_commands(Phase::LeftRightGo, now);
  }

  if (!elapsed(cs.phase_start, now, cfg.min_green)) return {};

  const Phase alt = cs.phase == Phase::FrontBehindGo ? left_right_phase(sensors)
                                                     : Phase::FrontBehindGo;
  const double waiting = waiting_demand(cs.phase, alt, sensors);
  const double served = demand(served_by(cs.phase), sensors);
  const bool overdue = elapsed(cs.phase_start, now, cfg.max_green) && waiting > 0.0;
  if (waiting > served || overdue) return begin_interim(cs, alt, now);
  return {};
}

void ClearanceTracker::record(const PermissionState& before, const SignalCommand& cmd) {
  if (cmd.signal == TrafficSignal::ChangeSign) {
    opened_since_clearance = {};
    last_change_sign = cmd.issued_at;
  }
  const auto after = resulting_state(before, cmd);
  for (auto a : kAllApproaches) {
    if (after.go(a) && !before.go(a)) opened_since_clearance[index_of(a)] = true;
  }
}

Validation validate_command(const PermissionState& state, const SignalCommand& cmd,
                            ControlMode mode, const ClearanceTracker& clearance) {
  Validation v;
  const auto after = resulting_state(state, cmd);
  if (is_conflicting(after)) {
    std::string go;
    for (auto a : kAllApproaches) {
      if (after.go(a)) go += fmt::format("{}{}", go.empty() ? "" : ",", approach_name(a));
    }
    v.warnings.push_back(fmt::format("conflict: crossing streams would both go ({})", go));
  }
  if (cmd.signal != TrafficSignal::ChangeSign) {
    for (auto a : kAllApproaches) {
      if (!after.go(a) || state.go(a)) continue;
      for (auto c : kAllApproaches) {
        if (pair_of(c) == pair_of(a) || !clearance.opened_since_clearance[index_of(c)]) continue;
        v.warnings.push_back(fmt::format(
            "clearance: {} opened without change_sign since {} had go", approach_name(a),
            approach_name(c)));
      }
    }
  }
  if (!v.warnings.empty()) {
    v.verdict = is_autonomous(mode) ? Verdict::Reject : Verdict::AcceptWithWarning;
  }
  return v;
}

}  // namespace trafwarden
