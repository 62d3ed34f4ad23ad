#include "trafwarden/session.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace trafwarden {

namespace {

constexpr std::uint64_t kSensorStream = 0x5EED5EED0F0F0F0FULL;
constexpr double kWarningHold = 2.0;  // s a command warning stays on screen

ControlMode validation_mode(CommandSource source) {
  return source == CommandSource::Policy ? ControlMode::QueuePriority : ControlMode::WizardOfOz;
}

}  // namespace

SignalCommand operator_command(TrafficSignal signal, double now) {
  SignalCommand cmd{.signal = signal, .issued_at = now, .source = CommandSource::Operator};
  if (signal == TrafficSignal::LeftRightStop) cmd.grant = ApproachPair::FrontBehind;
  if (signal == TrafficSignal::FrontBehindStop) cmd.grant = ApproachPair::LeftRight;
  return cmd;
}

Session::Session(ScenarioConfig cfg, ControlMode mode)
    : cfg_(std::move(cfg)),
      mode_(mode),
      policy_(PolicyConfig::from_scenario(cfg_, mode)),
      sim_(make_initial_state(cfg_)),
      sensor_rng_(cfg_.seed ^ kSensorStream) {
  validate(cfg_);
  policy_.validate();
  poll_steps_ = std::max<std::int64_t>(1, std::llround(cfg_.interim / 10.0 / cfg_.dt));
}

void Session::set_mode(ControlMode mode) {
  if (mode == mode_) return;
  mode_ = mode;
  policy_.mode = mode;
  if (is_autonomous(mode)) {
    controller_ = ControllerState{};
    controller_.phase_start = sim_.clock;
    controller_.needs_clearance =
        std::ranges::any_of(clearance_.opened_since_clearance, [](bool b) { return b; });
  }
  spdlog::info("mode -> {} at t={:.2f}", mode_name(mode), sim_.clock);
}

Validation Session::submit_operator(TrafficSignal signal) {
  if (is_autonomous(mode_)) {
    Validation v;
    v.verdict = Verdict::Reject;
    v.warnings.push_back(fmt::format("operator commands are disabled in {} mode", mode_name(mode_)));
    return v;
  }
  return submit(operator_command(signal, sim_.clock));
}

Validation Session::submit(const SignalCommand& in) {
  SignalCommand cmd = in;
  cmd.issued_at = sim_.clock;
  auto v = validate_command(sim_.commanded, cmd, validation_mode(cmd.source), clearance_);

  TraceEntry entry{.command = cmd, .step = sim_.step_index, .verdict = v.verdict,
                   .warnings = v.warnings};
  trace_.push_back(entry);
  trace_lines_ += cmd.grant ? 2 : 1;

  if (v.verdict == Verdict::Reject) {
    spdlog::warn("t={:.2f} rejected {} from {}: {}", sim_.clock, signal_name(cmd.signal),
                 source_name(cmd.source), fmt::join(v.warnings, "; "));
    return v;
  }
  clearance_.record(sim_.commanded, cmd);
  apply_signal(sim_, cfg_, cmd.signal);
  if (cmd.grant) apply_grant(sim_, cfg_, *cmd.grant);
  spdlog::debug("t={:.2f} {} {}{}", sim_.clock, source_name(cmd.source), signal_name(cmd.signal),
                cmd.grant ? fmt::format(" +grant {}", pair_name(*cmd.grant)) : "");
  return v;
}

void Session::advance() {
  if (is_autonomous(mode_) && sim_.step_index % poll_steps_ == 0) {
    std::vector<SignalCommand> cmds;
    if (mode_ == ControlMode::RoundRobin) {
      cmds = round_robin(controller_, policy_, sim_.clock);
    } else {
      const auto sensors =
          read_sensors(queue_lengths(sim_), sim_.clock, policy_.sensor_noise, sensor_rng_);
      cmds = queue_priority(controller_, policy_, sensors, sim_.clock);
    }
    for (const auto& c : cmds) submit(c);
  }
  step(sim_, cfg_);
}

void Session::run_to_end() {
  while (!finished()) advance();
}

MetricsReport Session::metrics() const {
  auto report = collect_metrics(sim_, cfg_);
  report.trace_length = trace_lines_;
  return report;
}

Trace Session::trace_record() const {
  Trace t;
  t.header.scenario_hash = scenario_hash(cfg_);
  t.header.seed = cfg_.seed;
  t.header.steps = sim_.step_index;
  t.header.metrics_hash = metrics_hash(metrics());
  t.entries = trace_;
  return t;
}

std::string Session::trace_text() const { return write_trace(trace_record(), cfg_.dt); }

std::vector<std::string> Session::active_warnings() const {
  std::vector<std::string> out;
  if (is_conflicting(sim_.effective.value)) {
    out.emplace_back("conflict: crossing streams hold effective go");
  }
  for (auto it = trace_.rbegin(); it != trace_.rend(); ++it) {
    if (sim_.clock - it->command.issued_at > kWarningHold) break;
    for (const auto& w : it->warnings) {
      out.push_back(fmt::format("{} {}: {}", verdict_name(it->verdict),
                                signal_name(it->command.signal), w));
    }
  }
  return out;
}

Snapshot Session::snapshot() {
  Snapshot s;
  s.seq = ++seq_;
  s.clock = sim_.clock;
  s.mode = mode_;
  s.phase = controller_.phase;
  for (auto a : kAllApproaches) {
    for (const auto& v : sim_.lane(a)) {
      s.vehicles.push_back({.id = v.id, .approach = a, .position = v.position, .speed = v.speed});
    }
  }
  s.permissions = sim_.commanded;
  s.effective = sim_.effective;
  s.robot_pose = sim_.robot.pose;
  s.fk = forward_kinematics(sim_.robot.pose);
  s.queues = queue_lengths(sim_);
  s.current_signal = sim_.robot.signal;
  s.warnings = active_warnings();
  return s;
}

std::string metrics_hash(const MetricsReport& report) {
  return fmt::format("{:016x}", fnv1a64(metrics_csv(report)));
}

RunResult run_headless(const ScenarioConfig& cfg, ControlMode policy) {
  Session session(cfg, policy);
  session.run_to_end();
  RunResult r;
  r.metrics = session.metrics();
  r.csv = metrics_csv(r.metrics);
  r.trace = session.trace_text();
  return r;
}

RunResult replay(const ScenarioConfig& cfg, std::string_view trace_text) {
  const auto trace = parse_trace(trace_text, cfg.dt);
  const auto expected = scenario_hash(cfg);
  if (trace.header.scenario_hash != expected || trace.header.seed != cfg.seed) {
    throw TraceError(fmt::format("trace was recorded against scenario {} (seed {}), not {} (seed {})",
                                 trace.header.scenario_hash, trace.header.seed, expected,
                                 cfg.seed));
  }

  Session session(cfg, ControlMode::WizardOfOz);
  std::size_t next = 0;
  const auto& entries = trace.entries;
  while (true) {
    while (next < entries.size() && entries[next].step == session.state().step_index) {
      const auto& e = entries[next];
      const auto v = session.submit(e.command);
      if (v.verdict != e.verdict) {
        throw TraceError(fmt::format("step {}: {} replayed as {}, recorded {}", e.step,
                                     signal_name(e.command.signal), verdict_name(v.verdict),
                                     verdict_name(e.verdict)));
      }
      ++next;
    }
    if (session.state().step_index >= trace.header.steps) break;
    session.advance();
  }
  if (next != entries.size()) throw TraceError("trace has commands past its final step");

  RunResult r;
  r.metrics = session.metrics();
  r.csv = metrics_csv(r.metrics);
  r.trace = session.trace_text();
  if (trace.header.metrics_hash && *trace.header.metrics_hash != metrics_hash(r.metrics)) {
    throw TraceError(fmt::format("replayed metrics {} differ from recorded {}",
                                 metrics_hash(r.metrics), *trace.header.metrics_hash));
  }
  return r;
}

}  // namespace trafwarden
