#include "trafwarden/wire.hpp"

#include <fmt/format.h>

namespace trafwarden::wire {

using nlohmann::json;

namespace {

json point(Point2 p) { return json::array({p.x, p.y}); }

json arm_json(const ArmFrame& arm) {
  return {{"shoulder", point(arm.shoulder)},
          {"elbow", point(arm.elbow)},
          {"wrist", point(arm.wrist)},
          {"fingertip", point(arm.fingertip)}};
}

json approach_map(const auto& values, auto&& convert) {
  json out = json::object();
  for (auto a : kAllApproaches) out[std::string(approach_name(a))] = convert(values[index_of(a)]);
  return out;
}

json approach_metrics(const ApproachMetrics& m) {
  return {{"arrivals", m.arrivals}, {"crossed", m.crossed},       {"blocked", m.blocked},
          {"in_system", m.in_system}, {"mean_delay_s", m.mean_delay}, {"max_queue", m.max_queue}};
}

}  // namespace

json hello(const ScenarioConfig& cfg, ControlMode mode) {
  json scenario = json::object();
  const auto text = write_scenario(cfg);
  std::string_view rest = text;
  while (!rest.empty()) {
    const auto nl = rest.find('\n');
    const auto line = rest.substr(0, nl);
    rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
    const auto eq = line.find(" = ");
    if (eq == std::string_view::npos) continue;
    const std::string key(line.substr(0, eq));
    const std::string value(line.substr(eq + 3));
    if (key == "seed") {
      scenario[key] = cfg.seed;
    } else {
      scenario[key] = std::stod(value);
    }
  }
  return {{"type", "hello"},
          {"version", kProtocolVersion},
          {"mode", mode_name(mode)},
          {"scenario_hash", scenario_hash(cfg)},
          {"scenario", scenario}};
}

json pose_json(const RobotPose& pose) {
  json out = json::object();
  for (auto j : kAllJoints) out[std::string(joint_name(j))] = pose[j];
  return out;
}

json fk_json(const PoseFrame& f) {
  return {{"left", arm_json(f.left)},
          {"right", arm_json(f.right)},
          {"head", point(f.head_center)},
          {"head_yaw", f.head_yaw},
          {"torso_top", f.torso_top}};
}

json permissions_json(const PermissionState& p) {
  return approach_map(p.value, [](Permission v) { return std::string(permission_name(v)); });
}

json state(const Snapshot& s) {
  json vehicles = json::array();
  for (const auto& v : s.vehicles) {
    vehicles.push_back({{"id", v.id},
                        {"approach", approach_name(v.approach)},
                        {"s", v.position},
                        {"speed", v.speed}});
  }
  json effective = permissions_json(s.effective.value);
  json since = approach_map(s.effective.since, [](double t) { return t; });
  return {{"type", "state"},
          {"seq", s.seq},
          {"clock", s.clock},
          {"mode", mode_name(s.mode)},
          {"phase", phase_name(s.phase)},
          {"vehicles", vehicles},
          {"permissions", permissions_json(s.permissions)},
          {"effective_permissions", effective},
          {"effective_since", since},
          {"robot_pose", pose_json(s.robot_pose)},
          {"fk_points", fk_json(s.fk)},
          {"queues", approach_map(s.queues, [](std::uint64_t q) { return q; })},
          {"current_signal",
           s.current_signal ? json(signal_name(*s.current_signal)) : json(nullptr)},
          {"warnings", s.warnings}};
}

json metrics(const MetricsReport& r) {
  json per = json::object();
  for (auto a : kAllApproaches) {
    per[std::string(approach_name(a))] = approach_metrics(r.approach[index_of(a)]);
  }
  return {{"type", "metrics"},
          {"report",
           {{"approaches", per},
            {"total", approach_metrics(r.total)},
            {"conflicts", r.conflicts},
            {"trace_length", r.trace_length},
            {"end_time", r.end_time}}}};
}

json ack(TrafficSignal signal, const Validation& v) {
  return {{"type", "ack"},
          {"signal", signal_name(signal)},
          {"result", verdict_name(v.verdict)},
          {"warnings", v.warnings}};
}

json error(std::string_view code, std::string_view text) {
  return {{"type", "error"}, {"code", code}, {"text", text}};
}

std::string frame(const json& message) {
  auto out = message.dump();
  out += '\n';
  return out;
}

ClientMessage parse_client_message(std::string_view text) {
  json msg;
  try {
    msg = json::parse(text);
  } catch (const json::parse_error& e) {
    throw WireError("parse", fmt::format("malformed JSON: {}", e.what()));
  }
  if (!msg.is_object()) throw WireError("parse", "message must be a JSON object");
  const auto type = msg.find("type");
  if (type == msg.end() || !type->is_string()) throw WireError("type", "missing \"type\"");

  const auto& kind = type->get_ref<const std::string&>();
  if (kind == "command") {
    const auto sig = msg.find("signal");
    if (sig == msg.end() || !sig->is_string()) throw WireError("signal", "missing \"signal\"");
    const auto signal = signal_from_name(sig->get_ref<const std::string&>());
    if (!signal) {
      throw WireError("signal", fmt::format("unknown signal '{}'", sig->get<std::string>()));
    }
    return CommandMessage{*signal};
  }
  if (kind == "set_mode") {
    const auto m = msg.find("mode");
    if (m == msg.end() || !m->is_string()) throw WireError("mode", "missing \"mode\"");
    const auto mode = mode_from_name(m->get_ref<const std::string&>());
    if (!mode) throw WireError("mode", fmt::format("unknown mode '{}'", m->get<std::string>()));
    return SetModeMessage{*mode};
  }
  if (kind == "metrics") return MetricsRequest{};
  throw WireError("type", fmt::format("unsupported message type '{}'", kind));
}

json to_json(const ClientMessage& message) {
  return std::visit(
      [](const auto& m) -> json {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, CommandMessage>) {
          return {{"type", "command"}, {"signal", signal_name(m.signal)}};
        } else if constexpr (std::is_same_v<T, SetModeMessage>) {
          return {{"type", "set_mode"}, {"mode", mode_name(m.mode)}};
        } else {
          return {{"type", "metrics"}};
        }
      },
      message);
}

}  // namespace trafwarden::wire
