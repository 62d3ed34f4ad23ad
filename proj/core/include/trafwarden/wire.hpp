#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

#include <nlohmann/json.hpp>

#include "trafwarden/controller.hpp"
#include "trafwarden/scenario.hpp"
#include "trafwarden/session.hpp"
#include "trafwarden/sim.hpp"

namespace trafwarden::wire {

inline constexpr int kProtocolVersion = 1;

// Server -> client. Every message is one JSON object with a "type" field,
// serialized on a single line.
nlohmann::json hello(const ScenarioConfig& cfg, ControlMode mode);
nlohmann::json state(const Snapshot& snap);
nlohmann::json metrics(const MetricsReport& report);
nlohmann::json ack(TrafficSignal signal, const Validation& v);
nlohmann::json error(std::string_view code, std::string_view text);

nlohmann::json pose_json(const RobotPose& pose);
nlohmann::json fk_json(const PoseFrame& frame);
nlohmann::json permissions_json(const PermissionState& p);

/// Compact single-line form plus the terminating newline.
std::string frame(const nlohmann::json& message);

// Client -> server.
struct CommandMessage {
  TrafficSignal signal;
};
struct SetModeMessage {
  ControlMode mode;
};
struct MetricsRequest {};

using ClientMessage = std::variant<CommandMessage, SetModeMessage, MetricsRequest>;

/// `code` is one of: parse, type, signal, mode.
class WireError : public std::runtime_error {
 public:
  WireError(std::string code, const std::string& text)
      : std::runtime_error(text), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

/// Unknown fields are ignored. Throws WireError.
ClientMessage parse_client_message(std::string_view text);

nlohmann::json to_json(const ClientMessage& message);

}  // namespace trafwarden::wire
