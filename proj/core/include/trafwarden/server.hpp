#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "trafwarden/controller.hpp"
#include "trafwarden/scenario.hpp"
#include "trafwarden/session.hpp"

namespace trafwarden {

struct ServeOptions {
  std::string host = "127.0.0.1";
  unsigned short port = 8765;  // 0 picks a free port
  double fps = 20.0;
  double speed = 1.0;  // simulated seconds per wall second
  ControlMode mode = ControlMode::WizardOfOz;
  bool stop_at_end = false;  // stop after the scenario duration
  std::optional<std::filesystem::path> out_dir;
};

/// Live operator session over WebSocket. Each text frame carries one
/// newline-terminated JSON message (see wire.hpp).
///
/// The simulation runs on its own thread and owns the Session. Network I/O
/// runs on a second thread; inbound messages go through an ordered queue
/// drained at step boundaries, outbound state snapshots are immutable
/// strings and a slow client only ever holds the newest one.
class SessionServer {
 public:
  SessionServer(ScenarioConfig cfg, ServeOptions opts);
  ~SessionServer();

  SessionServer(const SessionServer&) = delete;
  SessionServer& operator=(const SessionServer&) = delete;

  /// Binds and starts both threads. Throws std::system_error on bind failure.
  void start();
  /// Stops both threads; writes trace.csv and metrics.csv when out_dir is set.
  void stop();
  /// Blocks until stop() is called or the scenario ends with stop_at_end.
  void wait();

  unsigned short port() const;
  bool running() const;

  /// Only valid once stopped.
  const Session& session() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace trafwarden
