#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <spdlog/cfg/env.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "trafwarden/scenario.hpp"
#include "trafwarden/server.hpp"
#include "trafwarden/session.hpp"

namespace fs = std::filesystem;
using namespace trafwarden;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

struct RunArgs {
  std::string scenario;
  std::string policy = "round_robin";
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
};

struct ServeArgs {
  std::string scenario;
  std::string bind = "127.0.0.1:8765";
  double fps = 20.0;
  double speed = 1.0;
  std::string mode = "wizard_of_oz";
  std::string out_dir;
  bool until_end = false;
};

struct ReplayArgs {
  std::string trace;
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
};

class UsageError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

ScenarioConfig scenario_from(const std::string& path, std::optional<std::uint64_t> seed) {
  ScenarioConfig cfg = path.empty() ? ScenarioConfig{} : load_scenario(path);
  if (seed) {
    cfg.seed = *seed;
    validate(cfg);
  }
  return cfg;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("short write to " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cmd_run(const RunArgs& args) {
  const auto cfg = scenario_from(args.scenario, args.seed);
  const auto mode = mode_from_name(args.policy);
  if (!mode || !is_autonomous(*mode)) {
    throw UsageError("--policy must be round_robin or queue_priority");
  }
  spdlog::info("run: {} s under {}, seed {}, scenario {}", cfg.duration, args.policy, cfg.seed,
               scenario_hash(cfg));
  const auto result = run_headless(cfg, *mode);
  fs::create_directories(args.out_dir);
  write_file(fs::path(args.out_dir) / "metrics.csv", result.csv);
  write_file(fs::path(args.out_dir) / "trace.csv", result.trace);
  spdlog::info("crossed {} of {} arrivals, mean delay {:.2f} s, conflicts {}",
               result.metrics.total.crossed, result.metrics.total.arrivals,
               result.metrics.total.mean_delay, result.metrics.conflicts);
  return kOk;
}

std::sig_atomic_t volatile g_interrupted = 0;

int cmd_serve(const ServeArgs& args) {
  const auto cfg = scenario_from(args.scenario, std::nullopt);
  ServeOptions opts;
  const auto colon = args.bind.rfind(':');
  if (colon == std::string::npos) throw UsageError("--bind must be host:port");
  opts.host = args.bind.substr(0, colon);
  try {
    const auto port = std::stoul(args.bind.substr(colon + 1));
    if (port > 65535) throw std::out_of_range("port");
    opts.port = static_cast<unsigned short>(port);
  } catch (const std::logic_error&) {
    throw UsageError("--bind port must be 0..65535");
  }
  if (!(args.fps > 0.0)) throw UsageError("--fps must be positive");
  if (!(args.speed > 0.0)) throw UsageError("--speed must be positive");
  opts.fps = args.fps;
  opts.speed = args.speed;
  const auto mode = mode_from_name(args.mode);
  if (!mode) throw UsageError("unknown --mode " + args.mode);
  opts.mode = *mode;
  opts.stop_at_end = args.until_end;
  if (!args.out_dir.empty()) opts.out_dir = args.out_dir;

  SessionServer server(cfg, opts);
  server.start();
  std::cout << "listening on ws://" << opts.host << ':' << server.port() << '/' << std::endl;

  std::signal(SIGINT, [](int) { g_interrupted = 1; });
  std::signal(SIGTERM, [](int) { g_interrupted = 1; });
  while (server.running() && !g_interrupted) {
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
  server.stop();
  return kOk;
}

int cmd_replay(const ReplayArgs& args) {
  const auto cfg = scenario_from(args.scenario, args.seed);
  const auto text = read_file(args.trace);
  const auto result = replay(cfg, text);
  if (args.out_dir.empty()) {
    std::cout << result.csv;
  } else {
    fs::create_directories(args.out_dir);
    write_file(fs::path(args.out_dir) / "metrics.csv", result.csv);
    write_file(fs::path(args.out_dir) / "trace.csv", result.trace);
  }
  spdlog::info("replay matched: metrics {}", metrics_hash(result.metrics));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  auto logger = spdlog::stderr_color_mt("trafwarden");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  spdlog::cfg::load_env_levels();  // SPDLOG_LEVEL
  if (const char* level = std::getenv("TRAFWARDEN_LOG")) {
    spdlog::set_level(spdlog::level::from_str(level));
  }

  CLI::App app{"Robot traffic-warden intersection simulator"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Headless run under an autonomous policy");
  run_cmd->add_option("--scenario", run.scenario, "Scenario file (defaults if omitted)");
  run_cmd->add_option("--policy", run.policy, "round_robin or queue_priority")
      ->capture_default_str();
  run_cmd->add_option("--seed", run.seed, "Override the scenario seed");
  run_cmd->add_option("--out-dir", run.out_dir, "Where metrics.csv and trace.csv go")
      ->capture_default_str();

  ServeArgs serve;
  auto* serve_cmd = app.add_subcommand("serve", "Live WebSocket session for the operator UI");
  serve_cmd->add_option("--scenario", serve.scenario, "Scenario file (defaults if omitted)");
  serve_cmd->add_option("--bind", serve.bind, "host:port; port 0 picks a free one")
      ->capture_default_str();
  serve_cmd->add_option("--fps", serve.fps, "State snapshots per simulated second")
      ->capture_default_str();
  serve_cmd->add_option("--speed", serve.speed, "Simulated seconds per wall second")
      ->capture_default_str();
  serve_cmd->add_option("--mode", serve.mode, "wizard_of_oz, round_robin or queue_priority")
      ->capture_default_str();
  serve_cmd->add_option("--out-dir", serve.out_dir, "Write trace.csv and metrics.csv on exit");
  serve_cmd->add_flag("--until-end", serve.until_end, "Exit once the scenario duration elapses");

  ReplayArgs rep;
  auto* replay_cmd = app.add_subcommand("replay", "Re-run a recorded command trace");
  replay_cmd->add_option("--trace", rep.trace, "Trace file")->required();
  replay_cmd->add_option("--scenario", rep.scenario, "Scenario file (defaults if omitted)");
  replay_cmd->add_option("--seed", rep.seed, "Override the scenario seed");
  replay_cmd->add_option("--out-dir", rep.out_dir, "Write files here instead of metrics to stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*run_cmd) return cmd_run(run);
    if (*serve_cmd) return cmd_serve(serve);
    if (*replay_cmd) return cmd_replay(rep);
  } catch (const ConfigError& e) {
    spdlog::error("config: {}", e.what());
    return kConfigError;
  } catch (const UsageError& e) {
    spdlog::error("{}", e.what());
    return kConfigError;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kRuntimeError;
  }
  return kOk;
}
