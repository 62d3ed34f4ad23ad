#include "trafwarden/scenario.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

#include <fmt/format.h>

namespace trafwarden {

namespace {

struct Field {
  std::string_view key;
  std::function<double&(ScenarioConfig&)> ref;
};

const std::vector<Field>& double_fields() {
  static const std::vector<Field> fields = {
      {"lambda_front", [](ScenarioConfig& c) -> double& { return c.lambda(Approach::Front); }},
      {"lambda_behind", [](ScenarioConfig& c) -> double& { return c.lambda(Approach::Behind); }},
      {"lambda_left", [](ScenarioConfig& c) -> double& { return c.lambda(Approach::Left); }},
      {"lambda_right", [](ScenarioConfig& c) -> double& { return c.lambda(Approach::Right); }},
      {"free_speed", [](ScenarioConfig& c) -> double& { return c.free_speed; }},
      {"accel", [](ScenarioConfig& c) -> double& { return c.accel; }},
      {"vehicle_length", [](ScenarioConfig& c) -> double& { return c.vehicle_length; }},
      {"standstill_gap", [](ScenarioConfig& c) -> double& { return c.standstill_gap; }},
      {"approach_length", [](ScenarioConfig& c) -> double& { return c.approach_length; }},
      {"box_size", [](ScenarioConfig& c) -> double& { return c.box_size; }},
      {"reaction_delay", [](ScenarioConfig& c) -> double& { return c.reaction_delay; }},
      {"joint_speed", [](ScenarioConfig& c) -> double& { return c.joint_speed; }},
      {"interim", [](ScenarioConfig& c) -> double& { return c.interim; }},
      {"duration", [](ScenarioConfig& c) -> double& { return c.duration; }},
      {"dt", [](ScenarioConfig& c) -> double& { return c.dt; }},
      {"min_green", [](ScenarioConfig& c) -> double& { return c.min_green; }},
      {"max_green", [](ScenarioConfig& c) -> double& { return c.max_green; }},
      {"sensor_noise", [](ScenarioConfig& c) -> double& { return c.sensor_noise; }},
  };
  return fields;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

void require(bool ok, std::string_view field, std::string_view what) {
  if (!ok) throw ConfigError(std::string(field), fmt::format("{}: {}", field, what));
}

}  // namespace

std::int64_t ScenarioConfig::total_steps() const {
  return static_cast<std::int64_t>(std::llround(duration / dt));
}

void validate(const ScenarioConfig& c) {
  auto positive = [](std::string_view name, double v) {
    require(std::isfinite(v) && v > 0.0, name, "must be a finite value > 0");
  };
  positive("free_speed", c.free_speed);
  positive("accel", c.accel);
  positive("vehicle_length", c.vehicle_length);
  positive("standstill_gap", c.standstill_gap);
  positive("approach_length", c.approach_length);
  positive("box_size", c.box_size);
  positive("reaction_delay", c.reaction_delay);
  positive("joint_speed", c.joint_speed);
  positive("interim", c.interim);
  positive("duration", c.duration);
  positive("dt", c.dt);
  positive("min_green", c.min_green);
  positive("max_green", c.max_green);
  require(c.dt <= 0.1, "dt", "must be <= 0.1 s");
  require(c.min_green <= c.max_green, "min_green", "must not exceed max_green");
  require(std::isfinite(c.sensor_noise) && c.sensor_noise >= 0.0, "sensor_noise", "must be >= 0");

  // Arrivals cannot outpace what the entrance admits at free speed, so a
  // queue always has room to form inside the approach.
  const double entry_capacity = c.free_speed / (c.vehicle_length + c.standstill_gap);
  const double queue_room = c.approach_length / (c.vehicle_length + c.standstill_gap);
  for (auto a : kAllApproaches) {
    const auto key = fmt::format("lambda_{}", approach_name(a));
    const double lambda = c.lambda(a);
    require(std::isfinite(lambda) && lambda >= 0.0, key, "must be >= 0");
    require(lambda * c.dt <= 1.0, key, "lambda * dt must be <= 1");
    require(lambda <= entry_capacity, key,
            fmt::format("exceeds entry capacity {:.4f} veh/s", entry_capacity));
  }
  require(queue_room >= 1.0, "approach_length", "too short to hold one queued vehicle");
}

ScenarioConfig parse_scenario(std::string_view text) {
  ScenarioConfig cfg;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    const auto where = fmt::format("line {}", line_no);
    if (eq == std::string_view::npos) {
      throw ConfigError(where, fmt::format("{}: expected 'key = value'", where));
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    const std::string field(key);

    if (key == "seed") {
      std::uint64_t seed = 0;
      const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), seed);
      if (ec != std::errc{} || ptr != value.data() + value.size()) {
        throw ConfigError(field, fmt::format("{}: {}: '{}' is not an unsigned integer", where,
                                             field, value));
      }
      cfg.seed = seed;
      continue;
    }

    bool known = false;
    for (const auto& f : double_fields()) {
      if (f.key != key) continue;
      known = true;
      double parsed = 0.0;
      const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), parsed);
      if (ec != std::errc{} || ptr != value.data() + value.size()) {
        throw ConfigError(field,
                          fmt::format("{}: {}: '{}' is not a number", where, field, value));
      }
      f.ref(cfg) = parsed;
    }
    if (!known) throw ConfigError(field, fmt::format("{}: unknown key '{}'", where, field));
  }
  validate(cfg);
  return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("path", fmt::format("cannot open scenario file {}", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string write_scenario(const ScenarioConfig& cfg) {
  std::string out;
  auto copy = cfg;
  for (const auto& f : double_fields()) {
    out += fmt::format("{} = {}\n", f.key, f.ref(copy));
  }
  out += fmt::format("seed = {}\n", cfg.seed);
  return out;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string scenario_hash(const ScenarioConfig& cfg) {
  return fmt::format("{:016x}", fnv1a64(write_scenario(cfg)));
}

}  // namespace trafwarden
