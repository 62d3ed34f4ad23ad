#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "trafwarden/controller.hpp"

namespace trafwarden {

struct TraceEntry {
  SignalCommand command;
  std::int64_t step = 0;
  Verdict verdict = Verdict::Accept;
  std::vector<std::string> warnings;
};

struct TraceHeader {
  std::string scenario_hash;
  std::uint64_t seed = 0;
  std::int64_t steps = 0;
  std::optional<std::string> metrics_hash;
};

struct Trace {
  TraceHeader header;
  std::vector<TraceEntry> entries;
};

class TraceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Text form:
///
///   # trafwarden command trace v1
///   # scenario_hash=<16 hex> seed=<n> steps=<n> [metrics_hash=<16 hex>]
///   time_s,source,signal,result
///   12.300000,policy,left_right_stop,accept
///   12.300000,policy,grant:front_behind,accept
///
/// A grant line follows the gesture it belongs to.
std::string write_trace(const Trace& trace, double dt);

/// Throws TraceError on malformed input.
Trace parse_trace(std::string_view text, double dt);

}  // namespace trafwarden
