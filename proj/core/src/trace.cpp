#include "trafwarden/trace.hpp"

#include <charconv>
#include <cmath>

#include <fmt/format.h>

namespace trafwarden {

namespace {

constexpr std::string_view kMagic = "# trafwarden command trace v1";
constexpr std::string_view kColumns = "time_s,source,signal,result";
constexpr std::string_view kGrantPrefix = "grant:";

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view text, T& out) {
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

[[noreturn]] void fail(std::size_t line, std::string_view what) {
  throw TraceError(fmt::format("trace line {}: {}", line, what));
}

}  // namespace

std::string write_trace(const Trace& trace, double dt) {
  std::string out(kMagic);
  out += '\n';
  out += fmt::format("# scenario_hash={} seed={} steps={}", trace.header.scenario_hash,
                     trace.header.seed, trace.header.steps);
  if (trace.header.metrics_hash) out += fmt::format(" metrics_hash={}", *trace.header.metrics_hash);
  out += '\n';
  out += kColumns;
  out += '\n';
  for (const auto& e : trace.entries) {
    const double t = static_cast<double>(e.step) * dt;
    const auto src = source_name(e.command.source);
    const auto verdict = verdict_name(e.verdict);
    out += fmt::format("{:.6f},{},{},{}\n", t, src, signal_name(e.command.signal), verdict);
    if (e.command.grant) {
      out += fmt::format("{:.6f},{},{}{},{}\n", t, src, kGrantPrefix, pair_name(*e.command.grant),
                         verdict);
    }
  }
  return out;
}

Trace parse_trace(std::string_view text, double dt) {
  Trace trace;
  std::size_t line_no = 0;
  bool saw_magic = false;
  bool saw_header = false;
  bool saw_columns = false;

  while (!text.empty()) {
    const auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;

    if (!saw_magic) {
      if (line != kMagic) fail(line_no, "not a trafwarden command trace");
      saw_magic = true;
      continue;
    }
    if (!saw_header) {
      if (!line.starts_with("# ")) fail(line_no, "missing header");
      for (auto field : split(line.substr(2), ' ')) {
        const auto eq = field.find('=');
        if (eq == std::string_view::npos) fail(line_no, "malformed header field");
        const auto key = field.substr(0, eq);
        const auto value = field.substr(eq + 1);
        if (key == "scenario_hash") {
          trace.header.scenario_hash = std::string(value);
        } else if (key == "seed") {
          if (!parse_number(value, trace.header.seed)) fail(line_no, "bad seed");
        } else if (key == "steps") {
          if (!parse_number(value, trace.header.steps)) fail(line_no, "bad steps");
        } else if (key == "metrics_hash") {
          trace.header.metrics_hash = std::string(value);
        }
      }
      if (trace.header.scenario_hash.empty()) fail(line_no, "header lacks scenario_hash");
      saw_header = true;
      continue;
    }
    if (!saw_columns) {
      if (line != kColumns) fail(line_no, "unexpected column header");
      saw_columns = true;
      continue;
    }

    const auto cols = split(line, ',');
    if (cols.size() != 4) fail(line_no, "expected 4 columns");
    double t = 0.0;
    if (!parse_number(cols[0], t) || t < 0.0) fail(line_no, "bad time");
    const auto source = source_from_name(cols[1]);
    if (!source) fail(line_no, "unknown source");
    const auto verdict = verdict_from_name(cols[3]);
    if (!verdict) fail(line_no, "unknown result");
    const auto step = static_cast<std::int64_t>(std::llround(t / dt));

    if (cols[2].starts_with(kGrantPrefix)) {
      const auto pair = pair_from_name(cols[2].substr(kGrantPrefix.size()));
      if (!pair) fail(line_no, "unknown grant");
      if (trace.entries.empty() || trace.entries.back().step != step ||
          trace.entries.back().command.grant) {
        fail(line_no, "grant without a preceding gesture");
      }
      trace.entries.back().command.grant = *pair;
      continue;
    }

    const auto signal = signal_from_name(cols[2]);
    if (!signal) fail(line_no, fmt::format("unknown signal '{}'", cols[2]));
    if (!trace.entries.empty() && trace.entries.back().step > step) {
      fail(line_no, "time goes backwards");
    }
    TraceEntry e;
    e.command = SignalCommand{.signal = *signal,
                              .issued_at = static_cast<double>(step) * dt,
                              .source = *source,
                              .grant = std::nullopt};
    e.step = step;
    e.verdict = *verdict;
    trace.entries.push_back(std::move(e));
  }
  if (!saw_columns) throw TraceError("trace: truncated header");
  return trace;
}

}  // namespace trafwarden
