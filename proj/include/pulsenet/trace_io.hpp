#pragma once

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "pulsenet/engine.hpp"
#include "pulsenet/errors.hpp"

namespace pulsenet {

// Shortest representation that round-trips to the same double.
inline std::string format_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{})
    return "nan";
  return std::string(buf, end);
}

// Unit indices are written 1-based, semicolon separated.
inline std::string format_members(const UnitSet &members) {
  std::string out;
  for (std::size_t k = 0; k < members.size(); ++k) {
    if (k)
      out += ';';
    out += std::to_string(members[k] + 1);
  }
  return out;
}

inline void write_events_csv(std::ostream &os, const Trace &trace) {
  os << "n,t,coalition_size,members\n";
  for (const auto &ev : trace.events)
    os << ev.n << ',' << format_double(ev.t) << ',' << ev.coalition.size()
       << ',' << format_members(ev.coalition) << '\n';
}

inline void write_samples_csv(std::ostream &os, const Trace &trace) {
  os << 't';
  for (std::size_t i = 0; i < trace.units; ++i)
    os << ",S_" << i + 1;
  os << '\n';
  for (const auto &row : trace.samples) {
    os << format_double(row.t);
    for (double s : row.satisfactions)
      os << ',' << format_double(s);
    os << '\n';
  }
}

namespace detail {

inline std::ofstream open_output(const std::filesystem::path &path) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os)
    throw Error("cannot write " + path.string());
  return os;
}

inline std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.emplace_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos)
      break;
    start = pos + 1;
  }
  return out;
}

template <class T> T parse_number(const std::string &s, std::size_t line) {
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw ConfigError("events.csv line " + std::to_string(line) +
                      ": bad number '" + s + "'");
  return v;
}

} // namespace detail

inline void write_events_csv(const std::filesystem::path &path,
                             const Trace &trace) {
  auto os = detail::open_output(path);
  write_events_csv(os, trace);
}

inline void write_samples_csv(const std::filesystem::path &path,
                              const Trace &trace) {
  auto os = detail::open_output(path);
  write_samples_csv(os, trace);
}

// Reads an events.csv back into a trace of `units` units. Only n, t and the
// coalition are restored; t_end is the last event time.
inline Trace read_events_csv(std::istream &is, std::size_t units) {
  Trace trace;
  trace.units = units;
  std::string line;
  if (!std::getline(is, line) || line != "n,t,coalition_size,members")
    throw ConfigError("events.csv: missing or unexpected header");
  for (std::size_t lineno = 2; std::getline(is, line); ++lineno) {
    if (line.empty())
      continue;
    const auto cols = detail::split(line, ',');
    if (cols.size() != 4)
      throw ConfigError("events.csv line " + std::to_string(lineno) +
                        ": expected 4 columns");
    SpikeEvent ev;
    ev.n = detail::parse_number<std::size_t>(cols[0], lineno);
    ev.t = detail::parse_number<double>(cols[1], lineno);
    const auto size = detail::parse_number<std::size_t>(cols[2], lineno);
    for (const auto &tok : detail::split(cols[3], ';')) {
      const auto idx = detail::parse_number<std::size_t>(tok, lineno);
      if (idx == 0 || idx > units)
        throw ConfigError("events.csv line " + std::to_string(lineno) +
                          ": unit index " + tok + " out of range");
      ev.coalition.push_back(idx - 1);
    }
    std::sort(ev.coalition.begin(), ev.coalition.end());
    if (ev.coalition.size() != size)
      throw ConfigError("events.csv line " + std::to_string(lineno) +
                        ": coalition_size does not match members");
    ev.waves.push_back(ev.coalition);
    trace.t_end = ev.t;
    trace.events.push_back(std::move(ev));
  }
  return trace;
}

inline Trace read_events_csv(const std::filesystem::path &path,
                             std::size_t units) {
  std::ifstream is(path, std::ios::binary);
  if (!is)
    throw ConfigError("cannot read " + path.string());
  return read_events_csv(is, units);
}

} // namespace pulsenet
