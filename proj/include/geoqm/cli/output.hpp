#pragma once

#include <array>
#include <charconv>
#include <ostream>
#include <string>

#include "geoqm/cli/commands.hpp"

namespace geoqm::cli {

/// Shortest representation that parses back to the same double.
inline std::string format_double(double x) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  if (ec != std::errc()) return "nan";
  return {buf.data(), end};
}

inline constexpr const char* kConfigHeader = "# config: ";

inline void write_csv(std::ostream& os, const RunConfig& c, const Series& s) {
  os << kConfigHeader << to_json(c).dump() << '\n';
  for (size_t i = 0; i < s.columns.size(); ++i) os << (i ? "," : "") << s.columns[i];
  os << '\n';
  for (const auto& row : s.rows) {
    for (size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_double(row[i]);
    os << '\n';
  }
}

inline json checks_to_json(const std::vector<CheckResult>& checks) {
  json out = json::array();
  for (const auto& r : checks) {
    out.push_back({{"name", r.name}, {"residual", r.residual}, {"tolerance", r.tolerance}, {"passed", r.passed}});
  }
  return out;
}

/// {"config", "grid", "series": {column: [values]}, "checks": [...]}
inline json run_to_json(const RunConfig& c, const Series& s, const std::vector<CheckResult>& checks = {}) {
  json series = json::object();
  for (size_t i = 0; i < s.columns.size(); ++i) {
    json col = json::array();
    for (const auto& row : s.rows) col.push_back(row[i]);
    series[s.columns[i]] = std::move(col);
  }
  return {{"config", to_json(c)},
          {"grid", {{"t0", c.grid.t0}, {"t1", c.grid.t1}, {"steps", c.grid.steps}}},
          {"series", std::move(series)},
          {"checks", checks_to_json(checks)}};
}

inline void write_check_report(std::ostream& os, const std::vector<CheckResult>& checks) {
  for (const auto& r : checks) {
    os << (r.passed ? "PASS " : "FAIL ") << r.name << " residual=" << format_double(r.residual)
       << " tol=" << format_double(r.tolerance) << '\n';
  }
}

inline void write_spectrum(std::ostream& os, const SpectrumReport& rep) {
  os << "t=" << format_double(rep.time) << " classification=" << rep.classification << '\n';
  for (const auto& e : rep.entries) {
    os << format_double(e.value.real()) << ' ' << format_double(e.value.imag()) << ' ' << e.label << '\n';
  }
}

inline json spectrum_to_json(const RunConfig& c, const SpectrumReport& rep) {
  json values = json::array();
  for (const auto& e : rep.entries) values.push_back({{"value", complex_to_json(e.value)}, {"label", e.label}});
  return {{"config", to_json(c)}, {"time", rep.time}, {"classification", rep.classification}, {"eigenvalues", values}};
}

/// Reads the effective config back out of a CSV header line.
inline RunConfig config_from_csv_header(const std::string& line) {
  const std::string prefix = kConfigHeader;
  if (line.rfind(prefix, 0) != 0) throw ConfigError("not a config header line");
  return parse_config(line.substr(prefix.size()));
}

}  // namespace geoqm::cli
