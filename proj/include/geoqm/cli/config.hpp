#pragma once

// Run configuration: JSON text with complex numbers as [re, im] and matrices as
// row-major nested lists.

#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "geoqm/errors.hpp"
#include "geoqm/time_operator.hpp"

namespace geoqm::cli {

using nlohmann::json;

/// Malformed or inconsistent configuration (exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GridSpec {
  double t0 = 0.0;
  double t1 = 1.0;
  int steps = 1000;
  bool operator==(const GridSpec&) const = default;
};

struct OutputSpec {
  std::string format = "csv";
  std::string path;
  bool operator==(const OutputSpec&) const = default;
};

struct RunConfig {
  std::string system = "oscillator_parity";  // intro | oscillator_parity | inline | geqm_two_chart
  json params = json::object();
  std::string representation = "eta_rep";   // eta_rep | hermitian_rep | geqm
  std::string metric = "dynamical";          // dynamical | fixed
  GridSpec grid;
  std::string initial_state;                 // named state, or empty when `state` is given
  std::vector<Complex> state;
  std::optional<std::vector<std::vector<Complex>>> eta0;
  std::vector<std::string> observables;
  std::vector<std::string> claims;
  OutputSpec output;
  std::map<std::string, double> tolerances;

  bool operator==(const RunConfig&) const = default;

  double tolerance(const std::string& key, double fallback) const {
    auto it = tolerances.find(key);
    return it == tolerances.end() ? fallback : it->second;
  }
};

// ---------------------------------------------------------------------------
// Complex / matrix JSON helpers

inline json complex_to_json(Complex z) { return json::array({z.real(), z.imag()}); }

inline Complex complex_from_json(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
    return {j[0].get<double>(), j[1].get<double>()};
  }
  throw ConfigError("expected a number or [re, im] pair, got " + j.dump());
}

inline json rows_to_json(const std::vector<std::vector<Complex>>& rows) {
  json out = json::array();
  for (const auto& row : rows) {
    json r = json::array();
    for (auto z : row) r.push_back(complex_to_json(z));
    out.push_back(r);
  }
  return out;
}

inline std::vector<std::vector<Complex>> rows_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw ConfigError("expected a non-empty list of matrix rows");
  std::vector<std::vector<Complex>> rows;
  for (const auto& r : j) {
    if (!r.is_array()) throw ConfigError("matrix row must be a list");
    std::vector<Complex> row;
    for (const auto& z : r) row.push_back(complex_from_json(z));
    if (!rows.empty() && row.size() != rows.front().size()) throw ConfigError("ragged matrix rows");
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix matrix_from_rows(const std::vector<std::vector<Complex>>& rows) {
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (size_t i = 0; i < rows.size(); ++i) {
    for (size_t j = 0; j < rows[i].size(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return m;
}

inline Matrix matrix_from_json(const json& j) { return matrix_from_rows(rows_from_json(j)); }

// ---------------------------------------------------------------------------
// RunConfig <-> JSON

inline json to_json(const RunConfig& c) {
  json j;
  j["system"] = {{"name", c.system}, {"params", c.params}};
  j["representation"] = c.representation;
  j["metric"] = c.metric;
  j["grid"] = {{"t0", c.grid.t0}, {"t1", c.grid.t1}, {"steps", c.grid.steps}};
  if (!c.initial_state.empty()) {
    j["initial_state"] = c.initial_state;
  } else {
    json v = json::array();
    for (auto z : c.state) v.push_back(complex_to_json(z));
    j["initial_state"] = v;
  }
  if (c.eta0) j["eta0"] = rows_to_json(*c.eta0);
  j["observables"] = c.observables;
  j["claims"] = c.claims;
  j["output"] = {{"format", c.output.format}, {"path", c.output.path}};
  j["tolerances"] = c.tolerances;
  return j;
}

namespace detail {

inline void require_one_of(const std::string& value, std::initializer_list<const char*> allowed, const char* what) {
  for (const char* a : allowed) {
    if (value == a) return;
  }
  throw ConfigError(std::string("unknown ") + what + " '" + value + "'");
}

}  // namespace detail

inline RunConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig c;
  try {
    if (j.contains("system")) {
      const auto& s = j.at("system");
      if (s.is_string()) {
        c.system = s.get<std::string>();
      } else {
        c.system = s.at("name").get<std::string>();
        if (s.contains("params")) c.params = s.at("params");
      }
    }
    c.representation = j.value("representation", c.representation);
    c.metric = j.value("metric", c.metric);
    if (j.contains("grid")) {
      const auto& g = j.at("grid");
      c.grid.t0 = g.value("t0", c.grid.t0);
      c.grid.t1 = g.value("t1", c.grid.t1);
      c.grid.steps = g.value("steps", c.grid.steps);
    }
    if (j.contains("initial_state")) {
      const auto& s = j.at("initial_state");
      if (s.is_string()) {
        c.initial_state = s.get<std::string>();
      } else {
        for (const auto& z : s) c.state.push_back(complex_from_json(z));
      }
    }
    if (j.contains("eta0")) c.eta0 = rows_from_json(j.at("eta0"));
    if (j.contains("observables")) c.observables = j.at("observables").get<std::vector<std::string>>();
    if (j.contains("claims")) c.claims = j.at("claims").get<std::vector<std::string>>();
    if (j.contains("output")) {
      const auto& o = j.at("output");
      c.output.format = o.value("format", c.output.format);
      c.output.path = o.value("path", c.output.path);
    }
    if (j.contains("tolerances")) c.tolerances = j.at("tolerances").get<std::map<std::string, double>>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (!c.params.is_object()) throw ConfigError("system params must be an object");
  return c;
}

/// Structural checks independent of the chosen system.
inline void validate_config(const RunConfig& c) {
  detail::require_one_of(c.system, {"intro", "oscillator_parity", "inline", "geqm_two_chart"}, "system");
  detail::require_one_of(c.representation, {"eta_rep", "hermitian_rep", "geqm"}, "representation");
  detail::require_one_of(c.metric, {"dynamical", "fixed"}, "metric mode");
  detail::require_one_of(c.output.format, {"csv", "json"}, "output format");
  if ((c.system == "geqm_two_chart") != (c.representation == "geqm")) {
    throw ConfigError("the geqm representation goes with the geqm_two_chart system and only that system");
  }
  if (c.grid.steps < 2) throw ConfigError("grid.steps must be >= 2");
  if (!(c.grid.t1 > c.grid.t0)) throw ConfigError("grid.t1 must exceed grid.t0");
  for (const auto& [k, v] : c.tolerances) {
    if (!(v > 0.0)) throw ConfigError("tolerance '" + k + "' must be positive");
  }
  if (c.initial_state.empty() && c.state.empty()) throw ConfigError("initial_state is required");
}

inline RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_json(j);
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace geoqm::cli
