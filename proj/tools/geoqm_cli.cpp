#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "geoqm/cli/output.hpp"

namespace {

enum Exit { kOk = 0, kCheckFailed = 1, kConfigError = 2, kNumericError = 3 };

struct Flags {
  std::string config_path;
  std::string output_path;
  std::string format;
  std::optional<int> steps;
  std::optional<double> tol;
  bool quiet = false;
  double time = 0.0;
  bool time_set = false;
};

geoqm::cli::RunConfig effective_config(const Flags& f) {
  auto c = geoqm::cli::load_config(f.config_path);
  if (!f.output_path.empty()) c.output.path = f.output_path;
  if (!f.format.empty()) c.output.format = f.format;
  if (f.steps) c.grid.steps = *f.steps;
  if (f.tol) {
    for (const char* key : {"exact", "structure", "propagation", "inner_product", "unitarity", "junction",
                            "connection", "patch", "spectrum"}) {
      c.tolerances[key] = *f.tol;
    }
  }
  geoqm::cli::validate_config(c);
  return c;
}

// Writes to the configured path, or stdout when none.
void emit(const geoqm::cli::RunConfig& c, const std::string& text) {
  if (c.output.path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(c.output.path, std::ios::binary);
  if (!out) throw geoqm::cli::ConfigError("cannot write " + c.output.path);
  out << text;
}

int run(const std::string& command, const Flags& f) {
  using namespace geoqm::cli;
  const RunConfig c = effective_config(f);
  const Scenario s = build_scenario(c);
  std::ostringstream text;
  if (command == "run") {
    const Series series = cmd_run(s, c);
    if (c.output.format == "json") {
      text << run_to_json(c, series).dump(2) << '\n';
    } else {
      write_csv(text, c, series);
    }
    emit(c, text.str());
    if (!f.quiet && !c.output.path.empty()) std::cerr << "wrote " << series.rows.size() << " rows to " << c.output.path << '\n';
    return kOk;
  }
  if (command == "check") {
    const auto checks = cmd_check(s, c);
    if (c.output.format == "json" && !c.output.path.empty()) {
      emit(c, json{{"config", to_json(c)}, {"checks", checks_to_json(checks)}}.dump(2) + "\n");
    }
    if (!f.quiet) write_check_report(std::cout, checks);
    return all_passed(checks) ? kOk : kCheckFailed;
  }
  const double t = f.time_set ? f.time : c.grid.t0;
  const auto rep = cmd_spectrum(s, c, t);
  if (c.output.format == "json") {
    text << spectrum_to_json(c, rep).dump(2) << '\n';
  } else {
    write_spectrum(text, rep);
  }
  emit(c, text.str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pseudo-Hermitian and geometric quantum dynamics"};
  app.require_subcommand(1);
  app.fallthrough();

  Flags f;
  app.add_option("--config", f.config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
  app.add_option("--output", f.output_path, "output file (default: stdout)");
  app.add_option("--format", f.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--steps", f.steps, "override grid.steps");
  app.add_option("--tol", f.tol, "override every tolerance");
  app.add_flag("--quiet", f.quiet, "suppress the report on stdout");

  auto* run_cmd = app.add_subcommand("run", "propagate and write the time series");
  auto* check_cmd = app.add_subcommand("check", "run the invariant suite for the configured system");
  auto* spectrum_cmd = app.add_subcommand("spectrum", "classify the instantaneous spectrum");
  spectrum_cmd->add_option("--time", f.time, "evaluation time (default: grid.t0)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }
  f.time_set = spectrum_cmd->count("--time") > 0;

  const std::string command = run_cmd->parsed() ? "run" : check_cmd->parsed() ? "check" : "spectrum";
  try {
    return run(command, f);
  } catch (const geoqm::cli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const geoqm::Error& e) {
    std::cerr << "numeric error [" << geoqm::to_string(e.code()) << "]: " << e.what() << '\n';
    return kNumericError;
  }
}
