#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <string>
#include <vector>

#include "gplab/config.hpp"
#include "gplab/io.hpp"

namespace gplab::cli_io {

struct RunSettings {
  std::uint64_t seed = 1;
  int threads = 0;  // 0 leaves the OpenMP default
  std::string out_dir = ".";
};

// What a scenario body sees: its settings and the sinks for tables, field
// dumps, checks, notes and plot specs.
class RunContext {
 public:
  explicit RunContext(RunSettings s) : settings_(std::move(s)) {}

  const RunSettings& settings() const { return settings_; }
  std::uint64_t seed() const { return settings_.seed; }

  CsvTable& table(const std::string& name, std::vector<std::string> columns);
  void field(const std::string& name, const TorusGrid& g, const CVec& values);
  void check_le(const std::string& name, double value, double hi);
  void check_ge(const std::string& name, double value, double lo);
  void check_in(const std::string& name, double value, double lo, double hi);
  void check_true(const std::string& name, bool ok);
  void note(const std::string& key, const std::string& value);
  void plot(PlotSpec p);

  const std::deque<CsvTable>& tables() const { return tables_; }
  const std::vector<Check>& checks() const { return checks_; }
  // (file name, encoded bytes)
  const std::vector<std::pair<std::string, std::string>>& fields() const { return fields_; }
  const std::vector<std::pair<std::string, std::string>>& notes() const { return notes_; }
  const std::vector<PlotSpec>& plots() const { return plots_; }
  bool all_passed() const;

 private:
  RunSettings settings_;
  std::deque<CsvTable> tables_;  // stable references
  std::vector<std::pair<std::string, std::string>> fields_;  // file name, bytes
  std::vector<Check> checks_;
  std::vector<std::pair<std::string, std::string>> notes_;
  std::vector<PlotSpec> plots_;
};

struct Scenario {
  std::string id;
  std::string module;  // config section name
  std::string verb;    // CLI verb that runs it
  std::string description;
  int criterion = 0;   // acceptance criterion number, 0 if none
  double budget_seconds = 0.0;  // wall-time check when positive
  std::vector<ParamSpec> params;
  std::function<void(const ParamMap&, RunContext&)> body;
};

const std::vector<Scenario>& registry();
// InputError for an unknown id.
const Scenario& find_scenario(const std::string& id);
// Scenarios whose module or verb equals filter; all for an empty filter.
std::vector<const Scenario*> list_scenarios(const std::string& filter = "");
// First scenario registered for a verb, or nullptr.
const Scenario* default_scenario(const std::string& verb);
// Scenarios tied to acceptance criteria, ordered by criterion.
std::vector<const Scenario*> acceptance_scenarios();

// Runs the body, writes every table as <name>.csv and every field as
// <name>.bin into settings.out_dir, then manifest.json.  Input and numerical
// errors from the body end up in the manifest with status "error".
RunManifest run_scenario(const Scenario& s, const ParamMap& p, const RunSettings& settings);

}  // namespace gplab::cli_io
