// gplab: command line front end for the scenario registry.
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "gplab/config.hpp"
#include "gplab/error.hpp"
#include "gplab/io.hpp"
#include "gplab/scenarios.hpp"

namespace fs = std::filesystem;
using namespace gplab;
using namespace gplab::cli_io;

namespace {

enum Exit { kPass = 0, kFail = 1, kInput = 2, kNumerical = 3 };

struct RunFlags {
  std::string config, out, scenario;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

void add_run_flags(CLI::App* c, RunFlags& f) {
  c->add_option("--config", f.config, "scenario config file")->check(CLI::ExistingFile);
  c->add_option("--seed", f.seed, "random seed (u64)");
  c->add_option("--out", f.out, "output directory");
  c->add_option("--threads", f.threads, "OpenMP threads (0: default)")->check(CLI::Range(0, 4096));
  c->add_option("--scenario", f.scenario, "scenario id (see `gplab list`)");
}

int run_verb(const std::string& verb, const RunFlags& f) {
  std::optional<ConfigFile> cfg;
  RunSection rs;
  if (!f.config.empty()) {
    cfg = load_config(f.config);
    rs = run_section(*cfg);
  }
  std::string id = f.scenario;
  if (id.empty() && rs.scenario) id = *rs.scenario;
  if (!f.scenario.empty() && rs.scenario && *rs.scenario != f.scenario)
    throw InputError("--scenario " + f.scenario + " disagrees with the config's scenario " + *rs.scenario);
  const Scenario* s = nullptr;
  if (id.empty()) {
    s = default_scenario(verb);
    if (!s) throw InputError("verb '" + verb + "' needs --scenario or a [run] scenario key");
  } else {
    s = &find_scenario(id);
    if (verb != "run" && s->verb != verb)
      throw InputError("scenario " + s->id + " belongs to `gplab " + s->verb + "`, not `gplab " + verb + "`");
  }
  const ParamMap params = cfg ? ParamMap::resolve(s->params, *cfg, s->module) : ParamMap::defaults(s->params);

  RunSettings settings;
  settings.seed = f.seed ? *f.seed : rs.seed.value_or(1);
  settings.threads = f.threads ? *f.threads : rs.threads.value_or(0);
  settings.out_dir = !f.out.empty() ? f.out : (fs::path("gplab-out") / s->id).string();

  const RunManifest m = run_scenario(*s, params, settings);
  for (const auto& c : m.checks) std::printf("  %-4s %s\n", c.passed ? "ok" : "FAIL", c.describe().c_str());
  std::printf("%s: %s (%zu checks, %zu files, %.2f s) -> %s\n", m.scenario.c_str(), m.status.c_str(), m.checks.size(),
              m.files.size(), m.wall_seconds, settings.out_dir.c_str());
  if (m.status == "error") {
    std::fprintf(stderr, "gplab: %s error: %s\n", m.error_kind.c_str(), m.error.c_str());
    return m.error_kind == "numerical" ? kNumerical : kInput;
  }
  return m.passed() ? kPass : kFail;
}

int list_verb(const std::string& filter) {
  for (const auto* s : list_scenarios(filter)) {
    const std::string crit = s->criterion > 0 ? "criterion " + std::to_string(s->criterion) : "";
    std::printf("%-22s %-13s %-12s %-13s %s\n", s->id.c_str(), s->verb.c_str(), s->module.c_str(), crit.c_str(),
                s->description.c_str());
  }
  return kPass;
}

int plot_verb(const std::string& dir) {
  const fs::path manifest = fs::path(dir) / "manifest.json";
  if (!fs::exists(manifest)) throw InputError("no manifest.json in '" + dir + "'");
  const auto scripts = emit_plots(read_manifest(manifest.string()), dir);
  for (const auto& p : scripts) std::printf("%s\n", p.c_str());
  if (scripts.empty()) std::printf("no plots declared in %s\n", manifest.string().c_str());
  return kPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gplab: two-body scattering, GP dynamics, hierarchy and cutoff experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", library_version());

  static const std::map<std::string, std::string> verbs = {
      {"scatter", "zero-energy scattering scenarios"},
      {"neumann", "Neumann eigenvalue scenarios"},
      {"soften", "softening profile scenarios"},
      {"gp", "GP solver scenarios"},
      {"hierarchy", "hierarchy residual scenarios"},
      {"manybody", "many-body propagation scenarios"},
      {"cutoff-audit", "cutoff-field audit scenarios"},
      {"ineq-audit", "inequality probe scenarios"},
      {"run", "any registered scenario by id"},
  };
  std::map<std::string, RunFlags> flags;
  for (const auto& [verb, help] : verbs) add_run_flags(app.add_subcommand(verb, help), flags[verb]);

  std::string filter;
  auto* list = app.add_subcommand("list", "list registered scenarios");
  list->add_option("filter,--module", filter, "module or verb filter");

  std::string plot_dir;
  auto* plot = app.add_subcommand("plot", "write matplotlib scripts for a finished run");
  plot->add_option("dir,--out", plot_dir, "run directory holding manifest.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kPass : kInput;
  }

  try {
    if (list->parsed()) return list_verb(filter);
    if (plot->parsed()) {
      if (plot_dir.empty()) throw InputError("plot needs a run directory");
      return plot_verb(plot_dir);
    }
    for (const auto& [verb, help] : verbs) {
      auto* sub = app.get_subcommand(verb);
      if (sub->parsed()) return run_verb(verb, flags[verb]);
    }
  } catch (const InputError& e) {
    std::fprintf(stderr, "gplab: %s\n", e.what());
    return kInput;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "gplab: numerical error: %s\n", e.what());
    return kNumerical;
  }
  return kInput;
}
