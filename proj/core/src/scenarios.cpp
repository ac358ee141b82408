#include "gplab/scenarios.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>

#include "gplab/error.hpp"
#include "scenario_defs.hpp"

namespace gplab::cli_io {

namespace fs = std::filesystem;

CsvTable& RunContext::table(const std::string& name, std::vector<std::string> columns) {
  for (const auto& t : tables_)
    if (t.name == name) throw InputError("table '" + name + "' emitted twice");
  tables_.push_back(CsvTable{name, std::move(columns), {}});
  return tables_.back();
}

void RunContext::field(const std::string& name, const TorusGrid& g, const CVec& values) {
  fields_.emplace_back(name + ".bin", encode_field(g, values));
}

void RunContext::check_in(const std::string& name, double value, double lo, double hi) {
  const bool ok = !std::isnan(value) && value >= lo && value <= hi;
  checks_.push_back({name, value, lo, hi, ok});
}
void RunContext::check_le(const std::string& name, double value, double hi) { check_in(name, value, -INFINITY, hi); }
void RunContext::check_ge(const std::string& name, double value, double lo) { check_in(name, value, lo, INFINITY); }
void RunContext::check_true(const std::string& name, bool ok) { check_in(name, ok ? 1.0 : 0.0, 1.0, 1.0); }
void RunContext::note(const std::string& key, const std::string& value) { notes_.emplace_back(key, value); }
void RunContext::plot(PlotSpec p) { plots_.push_back(std::move(p)); }

bool RunContext::all_passed() const {
  return std::all_of(checks_.begin(), checks_.end(), [](const Check& c) { return c.passed; });
}

const std::vector<Scenario>& registry() {
  static const std::vector<Scenario> all = [] {
    std::vector<Scenario> v;
    detail::register_twobody(v);
    detail::register_dynamics(v);
    detail::register_audits(v);
    for (std::size_t i = 0; i < v.size(); ++i)
      for (std::size_t j = 0; j < i; ++j)
        if (v[i].id == v[j].id) throw InputError("scenario id '" + v[i].id + "' registered twice");
    return v;
  }();
  return all;
}

const Scenario& find_scenario(const std::string& id) {
  for (const auto& s : registry())
    if (s.id == id) return s;
  throw InputError("unknown scenario '" + id + "' (see `gplab list`)");
}

std::vector<const Scenario*> list_scenarios(const std::string& filter) {
  std::vector<const Scenario*> out;
  for (const auto& s : registry())
    if (filter.empty() || s.module == filter || s.verb == filter) out.push_back(&s);
  return out;
}

const Scenario* default_scenario(const std::string& verb) {
  for (const auto& s : registry())
    if (s.verb == verb) return &s;
  return nullptr;
}

std::vector<const Scenario*> acceptance_scenarios() {
  std::vector<const Scenario*> out;
  for (const auto& s : registry())
    if (s.criterion > 0) out.push_back(&s);
  std::stable_sort(out.begin(), out.end(), [](const Scenario* a, const Scenario* b) { return a->criterion < b->criterion; });
  return out;
}

namespace {

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

RunManifest run_scenario(const Scenario& s, const ParamMap& p, const RunSettings& settings) {
  RunManifest m;
  m.scenario = s.id;
  m.module = s.module;
  m.version = library_version();
  m.seed = settings.seed;
  m.threads = settings.threads;
  m.params = p.echo();

  std::error_code ec;
  fs::create_directories(settings.out_dir, ec);
  if (ec) throw InputError("cannot create output directory '" + settings.out_dir + "': " + ec.message());

  const int saved_threads = omp_get_max_threads();
  if (settings.threads > 0) omp_set_num_threads(settings.threads);
  RunContext ctx(settings);
  m.started = utc_now();
  const auto t0 = std::chrono::steady_clock::now();
  try {
    s.body(p, ctx);
  } catch (const InputError& e) {
    m.error_kind = "input";
    m.error = e.what();
  } catch (const NumericalError& e) {
    m.error_kind = "numerical";
    m.error = e.what();
  }
  m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  m.finished = utc_now();
  omp_set_num_threads(saved_threads);
  if (m.error.empty() && s.budget_seconds > 0.0) ctx.check_le("wall_seconds", m.wall_seconds, s.budget_seconds);

  const fs::path dir(settings.out_dir);
  for (const auto& t : ctx.tables()) {
    const std::string name = t.name + ".csv", bytes = to_csv(t);
    write_file((dir / name).string(), bytes);
    m.files.push_back({name, bytes.size(), sha256_hex(bytes)});
  }
  for (const auto& [name, bytes] : ctx.fields()) {
    write_file((dir / name).string(), bytes);
    m.files.push_back({name, bytes.size(), sha256_hex(bytes)});
  }
  m.checks = ctx.checks();
  m.notes = ctx.notes();
  m.plots = ctx.plots();
  m.status = !m.error.empty() ? "error" : ctx.all_passed() ? "pass" : "fail";
  write_file((dir / "manifest.json").string(), manifest_json(m));
  return m;
}

}  // namespace gplab::cli_io
