// Runs every acceptance scenario with its default parameters and prints one
// PASS/FAIL line per criterion.  Usage: gplab_acceptance [out_dir] [criterion...]
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <set>
#include <string>

#include "gplab/config.hpp"
#include "gplab/scenarios.hpp"

using namespace gplab::cli_io;

int main(int argc, char** argv) {
  const std::filesystem::path out = argc > 1 ? argv[1] : "acceptance-out";
  std::set<int> only;
  for (int i = 2; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failed = 0, ran = 0;
  for (const Scenario* s : acceptance_scenarios()) {
    if (!only.empty() && !only.count(s->criterion)) continue;
    ++ran;
    RunManifest m;
    try {
      m = run_scenario(*s, ParamMap::defaults(s->params), {1, 0, (out / s->id).string()});
    } catch (const std::exception& e) {
      m.status = "error";
      m.error = e.what();
    }
    const bool ok = m.passed();
    failed += !ok;
    std::size_t passed_checks = 0;
    for (const auto& c : m.checks) passed_checks += c.passed;
    std::printf("%s criterion %d (%s): %zu/%zu checks, %.2f s\n", ok ? "PASS" : "FAIL", s->criterion, s->id.c_str(),
                passed_checks, m.checks.size(), m.wall_seconds);
    if (!m.error.empty()) std::printf("    error: %s\n", m.error.c_str());
    for (const auto& c : m.checks)
      if (!c.passed) std::printf("    failed: %s\n", c.describe().c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed\n", ran - failed, ran);
  return failed == 0 && ran > 0 ? 0 : 1;
}
