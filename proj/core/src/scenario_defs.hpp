#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "gplab/scenarios.hpp"

namespace gplab::cli_io::detail {

void register_twobody(std::vector<Scenario>& out);
void register_dynamics(std::vector<Scenario>& out);
void register_audits(std::vector<Scenario>& out);

inline ParamSpec real_param(std::string key, std::string def, std::string help) {
  return {std::move(key), ParamType::Real, std::move(def), std::move(help), {}};
}
inline ParamSpec int_param(std::string key, std::string def, std::string help) {
  return {std::move(key), ParamType::Int, std::move(def), std::move(help), {}};
}
inline ParamSpec reals_param(std::string key, std::string def, std::string help) {
  return {std::move(key), ParamType::RealList, std::move(def), std::move(help), {}};
}
inline ParamSpec ints_param(std::string key, std::string def, std::string help) {
  return {std::move(key), ParamType::IntList, std::move(def), std::move(help), {}};
}
inline ParamSpec text_param(std::string key, std::string def, std::string help, std::vector<std::string> choices = {}) {
  return {std::move(key), ParamType::Text, std::move(def), std::move(help), std::move(choices)};
}

// max/min of positive values; inf when any is <= 0.
inline double spread(const std::vector<double>& v) {
  double lo = INFINITY, hi = 0.0;
  for (double x : v) {
    if (!(x > 0.0)) return INFINITY;
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  return v.empty() ? INFINITY : hi / lo;
}

inline bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return true;
}

}  // namespace gplab::cli_io::detail
