#include "gplab/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "gplab/error.hpp"
#include "gplab/io.hpp"

namespace gplab::cli_io {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool valid_name(const std::string& s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(),
                     [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.'; });
}

std::string where(const std::string& source, int line) { return source + ":" + std::to_string(line) + ": "; }

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, ',')) out.push_back(trim(cur));
  return out;
}

}  // namespace

const char* type_name(ParamType t) {
  switch (t) {
    case ParamType::Int: return "integer";
    case ParamType::Real: return "real";
    case ParamType::Bool: return "bool";
    case ParamType::Text: return "text";
    case ParamType::RealList: return "list of reals";
    case ParamType::IntList: return "list of integers";
  }
  return "?";
}

double parse_real(const std::string& s) {
  const std::string t = trim(s);
  double v = 0.0;
  const char* b = t.data();
  const char* e = b + t.size();
  if (!t.empty() && *b == '+') ++b;
  auto r = std::from_chars(b, e, v);
  if (t.empty() || r.ec != std::errc() || r.ptr != e) throw InputError("not a real number: '" + s + "'");
  if (!std::isfinite(v)) throw InputError("not a finite number: '" + s + "'");
  return v;
}

long long parse_int(const std::string& s) {
  const std::string t = trim(s);
  long long v = 0;
  const char* b = t.data();
  const char* e = b + t.size();
  if (!t.empty() && *b == '+') ++b;
  auto r = std::from_chars(b, e, v);
  if (t.empty() || r.ec != std::errc() || r.ptr != e) throw InputError("not an integer: '" + s + "'");
  return v;
}

std::uint64_t parse_u64(const std::string& s) {
  const std::string t = trim(s);
  std::uint64_t v = 0;
  auto r = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || r.ec != std::errc() || r.ptr != t.data() + t.size())
    throw InputError("not an unsigned 64-bit integer: '" + s + "'");
  return v;
}

const ConfigEntry* ConfigFile::find(const std::string& section, const std::string& key) const {
  for (const auto& e : entries)
    if (e.section == section && e.key == key) return &e;
  return nullptr;
}

std::vector<std::string> ConfigFile::sections() const {
  std::vector<std::string> out;
  for (const auto& e : entries)
    if (std::find(out.begin(), out.end(), e.section) == out.end()) out.push_back(e.section);
  return out;
}

ConfigFile parse_config(const std::string& text, const std::string& source) {
  ConfigFile cfg;
  cfg.source = source;
  std::istringstream in(text);
  std::string raw, section;
  std::vector<std::string> seen_sections;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = raw;
    if (auto h = s.find('#'); h != std::string::npos) s.erase(h);
    s = trim(s);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw InputError(where(source, line) + "unterminated section header");
      section = trim(s.substr(1, s.size() - 2));
      if (!valid_name(section)) throw InputError(where(source, line) + "bad section name '" + section + "'");
      if (std::find(seen_sections.begin(), seen_sections.end(), section) != seen_sections.end())
        throw InputError(where(source, line) + "section [" + section + "] appears twice");
      seen_sections.push_back(section);
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw InputError(where(source, line) + "expected 'key = value'");
    ConfigEntry e{section, trim(s.substr(0, eq)), trim(s.substr(eq + 1)), line};
    if (section.empty()) throw InputError(where(source, line) + "key '" + e.key + "' outside any section");
    if (!valid_name(e.key)) throw InputError(where(source, line) + "bad key '" + e.key + "'");
    if (e.value.empty()) throw InputError(where(source, line) + "empty value for '" + e.key + "'");
    if (const auto* prev = cfg.find(section, e.key))
      throw InputError(where(source, line) + "duplicate key '" + e.key + "' (first at line " +
                       std::to_string(prev->line) + ")");
    cfg.entries.push_back(std::move(e));
  }
  return cfg;
}

ConfigFile load_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), path);
}

ParamMap::Value ParamMap::parse_value(const ParamSpec& spec, const std::string& raw) {
  Value v;
  v.spec = spec;
  switch (spec.type) {
    case ParamType::Int: {
      const long long x = parse_int(raw);
      v.numbers = {static_cast<double>(x)};
      v.canonical = std::to_string(x);
      break;
    }
    case ParamType::Real: {
      const double x = parse_real(raw);
      v.numbers = {x};
      v.canonical = format_real(x);
      break;
    }
    case ParamType::Bool: {
      const std::string t = trim(raw);
      if (t == "true" || t == "1") v.numbers = {1.0};
      else if (t == "false" || t == "0") v.numbers = {0.0};
      else throw InputError("not a bool (true/false): '" + raw + "'");
      v.canonical = v.numbers[0] != 0.0 ? "true" : "false";
      break;
    }
    case ParamType::Text: {
      v.text = trim(raw);
      if (!spec.choices.empty() && std::find(spec.choices.begin(), spec.choices.end(), v.text) == spec.choices.end()) {
        std::string all;
        for (const auto& c : spec.choices) all += (all.empty() ? "" : ", ") + c;
        throw InputError("'" + v.text + "' is not one of: " + all);
      }
      v.canonical = v.text;
      break;
    }
    case ParamType::RealList:
    case ParamType::IntList: {
      for (const auto& item : split_list(raw)) {
        if (spec.type == ParamType::IntList) {
          const long long x = parse_int(item);
          v.numbers.push_back(static_cast<double>(x));
          v.canonical += (v.canonical.empty() ? "" : ", ") + std::to_string(x);
        } else {
          const double x = parse_real(item);
          v.numbers.push_back(x);
          v.canonical += (v.canonical.empty() ? "" : ", ") + format_real(x);
        }
      }
      if (v.numbers.empty()) throw InputError("empty list");
      break;
    }
  }
  return v;
}

ParamMap ParamMap::defaults(const std::vector<ParamSpec>& specs) {
  ParamMap m;
  for (const auto& s : specs) {
    if (m.values_.count(s.key)) throw InputError("parameter '" + s.key + "' declared twice");
    m.order_.push_back(s.key);
    m.values_[s.key] = parse_value(s, s.default_value);
  }
  return m;
}

ParamMap ParamMap::resolve(const std::vector<ParamSpec>& specs, const ConfigFile& cfg, const std::string& section) {
  ParamMap m = defaults(specs);
  for (const auto& e : cfg.entries) {
    if (e.section == "run") continue;
    if (e.section != section)
      throw InputError(where(cfg.source, e.line) + "unknown section [" + e.section + "] (expected [run] or [" +
                       section + "])");
    auto it = m.values_.find(e.key);
    if (it == m.values_.end()) {
      std::string known;
      for (const auto& k : m.order_) known += (known.empty() ? "" : ", ") + k;
      throw InputError(where(cfg.source, e.line) + "unknown key '" + e.key + "' in [" + section + "]" +
                       (known.empty() ? " (no keys accepted)" : " (accepted: " + known + ")"));
    }
    try {
      it->second = parse_value(it->second.spec, e.value);
    } catch (const InputError& err) {
      throw InputError(where(cfg.source, e.line) + e.key + ": " + err.what());
    }
  }
  return m;
}

void ParamMap::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw InputError("unknown parameter '" + key + "'");
  it->second = parse_value(it->second.spec, value);
}

const ParamMap::Value& ParamMap::get(const std::string& key, ParamType t) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw InputError("parameter '" + key + "' is not declared");
  if (it->second.spec.type != t)
    throw InputError("parameter '" + key + "' is a " + type_name(it->second.spec.type) + ", not a " + type_name(t));
  return it->second;
}

long long ParamMap::integer(const std::string& key) const {
  return static_cast<long long>(get(key, ParamType::Int).numbers[0]);
}
double ParamMap::real(const std::string& key) const { return get(key, ParamType::Real).numbers[0]; }
bool ParamMap::boolean(const std::string& key) const { return get(key, ParamType::Bool).numbers[0] != 0.0; }
const std::string& ParamMap::text(const std::string& key) const { return get(key, ParamType::Text).text; }
const std::vector<double>& ParamMap::reals(const std::string& key) const {
  return get(key, ParamType::RealList).numbers;
}
std::vector<long long> ParamMap::integers(const std::string& key) const {
  std::vector<long long> out;
  for (double x : get(key, ParamType::IntList).numbers) out.push_back(static_cast<long long>(x));
  return out;
}

std::vector<std::pair<std::string, std::string>> ParamMap::echo() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& k : order_) out.emplace_back(k, values_.at(k).canonical);
  return out;
}

RunSection run_section(const ConfigFile& cfg) {
  RunSection r;
  for (const auto& e : cfg.entries) {
    if (e.section != "run") continue;
    try {
      if (e.key == "scenario") r.scenario = e.value;
      else if (e.key == "seed") r.seed = parse_u64(e.value);
      else if (e.key == "threads") {
        const long long t = parse_int(e.value);
        if (t < 0 || t > 4096) throw InputError("threads must be in [0, 4096]");
        r.threads = static_cast<int>(t);
      } else
        throw InputError("unknown key '" + e.key + "' in [run] (accepted: scenario, seed, threads)");
    } catch (const InputError& err) {
      const std::string msg = err.what();
      if (msg.rfind(cfg.source + ":", 0) == 0) throw;
      throw InputError(where(cfg.source, e.line) + msg);
    }
  }
  return r;
}

}  // namespace gplab::cli_io
