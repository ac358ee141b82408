#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace gplab::cli_io {

enum class ParamType { Int, Real, Bool, Text, RealList, IntList };
const char* type_name(ParamType t);

struct ParamSpec {
  std::string key;
  ParamType type = ParamType::Real;
  std::string default_value;
  std::string help;
  // Text only; empty accepts any value.
  std::vector<std::string> choices;
};

// One `key = value` line.
struct ConfigEntry {
  std::string section, key, value;
  int line = 0;
};

struct ConfigFile {
  std::string source;
  std::vector<ConfigEntry> entries;
  const ConfigEntry* find(const std::string& section, const std::string& key) const;
  std::vector<std::string> sections() const;
};

// Text schema:
//   # comment
//   [section]
//   key = value
// Keys before the first section header, malformed lines and duplicate keys
// throw InputError as "source:line: message".
ConfigFile parse_config(const std::string& text, const std::string& source = "<config>");
ConfigFile load_config(const std::string& path);

class ParamMap {
 public:
  // Defaults only.
  static ParamMap defaults(const std::vector<ParamSpec>& specs);
  // Defaults overridden by `section` of cfg.  Sections other than [run] and
  // `section`, and keys missing from the specs, are rejected with their line.
  static ParamMap resolve(const std::vector<ParamSpec>& specs, const ConfigFile& cfg, const std::string& section);

  long long integer(const std::string& key) const;
  double real(const std::string& key) const;
  bool boolean(const std::string& key) const;
  const std::string& text(const std::string& key) const;
  const std::vector<double>& reals(const std::string& key) const;
  std::vector<long long> integers(const std::string& key) const;

  // Sets a value from text; InputError on an unknown key or a bad value.
  void set(const std::string& key, const std::string& value);
  // (key, canonical value) in spec order.
  std::vector<std::pair<std::string, std::string>> echo() const;

 private:
  struct Value {
    ParamSpec spec;
    std::string canonical;
    std::vector<double> numbers;
    std::string text;
  };
  const Value& get(const std::string& key, ParamType t) const;
  static Value parse_value(const ParamSpec& spec, const std::string& raw);

  std::vector<std::string> order_;
  std::map<std::string, Value> values_;
};

// Keys of the [run] section.
struct RunSection {
  std::optional<std::string> scenario;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};
RunSection run_section(const ConfigFile& cfg);

// Strict numeric parsing of a whole string; InputError on trailing garbage.
double parse_real(const std::string& s);
long long parse_int(const std::string& s);
std::uint64_t parse_u64(const std::string& s);

}  // namespace gplab::cli_io
