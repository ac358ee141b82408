#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "gplab/grid.hpp"

namespace gplab::cli_io {

// %.17g with a '.' decimal point; nan, inf and -inf spelled out.
std::string format_real(double x);

using Cell = std::variant<double, long long, std::string>;

struct CsvTable {
  std::string name;  // file stem
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  // Throws InputError when the width differs from the header.
  void add(std::vector<Cell> row);
};

// Header line plus one line per row, LF endings; text cells holding ',', '"'
// or a line break are quoted.
std::string to_csv(const CsvTable& t);

// Parsed CSV with every cell kept as text.
struct CsvText {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  std::size_t column(const std::string& name) const;
  std::vector<double> numbers(const std::string& name) const;
};
CsvText parse_csv(const std::string& text);

std::string read_file(const std::string& path);
// Binary write, so LF stays LF.
void write_file(const std::string& path, std::string_view bytes);

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::string& path);

// "GPLF", u32 version, i32 dim, i32 points, u64 count, then re/im pairs,
// all little endian.  The count is the grid size to a positive power, one
// factor per particle slot.
std::string encode_field(const TorusGrid& g, const CVec& values);
CVec decode_field(std::string_view bytes, TorusGrid& g);

struct Check {
  std::string name;
  double value = 0.0;
  // Closed interval [lo, hi]; infinite ends are open.
  double lo = 0.0, hi = 0.0;
  bool passed = false;
  std::string describe() const;
};

struct FileRecord {
  std::string path;  // relative to the manifest
  std::uint64_t bytes = 0;
  std::string sha256;
};

struct PlotSpec {
  std::string table;
  std::string x;
  std::vector<std::string> y;
  std::string title;
  bool logx = false, logy = false;
  // Overlay a least-squares power law through the first y column.
  bool order_line = false;
};

struct RunManifest {
  std::string scenario, module, version;
  std::string started, finished;  // UTC, ISO 8601
  std::uint64_t seed = 0;
  int threads = 0;
  double wall_seconds = 0.0;
  std::vector<std::pair<std::string, std::string>> params;
  std::vector<std::pair<std::string, std::string>> notes;
  std::vector<FileRecord> files;
  std::vector<Check> checks;
  std::vector<PlotSpec> plots;
  // pass, fail or error
  std::string status;
  // input or numerical, with the message, when status is error
  std::string error_kind, error;

  bool passed() const { return status == "pass"; }
};

std::string manifest_json(const RunManifest& m);
RunManifest parse_manifest(const std::string& json_text);
RunManifest read_manifest(const std::string& path);

// Least-squares slope of log y against log x over rows with x, y > 0.
double fitted_order(const std::vector<double>& x, const std::vector<double>& y);

// One matplotlib script per plot spec, written next to the manifest and
// reading the CSV by relative path.  Returns the script paths.  A missing
// CSV or column throws InputError; a manifest without plots writes nothing.
std::vector<std::string> emit_plots(const RunManifest& m, const std::string& dir);

const char* library_version();

}  // namespace gplab::cli_io
