#include "gplab/io.hpp"

#include <openssl/evp.h>

#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "gplab/error.hpp"
#include "json.hpp"

#ifndef GPLAB_VERSION
#define GPLAB_VERSION "0.0.0"
#endif

namespace gplab::cli_io {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

const char* library_version() { return GPLAB_VERSION; }

std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, r.ptr);
}

void CsvTable::add(std::vector<Cell> row) {
  if (row.size() != columns.size())
    throw InputError("table " + name + ": row has " + std::to_string(row.size()) + " cells, header has " +
                     std::to_string(columns.size()));
  rows.push_back(std::move(row));
}

namespace {

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string cell_text(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return format_real(*d);
  if (const auto* i = std::get_if<long long>(&c)) return std::to_string(*i);
  return quote(std::get<std::string>(c));
}

}  // namespace

std::string to_csv(const CsvTable& t) {
  std::string out;
  for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + quote(t.columns[i]);
  out += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + cell_text(row[i]);
    out += '\n';
  }
  return out;
}

CsvText parse_csv(const std::string& text) {
  CsvText out;
  std::vector<std::string> row;
  std::string cell;
  bool quoted = false, any = false;
  auto end_row = [&] {
    row.push_back(cell);
    cell.clear();
    if (out.columns.empty()) out.columns = row;
    else {
      if (row.size() != out.columns.size()) throw InputError("csv: ragged row " + std::to_string(out.rows.size() + 1));
      out.rows.push_back(row);
    }
    row.clear();
    any = false;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (c == '"') quoted = false;
      else cell += c;
      continue;
    }
    any = true;
    if (c == '"') quoted = true;
    else if (c == ',') {
      row.push_back(cell);
      cell.clear();
    } else if (c == '\n') end_row();
    else if (c != '\r') cell += c;
  }
  if (quoted) throw InputError("csv: unterminated quote");
  if (any) end_row();
  return out;
}

std::size_t CsvText::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return i;
  throw InputError("csv: no column '" + name + "'");
}

std::vector<double> CsvText::numbers(const std::string& name) const {
  const std::size_t c = column(name);
  std::vector<double> out;
  for (const auto& r : rows) {
    const std::string& s = r[c];
    if (s == "nan") out.push_back(std::numeric_limits<double>::quiet_NaN());
    else if (s == "inf") out.push_back(INFINITY);
    else if (s == "-inf") out.push_back(-INFINITY);
    else {
      double v = 0.0;
      auto res = std::from_chars(s.data(), s.data() + s.size(), v);
      if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw InputError("csv: column '" + name + "' holds non-number '" + s + "'");
      out.push_back(v);
    }
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw InputError("cannot write '" + path + "'");
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw InputError("write failed for '" + path + "'");
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw NumericalError("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::string sha256_file(const std::string& path) { return sha256_hex(read_file(path)); }

namespace {

template <class T>
void put(std::string& out, T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big)
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
  out.append(reinterpret_cast<const char*>(b), sizeof(T));
}

template <class T>
T take(std::string_view& in) {
  if (in.size() < sizeof(T)) throw InputError("field file truncated");
  unsigned char b[sizeof(T)];
  std::memcpy(b, in.data(), sizeof(T));
  if constexpr (std::endian::native == std::endian::big)
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
  in.remove_prefix(sizeof(T));
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}

}  // namespace

namespace {

// Count is size()^k for k >= 1 slots.
bool field_count_ok(const TorusGrid& g, std::uint64_t count) {
  const std::uint64_t one = g.size();
  if (one == 0 || count == 0) return false;
  if (one == 1) return count == 1;
  while (count % one == 0 && count > one) count /= one;
  return count == one;
}

}  // namespace

std::string encode_field(const TorusGrid& g, const CVec& values) {
  if (!field_count_ok(g, values.size()))
    throw InputError("field of " + std::to_string(values.size()) + " values does not fit a " + std::to_string(g.dim) +
                     "-d grid of " + std::to_string(g.points) + " points");
  std::string out = "GPLF";
  put<std::uint32_t>(out, 1);
  put<std::int32_t>(out, g.dim);
  put<std::int32_t>(out, g.points);
  put<std::uint64_t>(out, values.size());
  for (const auto& z : values) {
    put<double>(out, z.real());
    put<double>(out, z.imag());
  }
  return out;
}

CVec decode_field(std::string_view in, TorusGrid& g) {
  if (in.substr(0, 4) != "GPLF") throw InputError("not a field file");
  in.remove_prefix(4);
  if (take<std::uint32_t>(in) != 1) throw InputError("unsupported field file version");
  const int dim = take<std::int32_t>(in), points = take<std::int32_t>(in);
  const auto n = take<std::uint64_t>(in);
  if (in.size() != n * 16) throw InputError("field file size does not match its header");
  const auto grid = TorusGrid::make(dim, points);
  if (!field_count_ok(grid, n)) throw InputError("field file count does not fit its grid");
  g = grid;
  CVec v(n);
  for (auto& z : v) {
    const double re = take<double>(in), im = take<double>(in);
    z = cplx(re, im);
  }
  return v;
}

std::string Check::describe() const {
  std::string s = name + " = " + format_real(value);
  if (std::isfinite(lo) && std::isfinite(hi)) s += " in [" + format_real(lo) + ", " + format_real(hi) + "]";
  else if (std::isfinite(hi)) s += " <= " + format_real(hi);
  else if (std::isfinite(lo)) s += " >= " + format_real(lo);
  return s;
}

namespace {

json number(double x) {
  if (std::isfinite(x)) return x;
  return format_real(x);
}

double number_of(const json& j) {
  if (j.is_number()) return j.get<double>();
  const std::string s = j.get<std::string>();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  throw InputError("manifest: bad number '" + s + "'");
}

json pairs(const std::vector<std::pair<std::string, std::string>>& v) {
  json o = json::object();
  for (const auto& [k, x] : v) o[k] = x;
  return o;
}

}  // namespace

std::string manifest_json(const RunManifest& m) {
  json j;
  j["scenario"] = m.scenario;
  j["module"] = m.module;
  j["version"] = m.version;
  j["started"] = m.started;
  j["finished"] = m.finished;
  j["seed"] = m.seed;
  j["threads"] = m.threads;
  j["wall_seconds"] = m.wall_seconds;
  j["params"] = pairs(m.params);
  j["notes"] = pairs(m.notes);
  j["files"] = json::array();
  for (const auto& f : m.files) j["files"].push_back({{"path", f.path}, {"bytes", f.bytes}, {"sha256", f.sha256}});
  j["checks"] = json::array();
  for (const auto& c : m.checks)
    j["checks"].push_back(
        {{"name", c.name}, {"value", number(c.value)}, {"lo", number(c.lo)}, {"hi", number(c.hi)}, {"passed", c.passed}});
  j["plots"] = json::array();
  for (const auto& p : m.plots)
    j["plots"].push_back({{"table", p.table},
                          {"x", p.x},
                          {"y", p.y},
                          {"title", p.title},
                          {"logx", p.logx},
                          {"logy", p.logy},
                          {"order_line", p.order_line}});
  j["status"] = m.status;
  if (!m.error.empty()) {
    j["error_kind"] = m.error_kind;
    j["error"] = m.error;
  }
  return j.dump(2) + "\n";
}

RunManifest parse_manifest(const std::string& text) {
  RunManifest m;
  try {
    const json j = json::parse(text);
    m.scenario = j.at("scenario").get<std::string>();
    m.module = j.at("module").get<std::string>();
    m.version = j.at("version").get<std::string>();
    m.started = j.at("started").get<std::string>();
    m.finished = j.at("finished").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.threads = j.at("threads").get<int>();
    m.wall_seconds = j.at("wall_seconds").get<double>();
    for (const auto& [k, v] : j.at("params").items()) m.params.emplace_back(k, v.get<std::string>());
    for (const auto& [k, v] : j.at("notes").items()) m.notes.emplace_back(k, v.get<std::string>());
    for (const auto& f : j.at("files"))
      m.files.push_back({f.at("path").get<std::string>(), f.at("bytes").get<std::uint64_t>(),
                         f.at("sha256").get<std::string>()});
    for (const auto& c : j.at("checks"))
      m.checks.push_back({c.at("name").get<std::string>(), number_of(c.at("value")), number_of(c.at("lo")),
                          number_of(c.at("hi")), c.at("passed").get<bool>()});
    for (const auto& p : j.at("plots"))
      m.plots.push_back({p.at("table").get<std::string>(), p.at("x").get<std::string>(),
                         p.at("y").get<std::vector<std::string>>(), p.at("title").get<std::string>(),
                         p.at("logx").get<bool>(), p.at("logy").get<bool>(), p.at("order_line").get<bool>()});
    m.status = j.at("status").get<std::string>();
    if (j.contains("error")) {
      m.error_kind = j.at("error_kind").get<std::string>();
      m.error = j.at("error").get<std::string>();
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("manifest: ") + e.what());
  }
  return m;
}

RunManifest read_manifest(const std::string& path) { return parse_manifest(read_file(path)); }

double fitted_order(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0) || !std::isfinite(x[i]) || !std::isfinite(y[i])) continue;
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) throw InputError("order fit needs two positive points");
  const double den = n * sxx - sx * sx;
  if (den == 0.0) throw InputError("order fit needs distinct x values");
  return (n * sxy - sx * sy) / den;
}

namespace {

std::string py_str(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '\\' || c == '"') out += '\\';
    out += c;
  }
  return out + "\"";
}

std::string stem_safe(const std::string& s) {
  std::string out;
  for (char c : s) out += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
  return out;
}

}  // namespace

std::vector<std::string> emit_plots(const RunManifest& m, const std::string& dir) {
  std::vector<std::string> written;
  for (const auto& p : m.plots) {
    const std::string csv_name = p.table + ".csv";
    const fs::path csv_path = fs::path(dir) / csv_name;
    if (!fs::exists(csv_path)) throw InputError("plot: missing " + csv_path.string());
    const CsvText t = parse_csv(read_file(csv_path.string()));
    if (p.y.empty()) throw InputError("plot of " + p.table + ": no y column");
    t.column(p.x);
    for (const auto& y : p.y) t.column(y);

    std::ostringstream s;
    s << "#!/usr/bin/env python3\n";
    s << "# " << (p.title.empty() ? p.table : p.title) << " (scenario " << m.scenario << ")\n";
    s << "import csv\nimport os\n\nimport matplotlib\nmatplotlib.use(\"Agg\")\nimport matplotlib.pyplot as plt\n\n";
    s << "here = os.path.dirname(os.path.abspath(__file__))\n";
    s << "with open(os.path.join(here, " << py_str(csv_name) << "), newline=\"\") as f:\n";
    s << "    rows = list(csv.DictReader(f))\n";
    s << "x = [float(r[" << py_str(p.x) << "]) for r in rows]\n";
    s << "fig, ax = plt.subplots(figsize=(6, 4.5))\n";
    s << "for col in [";
    for (std::size_t i = 0; i < p.y.size(); ++i) s << (i ? ", " : "") << py_str(p.y[i]);
    s << "]:\n";
    s << "    ax.plot(x, [float(r[col]) for r in rows], \"o-\", label=col)\n";
    if (p.order_line) {
      const auto xs = t.numbers(p.x), ys = t.numbers(p.y.front());
      const double slope = fitted_order(xs, ys);
      double lx = 0, ly = 0;
      int n = 0;
      for (std::size_t i = 0; i < xs.size(); ++i)
        if (xs[i] > 0 && ys[i] > 0) {
          lx += std::log(xs[i]);
          ly += std::log(ys[i]);
          ++n;
        }
      s << "slope = " << format_real(slope) << "\n";
      s << "x0, y0 = " << format_real(std::exp(lx / n)) << ", " << format_real(std::exp(ly / n)) << "\n";
      s << "ax.plot(x, [y0 * (v / x0) ** slope for v in x], \"k--\", label=\"order %.2f\" % slope)\n";
    }
    if (p.logx) s << "ax.set_xscale(\"log\")\n";
    if (p.logy) s << "ax.set_yscale(\"log\")\n";
    s << "ax.set_xlabel(" << py_str(p.x) << ")\n";
    s << "ax.set_title(" << py_str(p.title.empty() ? p.table : p.title) << ")\n";
    s << "ax.legend()\nfig.tight_layout()\n";
    const std::string stem = "plot_" + stem_safe(p.table) + "_" + stem_safe(p.y.front());
    s << "fig.savefig(os.path.join(here, " << py_str(stem + ".png") << "), dpi=120)\n";
    const fs::path out = fs::path(dir) / (stem + ".py");
    write_file(out.string(), s.str());
    written.push_back(out.string());
  }
  return written;
}

}  // namespace gplab::cli_io
