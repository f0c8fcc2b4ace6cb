#include "pco/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "pco/error.hpp"

namespace pco {

namespace {

void default_sink(const std::string& message) { std::cerr << "warning: " << message << "\n"; }

WarningSink g_sink = &default_sink;

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(trim(std::string_view(line).substr(start)));
      break;
    }
    out.push_back(trim(std::string_view(line).substr(start, pos - start)));
    start = pos + 1;
  }
  return out;
}

// Locale independent; accepts nan/inf spellings so they can be counted.
bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  if (*b == '+') ++b;
  const auto [ptr, ec] = std::from_chars(b, e, out);
  return ec == std::errc() && ptr == e;
}

std::string field(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

}  // namespace

void set_warning_sink(WarningSink sink) { g_sink = sink ? sink : &default_sink; }

void warn(const std::string& message) { g_sink(message); }

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Data, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Config, "cannot write '" + path + "'");
  out << text;
  if (!out) fail(ErrorKind::Config, "write to '" + path + "' failed");
}

CsvParseResult parse_sample_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  CsvParseResult res;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_commas(line);
    if (!header) {
      if (cells.size() < 2) fail(ErrorKind::Data, "csv line 1: header needs columns x1..xd,y");
      for (std::size_t q = 0; q + 1 < cells.size(); ++q)
        if (cells[q] != "x" + std::to_string(q + 1))
          fail(ErrorKind::Data, "csv line " + std::to_string(line_no) + ": expected column 'x" +
                                    std::to_string(q + 1) + "', found '" + cells[q] + "'");
      if (cells.back() != "y") fail(ErrorKind::Data, "csv line " + std::to_string(line_no) + ": last column must be 'y'");
      res.d = cells.size() - 1;
      header = true;
      continue;
    }
    if (cells.size() != res.d + 1)
      fail(ErrorKind::Data, "csv line " + std::to_string(line_no) + ": expected " + std::to_string(res.d + 1) +
                                " fields, found " + std::to_string(cells.size()));
    std::vector<double> row(cells.size());
    bool finite = true;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (!parse_double(cells[c], row[c]))
        fail(ErrorKind::Data, "csv line " + std::to_string(line_no) + ": cannot parse '" + cells[c] + "'");
      finite = finite && std::isfinite(row[c]);
    }
    if (!finite) {
      ++res.rejected;
      continue;
    }
    res.x.insert(res.x.end(), row.begin(), row.end() - 1);
    res.y.push_back(row.back());
  }
  if (!header) fail(ErrorKind::Data, "csv: empty input");
  return res;
}

Sample read_sample_csv(const std::string& path, LossMap loss) {
  CsvParseResult r = parse_sample_csv(read_text_file(path));
  if (r.rejected > 0) warn(path + ": rejected " + std::to_string(r.rejected) + " rows with NaN or Inf entries");
  if (r.y.empty()) fail(ErrorKind::Data, path + ": no usable observations");
  return Sample(std::move(r.x), r.d, std::move(r.y), loss);
}

std::string sample_to_csv(const Sample& sample) {
  std::string out;
  for (std::size_t q = 0; q < sample.d(); ++q) out += "x" + std::to_string(q + 1) + ",";
  out += "y\n";
  for (std::size_t i = 0; i < sample.n(); ++i) {
    for (double v : sample.x(i)) out += format_double(v) + ",";
    out += format_double(sample.y(i)) + "\n";
  }
  return out;
}

Json parse_json_text(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::Config, what + ": invalid JSON at byte " + std::to_string(e.byte) + ": " + e.what());
  }
}

const Json& require(const Json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) fail(ErrorKind::Config, "config field '" + (path.empty() ? "<root>" : path) + "' must be an object");
  auto it = obj.find(key);
  if (it == obj.end()) fail(ErrorKind::Config, "config field '" + field(path, key) + "' is required");
  return *it;
}

double get_number(const Json& obj, const std::string& key, const std::string& path) {
  const Json& v = require(obj, key, path);
  if (!v.is_number()) fail(ErrorKind::Config, "config field '" + field(path, key) + "' must be a number");
  return v.get<double>();
}

double get_number(const Json& obj, const std::string& key, const std::string& path, double fallback) {
  return obj.is_object() && obj.contains(key) ? get_number(obj, key, path) : fallback;
}

std::size_t get_count(const Json& obj, const std::string& key, const std::string& path) {
  const Json& v = require(obj, key, path);
  if (!v.is_number_integer() || v.get<long long>() < 0)
    fail(ErrorKind::Config, "config field '" + field(path, key) + "' must be a nonnegative integer");
  return v.get<std::size_t>();
}

std::size_t get_count(const Json& obj, const std::string& key, const std::string& path, std::size_t fallback) {
  return obj.is_object() && obj.contains(key) ? get_count(obj, key, path) : fallback;
}

std::string get_string(const Json& obj, const std::string& key, const std::string& path) {
  const Json& v = require(obj, key, path);
  if (!v.is_string()) fail(ErrorKind::Config, "config field '" + field(path, key) + "' must be a string");
  return v.get<std::string>();
}

std::string get_string(const Json& obj, const std::string& key, const std::string& path, const std::string& fallback) {
  return obj.is_object() && obj.contains(key) ? get_string(obj, key, path) : fallback;
}

std::vector<double> get_number_array(const Json& obj, const std::string& key, const std::string& path) {
  const Json& v = require(obj, key, path);
  if (!v.is_array()) fail(ErrorKind::Config, "config field '" + field(path, key) + "' must be an array");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number())
      fail(ErrorKind::Config, "config field '" + field(path, key) + "[" + std::to_string(i) + "]' must be a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

Json kernel_to_json(const KernelSpec& spec) {
  Json j;
  if (spec.is_bandwidth()) {
    j["variant"] = "bandwidth";
    j["base"] = to_string(spec.as_bandwidth().base.kind);
    j["h"] = spec.as_bandwidth().h;
  } else {
    const auto& p = spec.as_projection();
    j["variant"] = "projection";
    j["basis"] = to_string(p.basis.kind());
    j["m"] = p.m;
    if (p.weighted()) j["w"] = p.w;
  }
  return j;
}

KernelSpec kernel_from_json(const Json& j, const std::string& path) {
  const std::string variant = get_string(j, "variant", path);
  try {
    if (variant == "bandwidth") {
      BaseKernel base{base_kernel_from_string(get_string(j, "base", path, "gaussian"))};
      return KernelSpec::bandwidth(base, get_number_array(j, "h", path));
    }
    if (variant == "projection") {
      BasisFamily basis(basis_kind_from_string(get_string(j, "basis", path)));
      std::vector<int> m;
      for (double v : get_number_array(j, "m", path)) {
        if (v != std::floor(v) || v < 1) fail(ErrorKind::Config, "config field '" + field(path, "m") + "' must hold positive integers");
        m.push_back(static_cast<int>(v));
      }
      std::vector<double> w;
      if (j.contains("w")) w = get_number_array(j, "w", path);
      return KernelSpec::projection(basis, m, w);
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Config) throw;
    fail(ErrorKind::Config, "config field '" + path + "': " + e.what());
  }
  fail(ErrorKind::Config, "config field '" + field(path, "variant") + "' must be bandwidth|projection, found '" +
                              variant + "'");
}

KernelFamily family_from_json(const Json& j, std::size_t n, const std::string& path) {
  try {
    if (j.is_object() && j.contains("kernels")) {
      const Json& arr = require(j, "kernels", path);
      if (!arr.is_array() || arr.empty())
        fail(ErrorKind::Config, "config field '" + field(path, "kernels") + "' must be a nonempty array");
      KernelFamily fam;
      fam.n = n;
      for (std::size_t i = 0; i < arr.size(); ++i)
        fam.specs.push_back(kernel_from_json(arr[i], field(path, "kernels[" + std::to_string(i) + "]")));
      fam.k0_index = find_overfitting_k0(fam);
      validate_family(fam);
      return fam;
    }
    const std::string variant = get_string(j, "variant", path);
    const std::size_t d = get_count(j, "d", path, 1);
    if (variant == "bandwidth") {
      BaseKernel base{base_kernel_from_string(get_string(j, "base", path, "gaussian"))};
      const double floor_h = std::pow(static_cast<double>(n), -1.0 / static_cast<double>(d));
      const double h_min = get_number(j, "h_min", path, floor_h);
      std::vector<double> grid;
      if (j.contains("grid"))
        grid = get_number_array(j, "grid", path);
      else
        grid = geometric_grid(h_min, get_count(j, "grid_count", path));
      return make_bandwidth_family(base, h_min, grid, d, n);
    }
    if (variant == "projection") {
      BasisFamily basis(basis_kind_from_string(get_string(j, "basis", path)));
      const std::size_t m_max = get_count(j, "m_max", path);
      std::vector<double> w;
      if (j.contains("w")) w = get_number_array(j, "w", path);
      return make_projection_family(basis, static_cast<int>(m_max), d, n, w);
    }
    fail(ErrorKind::Config, "config field '" + field(path, "variant") + "' must be bandwidth|projection, found '" +
                                variant + "'");
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Config || e.kind() == ErrorKind::DimensionMismatch) throw;
    fail(ErrorKind::Config, "config field '" + path + "': " + e.what());
  }
}

Json family_to_json(const KernelFamily& family) {
  Json j;
  j["n"] = family.n;
  j["k0_index"] = family.k0_index;
  Json arr = Json::array();
  for (const auto& s : family.specs) arr.push_back(kernel_to_json(s));
  j["kernels"] = std::move(arr);
  return j;
}

}  // namespace pco
