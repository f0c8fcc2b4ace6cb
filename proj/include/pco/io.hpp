#pragma once

// Text formats: dataset CSV, kernel/family JSON, and config field access
// with path-qualified error messages.

#include <cstddef>
#include <string>
#include <vector>

#include "json.hpp"
#include "pco/estimator.hpp"

namespace pco {

using Json = nlohmann::ordered_json;

/// "%.17g" in the C locale; round-trips every double.
std::string format_double(double v);
std::string csv_quote(const std::string& s);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

struct CsvParseResult {
  std::vector<double> x;
  std::vector<double> y;
  std::size_t d = 0;
  std::size_t rejected = 0;
};

/// Header row x1..xd,y, then one observation per line. Rows with NaN or
/// Inf entries are dropped and counted; malformed rows are data errors.
CsvParseResult parse_sample_csv(const std::string& text);
Sample read_sample_csv(const std::string& path, LossMap loss);
std::string sample_to_csv(const Sample& sample);

Json kernel_to_json(const KernelSpec& spec);
KernelSpec kernel_from_json(const Json& j, const std::string& path = "kernel");

/// Family config:
///   {"variant": "bandwidth", "base": "gaussian", "d": 1, "h_min": 0.01,
///    "grid": [..] | "grid_count": 8}
///   {"variant": "projection", "basis": "trigonometric", "d": 1, "m_max": 8, "w": [..]}
///   {"kernels": [kernel, ...]}
/// h_min defaults to n^(-1/d).
KernelFamily family_from_json(const Json& j, std::size_t n, const std::string& path = "family");
Json family_to_json(const KernelFamily& family);

Json parse_json_text(const std::string& text, const std::string& what);

// Field access; every failure is a Config error naming `path.key`.
const Json& require(const Json& obj, const std::string& key, const std::string& path);
double get_number(const Json& obj, const std::string& key, const std::string& path);
double get_number(const Json& obj, const std::string& key, const std::string& path, double fallback);
std::size_t get_count(const Json& obj, const std::string& key, const std::string& path);
std::size_t get_count(const Json& obj, const std::string& key, const std::string& path, std::size_t fallback);
std::string get_string(const Json& obj, const std::string& key, const std::string& path);
std::string get_string(const Json& obj, const std::string& key, const std::string& path, const std::string& fallback);
std::vector<double> get_number_array(const Json& obj, const std::string& key, const std::string& path);

}  // namespace pco
