#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "optograv/dynamics.hpp"
#include "optograv/estimation.hpp"
#include "optograv/inference.hpp"

namespace optograv {

inline constexpr const char* kVersion = "0.1.0";

/// "%.17g": round-trips every double.
std::string format_double(double x);
std::string hex_hash(std::uint64_t h);

/// Complex vectors are stored as interleaved [re0, im0, re1, im1, ...].
nlohmann::json to_json(const FieldState& s, const nlohmann::json& metadata = nlohmann::json::object());
FieldState field_state_from_json(const nlohmann::json& j);

/// rho row-major, interleaved re/im.
nlohmann::json to_json(const FieldDensityMatrix& m, const nlohmann::json& metadata = nlohmann::json::object());
FieldDensityMatrix density_matrix_from_json(const nlohmann::json& j);

nlohmann::json to_json(const DerivedQuantities& d);
nlohmann::json to_json(const EstimationReport& r);
nlohmann::json to_json(const EstimateResult& r);
nlohmann::json to_json(const StudySummary& s, bool include_replicas = false);

/// RFC 4180 quoting: fields containing a comma, quote, CR or LF are quoted
/// and embedded quotes doubled.
std::string csv_escape(std::string_view field);

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}
  /// "# optograv <version> config_hash=<hex>"
  void metadata(std::uint64_t config_hash);
  void row(const std::vector<std::string>& fields);

 private:
  std::ostream& out_;
};

std::vector<std::string> report_csv_header();
std::vector<std::string> report_csv_row(const EstimationReport& r);

}  // namespace optograv
