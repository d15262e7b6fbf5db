#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "optograv/estimation.hpp"
#include "optograv/params.hpp"

namespace optograv {

struct SweepSpec {
  std::string variable;
  double min = 0.0;
  double max = 0.0;
  int points = 1;
  bool log_spacing = false;

  std::vector<double> values() const;
};

enum class OutputFormat { Csv, Json };

struct OutputSpec {
  std::string path;  // empty: stdout
  OutputFormat format = OutputFormat::Csv;
};

using ParamsVariant = std::variant<PhysicalParams, ScaledParams>;

struct RunConfig {
  ParamsVariant params = default_physical_params();
  GravityMode mode = GravityMode::Full;
  std::optional<SweepSpec> sweep;
  MeasurementScheme scheme = MeasurementScheme::homodyne(constants::kPi / 2.0);
  OutputSpec output;

  GravityModel model() const;

  /// Reference cavity for the QFI/FI sweeps: m = 1e-7 kg, omega = 2 pi 1e7 rad/s,
  /// omega_c = 1e15 rad/s, L0 = 1e-4 m, N_p = 30.
  static PhysicalParams default_physical_params();

  /// Budget configuration: N_p = 1e5, omega = 2 pi 1e5 rad/s, L0 = 1e-5 m,
  /// otherwise as above, M = 1e4 repetitions.
  static PhysicalParams budget_params();
};

/// Strict parsers: unknown keys and wrong types raise Error{ConfigError}.
PhysicalParams parse_physical_params(const nlohmann::json& j);
ScaledParams parse_scaled_params(const nlohmann::json& j);
RunConfig parse_run_config(const nlohmann::json& j);

nlohmann::json to_json(const PhysicalParams& p);
nlohmann::json to_json(const ScaledParams& p);
nlohmann::json to_json(const RunConfig& c);

const char* to_string(GravityMode mode);
GravityMode parse_gravity_mode(const std::string& s);

/// Set one sweepable field. Besides the plain numeric fields this accepts
/// N_p (keeps arg alpha) and, for SI inputs, g0 (rescales omega_c so the
/// horizontal coupling takes the requested value).
void set_sweep_variable(ParamsVariant& params, const std::string& variable, double value);
bool is_sweep_variable(const ParamsVariant& params, const std::string& variable);

/// FNV-1a 64 of the canonical JSON dump, output section excluded.
std::uint64_t config_hash(const RunConfig& c);

}  // namespace optograv
