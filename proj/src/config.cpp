#include "optograv/config.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "optograv/error.hpp"

namespace optograv {
namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorKind::ConfigError, what); }

void reject_unknown(const json& j, const std::set<std::string>& allowed, const char* where) {
  if (!j.is_object()) config_error(std::string(where) + " must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) config_error(std::string("unknown key '") + key + "' in " + where);
  }
}

double number(const json& j, const char* key) {
  if (!j.is_number()) config_error(std::string(key) + " must be a number");
  return j.get<double>();
}

int integer(const json& j, const char* key) {
  if (!j.is_number_integer()) config_error(std::string(key) + " must be an integer");
  return j.get<int>();
}

std::complex<double> complex_value(const json& j, const char* key) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
    return {j[0].get<double>(), j[1].get<double>()};
  }
  config_error(std::string(key) + " must be a number or [re, im]");
}

void set_alpha_photons(std::complex<double>& alpha, double n_photons) {
  if (!(n_photons >= 0.0)) throw Error(ErrorKind::InvalidArgument, "N_p must be >= 0");
  const double arg = std::abs(alpha) > 0.0 ? std::arg(alpha) : 0.0;
  alpha = std::polar(std::sqrt(n_photons), arg);
}

}  // namespace

std::vector<double> SweepSpec::values() const {
  if (points < 1) throw Error(ErrorKind::ConfigError, "sweep points must be >= 1");
  if (log_spacing && !(min > 0.0 && max > 0.0)) throw Error(ErrorKind::ConfigError, "log sweep needs positive bounds");
  std::vector<double> out(points);
  for (int i = 0; i < points; ++i) {
    const double t = points == 1 ? 0.0 : double(i) / (points - 1);
    out[i] = log_spacing ? std::exp(std::log(min) + t * (std::log(max) - std::log(min))) : min + t * (max - min);
  }
  return out;
}

PhysicalParams RunConfig::default_physical_params() {
  PhysicalParams p;
  p.alpha = {std::sqrt(30.0), 0.0};
  return p;
}

PhysicalParams RunConfig::budget_params() {
  PhysicalParams p;
  p.omega = constants::kTwoPi * 1e5;
  p.L0 = 1e-5;
  p.alpha = {std::sqrt(1e5), 0.0};
  p.runs = 10000;
  return p;
}

GravityModel RunConfig::model() const {
  if (const auto* s = std::get_if<ScaledParams>(&params)) return GravityModel(*s);
  return GravityModel(std::get<PhysicalParams>(params), mode);
}

PhysicalParams parse_physical_params(const json& j) {
  reject_unknown(j, {"m", "omega", "omega_c", "L0", "g", "R", "alpha", "nbar", "runs", "hbar", "G", "M_earth"},
                 "params");
  PhysicalParams p;
  if (j.contains("m")) p.m = number(j["m"], "m");
  if (j.contains("omega")) p.omega = number(j["omega"], "omega");
  if (j.contains("omega_c")) p.omega_c = number(j["omega_c"], "omega_c");
  if (j.contains("L0")) p.L0 = number(j["L0"], "L0");
  if (j.contains("g")) p.g = number(j["g"], "g");
  if (j.contains("R")) p.R = number(j["R"], "R");
  if (j.contains("alpha")) p.alpha = complex_value(j["alpha"], "alpha");
  if (j.contains("nbar")) p.nbar = number(j["nbar"], "nbar");
  if (j.contains("runs")) p.runs = integer(j["runs"], "runs");
  if (j.contains("hbar")) p.hbar = number(j["hbar"], "hbar");
  if (j.contains("G")) p.G = number(j["G"], "G");
  if (j.contains("M_earth")) p.M_earth = number(j["M_earth"], "M_earth");
  return p;
}

ScaledParams parse_scaled_params(const json& j) {
  reject_unknown(j, {"omega_tilde", "k_tilde", "S_tilde", "dk_tilde_dg", "dS_tilde_dg", "g", "alpha", "nbar", "runs"},
                 "scaled");
  ScaledParams p;
  if (j.contains("omega_tilde")) p.omega_tilde = number(j["omega_tilde"], "omega_tilde");
  if (j.contains("k_tilde")) p.k_tilde = number(j["k_tilde"], "k_tilde");
  if (j.contains("S_tilde")) p.S_tilde = number(j["S_tilde"], "S_tilde");
  if (j.contains("dk_tilde_dg")) p.dk_tilde_dg = number(j["dk_tilde_dg"], "dk_tilde_dg");
  if (j.contains("dS_tilde_dg")) p.dS_tilde_dg = number(j["dS_tilde_dg"], "dS_tilde_dg");
  if (j.contains("g")) p.g = number(j["g"], "g");
  if (j.contains("alpha")) p.alpha = complex_value(j["alpha"], "alpha");
  if (j.contains("nbar")) p.nbar = number(j["nbar"], "nbar");
  if (j.contains("runs")) p.runs = integer(j["runs"], "runs");
  return p;
}

const char* to_string(GravityMode mode) { return mode == GravityMode::Full ? "full-gravity" : "first-order"; }

GravityMode parse_gravity_mode(const std::string& s) {
  if (s == "full-gravity") return GravityMode::Full;
  if (s == "first-order") return GravityMode::FirstOrder;
  config_error("mode must be 'full-gravity' or 'first-order' (got '" + s + "')");
}

RunConfig parse_run_config(const json& j) {
  reject_unknown(j, {"params", "scaled", "mode", "sweep", "scheme", "output"}, "config");
  RunConfig c;
  if (j.contains("params") && j.contains("scaled")) config_error("give exactly one of 'params' and 'scaled'");
  if (j.contains("params")) c.params = parse_physical_params(j["params"]);
  if (j.contains("scaled")) c.params = parse_scaled_params(j["scaled"]);
  if (j.contains("mode")) {
    if (!j["mode"].is_string()) config_error("mode must be a string");
    c.mode = parse_gravity_mode(j["mode"].get<std::string>());
  }
  if (j.contains("sweep")) {
    const json& s = j["sweep"];
    reject_unknown(s, {"variable", "min", "max", "points", "spacing"}, "sweep");
    for (const char* key : {"variable", "min", "max", "points"})
      if (!s.contains(key)) config_error(std::string("sweep.") + key + " is required");
    if (!s["variable"].is_string()) config_error("sweep.variable must be a string");
    SweepSpec spec;
    spec.variable = s["variable"].get<std::string>();
    spec.min = number(s["min"], "sweep.min");
    spec.max = number(s["max"], "sweep.max");
    spec.points = integer(s["points"], "sweep.points");
    if (s.contains("spacing")) {
      const std::string sp = s["spacing"].is_string() ? s["spacing"].get<std::string>() : "";
      if (sp != "linear" && sp != "log") config_error("sweep.spacing must be 'linear' or 'log'");
      spec.log_spacing = sp == "log";
    }
    if (spec.points < 1) config_error("sweep.points must be >= 1");
    if (!is_sweep_variable(c.params, spec.variable)) config_error("sweep.variable '" + spec.variable + "' names no field");
    c.sweep = spec;
  }
  if (j.contains("scheme")) {
    const json& s = j["scheme"];
    reject_unknown(s, {"kind", "phi"}, "scheme");
    const std::string kind = s.contains("kind") && s["kind"].is_string() ? s["kind"].get<std::string>() : "";
    if (kind == "homodyne") {
      c.scheme = MeasurementScheme::homodyne(s.contains("phi") ? number(s["phi"], "scheme.phi") : constants::kPi / 2);
    } else if (kind == "heterodyne") {
      if (s.contains("phi")) config_error("heterodyne detection takes no phase");
      c.scheme = MeasurementScheme::heterodyne();
    } else {
      config_error("scheme.kind must be 'homodyne' or 'heterodyne'");
    }
  }
  if (j.contains("output")) {
    const json& o = j["output"];
    reject_unknown(o, {"path", "format"}, "output");
    if (o.contains("path")) {
      if (!o["path"].is_string()) config_error("output.path must be a string");
      c.output.path = o["path"].get<std::string>();
    }
    if (o.contains("format")) {
      const std::string f = o["format"].is_string() ? o["format"].get<std::string>() : "";
      if (f == "csv") c.output.format = OutputFormat::Csv;
      else if (f == "json") c.output.format = OutputFormat::Json;
      else config_error("output.format must be 'csv' or 'json'");
    }
  }
  return c;
}

json to_json(const PhysicalParams& p) {
  return {{"m", p.m},         {"omega", p.omega}, {"omega_c", p.omega_c},
          {"L0", p.L0},       {"g", p.g},         {"R", p.R},
          {"alpha", {p.alpha.real(), p.alpha.imag()}},
          {"nbar", p.nbar},   {"runs", p.runs},   {"hbar", p.hbar},
          {"G", p.G},         {"M_earth", p.M_earth}};
}

json to_json(const ScaledParams& p) {
  return {{"omega_tilde", p.omega_tilde}, {"k_tilde", p.k_tilde},
          {"S_tilde", p.S_tilde},         {"dk_tilde_dg", p.dk_tilde_dg},
          {"dS_tilde_dg", p.dS_tilde_dg}, {"g", p.g},
          {"alpha", {p.alpha.real(), p.alpha.imag()}},
          {"nbar", p.nbar},               {"runs", p.runs}};
}

json to_json(const RunConfig& c) {
  json j;
  if (const auto* s = std::get_if<ScaledParams>(&c.params)) j["scaled"] = to_json(*s);
  else j["params"] = to_json(std::get<PhysicalParams>(c.params));
  j["mode"] = to_string(c.mode);
  if (c.sweep) {
    j["sweep"] = {{"variable", c.sweep->variable},
                  {"min", c.sweep->min},
                  {"max", c.sweep->max},
                  {"points", c.sweep->points},
                  {"spacing", c.sweep->log_spacing ? "log" : "linear"}};
  }
  if (c.scheme.kind == MeasurementScheme::Kind::Homodyne) j["scheme"] = {{"kind", "homodyne"}, {"phi", c.scheme.phi}};
  else j["scheme"] = {{"kind", "heterodyne"}};
  j["output"] = {{"path", c.output.path}, {"format", c.output.format == OutputFormat::Csv ? "csv" : "json"}};
  return j;
}

bool is_sweep_variable(const ParamsVariant& params, const std::string& v) {
  static const std::set<std::string> physical = {"m", "omega", "omega_c", "L0", "g", "R", "nbar", "runs", "N_p", "g0"};
  static const std::set<std::string> scaled = {"omega_tilde", "k_tilde", "S_tilde", "dk_tilde_dg", "dS_tilde_dg",
                                               "g",           "nbar",    "runs",    "N_p"};
  return std::holds_alternative<ScaledParams>(params) ? scaled.count(v) > 0 : physical.count(v) > 0;
}

void set_sweep_variable(ParamsVariant& params, const std::string& v, double value) {
  if (!is_sweep_variable(params, v)) throw Error(ErrorKind::ConfigError, "cannot sweep '" + v + "'");
  if (auto* s = std::get_if<ScaledParams>(&params)) {
    if (v == "omega_tilde") s->omega_tilde = value;
    else if (v == "k_tilde") s->k_tilde = value;
    else if (v == "S_tilde") s->S_tilde = value;
    else if (v == "dk_tilde_dg") s->dk_tilde_dg = value;
    else if (v == "dS_tilde_dg") s->dS_tilde_dg = value;
    else if (v == "g") s->g = value;
    else if (v == "nbar") s->nbar = value;
    else if (v == "runs") s->runs = static_cast<int>(std::lround(value));
    else if (v == "N_p") set_alpha_photons(s->alpha, value);
    return;
  }
  auto& p = std::get<PhysicalParams>(params);
  if (v == "m") p.m = value;
  else if (v == "omega") p.omega = value;
  else if (v == "omega_c") p.omega_c = value;
  else if (v == "L0") p.L0 = value;
  else if (v == "g") p.g = value;
  else if (v == "R") p.R = value;
  else if (v == "nbar") p.nbar = value;
  else if (v == "runs") p.runs = static_cast<int>(std::lround(value));
  else if (v == "N_p") set_alpha_photons(p.alpha, value);
  else if (v == "g0") p.omega_c = value * p.L0 / std::sqrt(p.hbar / (2.0 * p.m * p.omega));
}

std::uint64_t config_hash(const RunConfig& c) {
  // where the results go does not change them
  json j = to_json(c);
  j.erase("output");
  const std::string text = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace optograv
