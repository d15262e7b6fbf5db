#include "optograv/serialize.hpp"

#include <cmath>
#include <cstdio>

#include "optograv/config.hpp"
#include "optograv/error.hpp"

namespace optograv {

using nlohmann::json;

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string hex_hash(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

template <class It>
json interleave(It begin, It end) {
  json arr = json::array();
  for (auto it = begin; it != end; ++it) {
    arr.push_back(it->real());
    arr.push_back(it->imag());
  }
  return arr;
}

std::vector<std::complex<double>> deinterleave(const json& arr) {
  if (!arr.is_array() || arr.size() % 2 != 0) throw Error(ErrorKind::ConfigError, "expected interleaved re/im array");
  std::vector<std::complex<double>> out(arr.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = {arr[2 * i].get<double>(), arr[2 * i + 1].get<double>()};
  return out;
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string optional_field(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

}  // namespace

json to_json(const FieldState& s, const json& metadata) {
  return {{"n_max", s.n_max},
          {"norm_deficit", s.norm_deficit},
          {"amplitudes", interleave(s.amplitudes.begin(), s.amplitudes.end())},
          {"metadata", metadata}};
}

FieldState field_state_from_json(const json& j) try {
  FieldState s;
  s.n_max = j.at("n_max").get<int>();
  s.norm_deficit = j.value("norm_deficit", 0.0);
  s.amplitudes = deinterleave(j.at("amplitudes"));
  if (static_cast<int>(s.amplitudes.size()) != s.n_max + 1)
    throw Error(ErrorKind::ConfigError, "amplitude count does not match n_max");
  return s;
} catch (const json::exception& e) {
  throw Error(ErrorKind::ConfigError, std::string("field state: ") + e.what());
}

json to_json(const FieldDensityMatrix& m, const json& metadata) {
  std::vector<std::complex<double>> flat;
  flat.reserve(m.rho.size());
  for (Eigen::Index r = 0; r < m.rho.rows(); ++r)
    for (Eigen::Index c = 0; c < m.rho.cols(); ++c) flat.push_back(m.rho(r, c));
  return {{"n_max", m.rho.rows() - 1},
          {"nbar", m.nbar},
          {"time", m.time},
          {"trace_deficit", m.trace_deficit},
          {"rho", interleave(flat.begin(), flat.end())},
          {"metadata", metadata}};
}

FieldDensityMatrix density_matrix_from_json(const json& j) try {
  FieldDensityMatrix m;
  const int n = j.at("n_max").get<int>() + 1;
  const auto flat = deinterleave(j.at("rho"));
  if (static_cast<int>(flat.size()) != n * n) throw Error(ErrorKind::ConfigError, "rho size does not match n_max");
  m.rho.resize(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) m.rho(r, c) = flat[static_cast<std::size_t>(r) * n + c];
  m.nbar = j.value("nbar", 0.0);
  m.time = j.value("time", 0.0);
  m.trace_deficit = j.value("trace_deficit", 0.0);
  return m;
} catch (const json::exception& e) {
  throw Error(ErrorKind::ConfigError, std::string("density matrix: ") + e.what());
}

json to_json(const DerivedQuantities& d) {
  // NaN is not valid JSON; scaled inputs have no L, g0, g_tilde0
  auto num = [](double x) { return std::isfinite(x) ? json(x) : json(nullptr); };
  return {{"omega_tilde", d.omega_tilde}, {"L", num(d.L)},       {"g0", num(d.g0)},
          {"g_tilde0", num(d.g_tilde0)},  {"k_tilde", d.k_tilde}, {"S_tilde", d.S_tilde},
          {"tau", d.tau},                 {"dk2_dg", d.dk2_dg},   {"dkS_dg", d.dkS_dg},
          {"dS2_dg", d.dS2_dg},           {"A", d.A},             {"B", d.B}};
}

json to_json(const EstimationReport& r) {
  return {{"params", to_json(r.params)},
          {"mode", to_string(r.mode)},
          {"qfi", r.qfi},
          {"qfi_approx", r.qfi_approx},
          {"fi_hom", optional_number(r.fi_hom)},
          {"fi_het", optional_number(r.fi_het)},
          {"ratio_hom", optional_number(r.ratio_hom())},
          {"ratio_het", optional_number(r.ratio_het())},
          {"phi", r.phi},
          {"crb", r.crb},
          {"snr_bound", r.snr_bound},
          {"rel_error", r.rel_error},
          {"cycle_rate_hz", r.cycle_rate_hz},
          {"sensitivity_ugal_rthz", r.sensitivity_ugal_rthz}};
}

json to_json(const EstimateResult& r) {
  json curve = json::array();
  for (const auto& [g, ll] : r.log_likelihood_curve) curve.push_back({g, ll});
  json j = {{"method", r.method == EstimatorMethod::MaxLik ? "maxlik" : "bayes"},
            {"g_hat", r.g_hat},
            {"variance", r.variance},
            {"log_likelihood_curve", curve}};
  if (!r.posterior.empty()) j["posterior"] = r.posterior;
  return j;
}

json to_json(const StudySummary& s, bool include_replicas) {
  json j = {{"replicas", s.replicas},
            {"m_samples", s.m_samples},
            {"seed", s.seed},
            {"rng", kRngAlgorithm},
            {"phi", s.phi},
            {"true_g", s.true_g},
            {"fisher", s.fisher},
            {"mean_g_hat", s.mean_g_hat},
            {"bias", s.bias},
            {"variance", s.variance},
            {"normalized_variance", s.normalized_variance},
            {"ci95", {s.ci_low, s.ci_high}}};
  if (include_replicas) {
    json reps = json::array();
    for (std::size_t i = 0; i < s.estimates.size(); ++i)
      reps.push_back({{"index", i}, {"seed", replica_seed(s.seed, i)}, {"g_hat", s.estimates[i]}});
    j["replica_estimates"] = reps;
  }
  return j;
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void CsvWriter::metadata(std::uint64_t config_hash) {
  out_ << "# optograv " << kVersion << " config_hash=" << hex_hash(config_hash) << '\n';
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << ',';
    out_ << csv_escape(fields[i]);
  }
  out_ << '\n';
}

std::vector<std::string> report_csv_header() {
  return {"m",      "omega",  "omega_c",   "L0",        "g",         "R",   "alpha_re",
          "alpha_im", "nbar", "runs",      "hbar",      "G",         "M_earth", "mode",
          "qfi",    "fi_hom", "fi_het",    "ratio_hom", "ratio_het", "crb", "snr_bound",
          "rel_error", "sensitivity_ugal_rthz"};
}

std::vector<std::string> report_csv_row(const EstimationReport& r) {
  const PhysicalParams& p = r.params;
  return {format_double(p.m),        format_double(p.omega),        format_double(p.omega_c),
          format_double(p.L0),       format_double(p.g),            format_double(p.R),
          format_double(p.alpha.real()), format_double(p.alpha.imag()), format_double(p.nbar),
          std::to_string(p.runs),    format_double(p.hbar),         format_double(p.G),
          format_double(p.M_earth),  to_string(r.mode),             format_double(r.qfi),
          optional_field(r.fi_hom),  optional_field(r.fi_het),      optional_field(r.ratio_hom()),
          optional_field(r.ratio_het()), format_double(r.crb),      format_double(r.snr_bound),
          format_double(r.rel_error), format_double(r.sensitivity_ugal_rthz)};
}

}  // namespace optograv
