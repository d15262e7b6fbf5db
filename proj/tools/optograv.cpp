// optograv command-line front end.
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "optograv/config.hpp"
#include "optograv/error.hpp"
#include "optograv/estimation.hpp"
#include "optograv/inference.hpp"
#include "optograv/quadrature.hpp"
#include "optograv/serialize.hpp"
#include "optograv/verify.hpp"

using namespace optograv;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct Flags {
  std::string config_path;
  std::optional<double> omega_hz;
  std::optional<double> n_photons;
  std::optional<double> phi;
  std::optional<std::string> mode;
  std::optional<std::string> format;
  std::optional<std::string> output;
  std::uint64_t seed = 1;
  int samples = 1000;
  int replicas = 100;
  // subcommand specific
  std::string dump_state;
  std::string dump_replicas;
  bool with_fi = false;
  bool inject_fault = false;
  bool json_report = false;
  std::string method = "both";
  int bayes_grid = 201;
  double bracket = 0.1;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

RunConfig load_config(const Flags& f) {
  RunConfig c;
  if (!f.config_path.empty()) {
    std::ifstream in(f.config_path);
    if (!in) throw UsageError("cannot open config '" + f.config_path + "'");
    json j;
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw UsageError(std::string("config parse error: ") + e.what());
    }
    c = parse_run_config(j);
  }
  // flags win over the file
  if (f.omega_hz) {
    auto* p = std::get_if<PhysicalParams>(&c.params);
    if (!p) throw UsageError("--omega-hz needs SI parameters");
    p->omega = constants::kTwoPi * *f.omega_hz;
  }
  if (f.n_photons) set_sweep_variable(c.params, "N_p", *f.n_photons);
  if (f.phi) c.scheme = MeasurementScheme::homodyne(*f.phi);
  if (f.mode) c.mode = parse_gravity_mode(*f.mode);
  if (f.format) {
    if (*f.format == "csv") c.output.format = OutputFormat::Csv;
    else if (*f.format == "json") c.output.format = OutputFormat::Json;
    else throw UsageError("--format must be csv or json");
  }
  if (f.output) c.output.path = *f.output;
  return c;
}

void emit(const RunConfig& c, const std::string& text) {
  if (c.output.path.empty() || c.output.path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(c.output.path);
  if (!out) throw UsageError("cannot write '" + c.output.path + "'");
  out << text;
}

std::string csv_table(const RunConfig& c, const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows) {
  std::ostringstream os;
  CsvWriter w(os);
  w.metadata(config_hash(c));
  w.row(header);
  for (const auto& r : rows) w.row(r);
  return os.str();
}

json envelope(const RunConfig& c, json body) {
  body["version"] = kVersion;
  body["config_hash"] = hex_hash(config_hash(c));
  return body;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

bool is_csv(const RunConfig& c) { return c.output.format == OutputFormat::Csv; }

const char* scheme_name(const MeasurementScheme& s) {
  return s.kind == MeasurementScheme::Kind::Homodyne ? "homodyne" : "heterodyne";
}

double scheme_fi(const DerivedQuantities& d, std::complex<double> alpha, const MeasurementScheme& s,
                 const FisherOptions& fo, double* normalization = nullptr) {
  const FisherResult r = s.kind == MeasurementScheme::Kind::Homodyne ? homodyne_fisher(d, alpha, s.phi, fo)
                                                                     : heterodyne_fisher(d, alpha, fo);
  if (normalization) *normalization = r.normalization;
  return r.information;
}

const PhysicalParams& require_physical(const RunConfig& c, const char* cmd) {
  const auto* p = std::get_if<PhysicalParams>(&c.params);
  if (!p) throw UsageError(std::string(cmd) + " needs SI parameters ('params'), not 'scaled'");
  return *p;
}

// --- subcommands -------------------------------------------------------------

int cmd_derive(const Flags& f) {
  const RunConfig c = load_config(f);
  const GravityModel model = c.model();
  const DerivedQuantities d = model.derived();
  std::vector<std::string> warns;
  if (const auto* p = std::get_if<PhysicalParams>(&c.params)) warns = warnings(*p);
  for (const auto& w : warns) std::cerr << "warning: " << w << '\n';

  if (!f.dump_state.empty()) {
    const FieldState s = field_state_at_period(d, model.alpha());
    json meta = {{"version", kVersion}, {"config_hash", hex_hash(config_hash(c))}, {"g", model.g()}};
    std::ofstream out(f.dump_state);
    if (!out) throw UsageError("cannot write '" + f.dump_state + "'");
    out << optograv::to_json(s, meta).dump() << '\n';
  }

  const json dj = optograv::to_json(d);
  if (is_csv(c)) {
    const std::vector<std::string> header = {"omega_tilde", "L",      "g0",     "g_tilde0", "k_tilde", "S_tilde",
                                             "tau",         "dk2_dg", "dkS_dg", "dS2_dg",   "A",       "B"};
    std::vector<std::string> row;
    for (const auto& k : header) {
      const json& v = dj.at(k);
      row.push_back(v.is_null() ? std::string() : format_double(v.get<double>()));
    }
    emit(c, csv_table(c, header, {row}));
  } else {
    emit(c, dump(envelope(c, {{"derived", dj}, {"warnings", warns}})));
  }
  return kExitOk;
}

int cmd_sweep(const Flags& f) {
  const RunConfig c = load_config(f);
  if (!c.sweep) throw UsageError("sweep needs a 'sweep' section in the config");
  const std::vector<double> values = c.sweep->values();
  const int n = static_cast<int>(values.size());
  std::vector<double> qfi(n), fi(n);
  std::vector<std::exception_ptr> failures(n);

  FisherOptions fo;
  fo.execution = Execution::Serial;  // parallel across points instead
#pragma omp parallel for schedule(dynamic, 1)
  for (int i = 0; i < n; ++i) {
    try {
      RunConfig point = c;
      set_sweep_variable(point.params, c.sweep->variable, values[i]);
      const GravityModel model = point.model();
      const DerivedQuantities d = model.derived();
      const double n_p = std::norm(model.alpha());
      qfi[i] = qfi_closed_form(exact_coefficients(d), n_p);
      fi[i] = scheme_fi(d, model.alpha(), c.scheme, fo);
    } catch (...) {
      failures[i] = std::current_exception();
    }
  }
  for (const auto& e : failures)
    if (e) std::rethrow_exception(e);

  auto ratio = [&](int i) { return qfi[i] > 0.0 ? fi[i] / qfi[i] : 0.0; };
  if (is_csv(c)) {
    std::vector<std::vector<std::string>> rows;
    for (int i = 0; i < n; ++i)
      rows.push_back({format_double(values[i]), format_double(qfi[i]), format_double(fi[i]), format_double(ratio(i))});
    emit(c, csv_table(c, {c.sweep->variable, "qfi", "fi", "ratio"}, rows));
  } else {
    json rows = json::array();
    for (int i = 0; i < n; ++i)
      rows.push_back({{c.sweep->variable, values[i]}, {"qfi", qfi[i]}, {"fi", fi[i]}, {"ratio", ratio(i)}});
    emit(c, dump(envelope(c, {{"variable", c.sweep->variable}, {"scheme", scheme_name(c.scheme)}, {"rows", rows}})));
  }
  return kExitOk;
}

int cmd_qfi(const Flags& f) {
  const RunConfig c = load_config(f);
  const GravityModel model = c.model();
  const DerivedQuantities d = model.derived();
  const double n_p = std::norm(model.alpha());
  const QfiCoefficients ex = exact_coefficients(d);
  const QfiCoefficients ap = approximate_coefficients(d);
  const double q = qfi_closed_form(ex, n_p);
  const double qa = qfi_closed_form(ap, n_p);
  if (is_csv(c)) {
    emit(c, csv_table(c, {"N_p", "A", "B", "qfi", "A_approx", "B_approx", "qfi_approx"},
                      {{format_double(n_p), format_double(ex.A), format_double(ex.B), format_double(q),
                        format_double(ap.A), format_double(ap.B), format_double(qa)}}));
  } else {
    emit(c, dump(envelope(c, {{"N_p", n_p},
                              {"A", ex.A},
                              {"B", ex.B},
                              {"qfi", q},
                              {"A_approx", ap.A},
                              {"B_approx", ap.B},
                              {"qfi_approx", qa}})));
  }
  return kExitOk;
}

int cmd_fi(const Flags& f) {
  const RunConfig c = load_config(f);
  const GravityModel model = c.model();
  const DerivedQuantities d = model.derived();
  const double q = qfi_closed_form(exact_coefficients(d), std::norm(model.alpha()));
  double norm = 0.0;
  const double fi = scheme_fi(d, model.alpha(), c.scheme, {}, &norm);
  const double ratio = q > 0.0 ? fi / q : 0.0;
  const bool hom = c.scheme.kind == MeasurementScheme::Kind::Homodyne;
  if (is_csv(c)) {
    emit(c, csv_table(c, {"scheme", "phi", "fi", "qfi", "ratio", "normalization"},
                      {{scheme_name(c.scheme), hom ? format_double(c.scheme.phi) : std::string(), format_double(fi),
                        format_double(q), format_double(ratio), format_double(norm)}}));
  } else {
    json j = {{"scheme", scheme_name(c.scheme)}, {"fi", fi}, {"qfi", q}, {"ratio", ratio}, {"normalization", norm}};
    if (hom) j["phi"] = c.scheme.phi;
    emit(c, dump(envelope(c, j)));
  }
  return kExitOk;
}

EstimationReport report_for(const RunConfig& c, bool with_fi) {
  SnrOptions so;
  so.homodyne = so.heterodyne = with_fi;
  if (c.scheme.kind == MeasurementScheme::Kind::Homodyne) so.phi = c.scheme.phi;
  return snr_budget(require_physical(c, "snr"), c.mode, so);
}

int cmd_snr(const Flags& f) {
  const RunConfig c = load_config(f);
  const EstimationReport r = report_for(c, f.with_fi);
  if (is_csv(c)) emit(c, csv_table(c, report_csv_header(), {report_csv_row(r)}));
  else emit(c, dump(envelope(c, {{"report", optograv::to_json(r)}})));
  return kExitOk;
}

int cmd_table(const Flags& f) {
  RunConfig c;
  if (f.config_path.empty()) {
    // without a config the table shows the budget configuration
    c = load_config(f);
    PhysicalParams p = RunConfig::budget_params();
    if (f.omega_hz) p.omega = constants::kTwoPi * *f.omega_hz;
    if (f.n_photons) p.alpha = {std::sqrt(*f.n_photons), 0.0};
    c.params = p;
  } else {
    c = load_config(f);
  }
  const auto rows = platform_table(report_for(c, false));
  if (is_csv(c)) {
    std::vector<std::vector<std::string>> out;
    for (const auto& r : rows) out.push_back({r.platform, r.rel_error, r.ugal_rthz, r.status});
    emit(c, csv_table(c, {"platform", "rel_error", "ugal_rthz", "status"}, out));
  } else {
    json out = json::array();
    for (const auto& r : rows)
      out.push_back({{"platform", r.platform}, {"rel_error", r.rel_error}, {"ugal_rthz", r.ugal_rthz}, {"status", r.status}});
    emit(c, dump(envelope(c, {{"platforms", out}})));
  }
  return kExitOk;
}

int cmd_verify(const Flags& f) {
  RunConfig c = load_config(f);
  if (f.config_path.empty()) c.params = ScaledParams{};
  const auto* s = std::get_if<ScaledParams>(&c.params);
  if (!s) throw UsageError("verify needs a 'scaled' parameter block");
  VerifyOptions vo;
  vo.inject_fault = f.inject_fault;
  const VerifyReport r = run_verification(*s, vo);
  if (f.json_report) {
    emit(c, dump(envelope(c, optograv::to_json(r))));
  } else {
    std::ostringstream os;
    for (const auto& ch : r.checks) {
      os << (ch.passed ? "PASS " : "FAIL ") << ch.name << "  value=" << format_double(ch.value)
         << " tol=" << format_double(ch.tolerance);
      if (!ch.detail.empty()) os << "  (" << ch.detail << ")";
      os << '\n';
    }
    os << (r.all_passed() ? "all checks passed\n" : "verification FAILED\n");
    emit(c, os.str());
  }
  return r.all_passed() ? kExitOk : kExitFailure;
}

MeasurementScheme require_homodyne(const RunConfig& c) {
  if (c.scheme.kind != MeasurementScheme::Kind::Homodyne)
    throw UsageError("sampling and estimation support homodyne detection only");
  return c.scheme;
}

int cmd_sample(const Flags& f) {
  const RunConfig c = load_config(f);
  const MeasurementScheme s = require_homodyne(c);
  const GravityModel model = c.model();
  const FieldState state = field_state_at_period(model.derived(), model.alpha());
  const SampleBatch b = sample_homodyne(state, s.phi, f.samples, f.seed, model.g());
  if (is_csv(c)) {
    std::vector<std::vector<std::string>> rows;
    for (double x : b.outcomes) rows.push_back({format_double(x)});
    emit(c, csv_table(c, {"x"}, rows));
  } else {
    emit(c, dump(envelope(c, {{"seed", b.seed},
                              {"rng", kRngAlgorithm},
                              {"phi", s.phi},
                              {"true_g", b.true_g},
                              {"outcomes", b.outcomes}})));
  }
  return kExitOk;
}

int cmd_estimate(const Flags& f) {
  const RunConfig c = load_config(f);
  const MeasurementScheme s = require_homodyne(c);
  if (f.method != "both" && f.method != "maxlik" && f.method != "bayes")
    throw UsageError("--method must be maxlik, bayes or both");
  const GravityModel model = c.model();
  const DerivedQuantities d = model.derived();
  const FieldState state = field_state_at_period(d, model.alpha());
  const SampleBatch b = sample_homodyne(state, s.phi, f.samples, f.seed, model.g());
  const SearchInterval bracket = SearchInterval::around(model.g(), f.bracket);

  std::vector<EstimateResult> results;
  if (f.method != "bayes") results.push_back(max_likelihood(b, model, model.alpha(), bracket));
  if (f.method != "maxlik") results.push_back(bayes_posterior(b, model, model.alpha(), bracket, f.bayes_grid));

  const double fisher = homodyne_fi(d, model.alpha(), s.phi);
  const double crb = cramer_rao(fisher, f.samples);
  if (is_csv(c)) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : results)
      rows.push_back({r.method == EstimatorMethod::MaxLik ? "maxlik" : "bayes", format_double(r.g_hat),
                      format_double(r.variance), format_double(crb)});
    emit(c, csv_table(c, {"method", "g_hat", "variance", "crb"}, rows));
  } else {
    json arr = json::array();
    for (const auto& r : results) arr.push_back(optograv::to_json(r));
    emit(c, dump(envelope(c, {{"seed", f.seed},
                              {"rng", kRngAlgorithm},
                              {"samples", f.samples},
                              {"true_g", model.g()},
                              {"fisher", fisher},
                              {"crb", crb},
                              {"estimates", arr}})));
  }
  return kExitOk;
}

int cmd_study(const Flags& f) {
  const RunConfig c = load_config(f);
  const MeasurementScheme s = require_homodyne(c);
  const GravityModel model = c.model();
  StudyOptions so;
  so.relative_bracket = f.bracket;
  const StudySummary st = crb_saturation_study(model, model.alpha(), s.phi, f.samples, f.replicas, f.seed, so);

  if (!f.dump_replicas.empty()) {
    std::ofstream out(f.dump_replicas);
    if (!out) throw UsageError("cannot write '" + f.dump_replicas + "'");
    CsvWriter w(out);
    w.metadata(config_hash(c));
    w.row({"index", "seed", "g_hat"});
    for (std::size_t i = 0; i < st.estimates.size(); ++i)
      w.row({std::to_string(i), std::to_string(replica_seed(st.seed, i)), format_double(st.estimates[i])});
  }

  if (is_csv(c)) {
    emit(c, csv_table(c,
                      {"replicas", "m_samples", "seed", "phi", "true_g", "fisher", "mean_g_hat", "bias", "variance",
                       "normalized_variance", "ci_low", "ci_high"},
                      {{std::to_string(st.replicas), std::to_string(st.m_samples), std::to_string(st.seed),
                        format_double(st.phi), format_double(st.true_g), format_double(st.fisher),
                        format_double(st.mean_g_hat), format_double(st.bias), format_double(st.variance),
                        format_double(st.normalized_variance), format_double(st.ci_low), format_double(st.ci_high)}}));
  } else {
    emit(c, dump(envelope(c, {{"study", optograv::to_json(st, false)}})));
  }
  return kExitOk;
}

int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::ConfigError:
    case ErrorKind::InvalidArgument:
    case ErrorKind::NonPositiveInput:
    case ErrorKind::FrequencyImaginary:
      return kExitUsage;
    default:
      return kExitFailure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  configure_threads_from_env();
  CLI::App app{"optograv: gravimetry with a cavity optomechanical mirror"};
  app.require_subcommand(1);
  app.fallthrough();

  Flags f;
  app.add_option("--config", f.config_path, "JSON run configuration");
  app.add_option("--omega-hz", f.omega_hz, "mechanical frequency in Hz (sets omega = 2 pi f)");
  app.add_option("--np", f.n_photons, "mean photon number N_p (keeps the phase of alpha)");
  app.add_option("--phi", f.phi, "homodyne local-oscillator phase");
  app.add_option("--mode", f.mode, "full-gravity | first-order");
  app.add_option("--format", f.format, "csv | json");
  app.add_option("--output", f.output, "output file (default stdout)");
  app.add_option("--seed", f.seed, "master seed");
  app.add_option("--samples", f.samples, "measurement outcomes per batch")->check(CLI::PositiveNumber);
  app.add_option("--replicas", f.replicas, "independent replicas")->check(CLI::PositiveNumber);

  std::function<int()> run;
  auto sub = [&](const char* name, const char* help, int (*fn)(const Flags&)) {
    CLI::App* s = app.add_subcommand(name, help);
    s->callback([&run, &f, fn] { run = [&f, fn] { return fn(f); }; });
    return s;
  };
  sub("derive", "derived quantities", cmd_derive)
      ->add_option("--dump-state", f.dump_state, "write the field state after one period as JSON");
  sub("sweep", "QFI and FI along the configured sweep axis", cmd_sweep);
  sub("qfi", "quantum Fisher information", cmd_qfi);
  sub("fi", "classical Fisher information of the configured scheme", cmd_fi);
  sub("snr", "signal-to-noise budget", cmd_snr)->add_flag("--with-fi", f.with_fi, "also compute homodyne and heterodyne FI");
  sub("table", "platform comparison table", cmd_table);
  auto* verify = sub("verify", "oracle cross-checks", cmd_verify);
  verify->add_flag("--inject-fault", f.inject_fault, "perturb a phase; the suite must fail");
  verify->add_flag("--json", f.json_report, "machine-readable per-check results");
  sub("sample", "draw homodyne outcomes", cmd_sample);
  auto* est = sub("estimate", "sample then estimate g", cmd_estimate);
  est->add_option("--method", f.method, "maxlik | bayes | both");
  est->add_option("--grid", f.bayes_grid, "posterior grid points")->check(CLI::Range(64, 1 << 20));
  est->add_option("--bracket", f.bracket, "relative search half-width around g");
  auto* study = sub("study", "Monte-Carlo estimator study", cmd_study);
  study->add_option("--dump-replicas", f.dump_replicas, "write per-replica estimates as CSV");
  study->add_option("--bracket", f.bracket, "relative search half-width around g");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    return run();
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}
