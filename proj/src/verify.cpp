#include "optograv/verify.hpp"

#include <cmath>
#include <sstream>

#include "optograv/estimation.hpp"
#include "optograv/fock.hpp"

namespace optograv {

namespace {

using cplx = std::complex<double>;

double poisson_weight(double mean, int n) {
  if (mean == 0.0) return n == 0 ? 1.0 : 0.0;
  return std::exp(n * std::log(mean) - mean - std::lgamma(n + 1.0));
}

CheckResult make_check(std::string name, double value, double tolerance, std::string detail = {}) {
  CheckResult c;
  c.name = std::move(name);
  c.value = value;
  c.tolerance = tolerance;
  c.passed = std::isfinite(value) && value <= tolerance;
  c.detail = std::move(detail);
  return c;
}

double relative(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

bool VerifyReport::all_passed() const {
  for (const auto& c : checks)
    if (!c.passed) return false;
  return !checks.empty();
}

OracleInputs choose_oracle_inputs(const HamiltonianSpec& h, int n_f, int n_m, double target) {
  static const double kModuli[] = {2.0, 1.5, 1.0, 0.7, 0.5, 0.3, 0.2, 0.1, 0.05};
  const cplx beta{h.S_tilde, 0.0};
  OracleInputs best;
  for (double r : kModuli) {
    const double mean = r * r;
    double loss = poisson_tail(mean, n_f);
    for (int n = 0; n <= n_f; ++n) {
      // branch n circles c_n = k n + S through beta; |gamma| <= |c_n| + |beta - c_n|
      const double c = h.k_tilde * n + h.S_tilde;
      const double reach = std::abs(c) + std::abs(beta - cplx(c, 0.0));
      loss += poisson_weight(mean, n) * poisson_tail(reach * reach, n_m);
    }
    best = {std::polar(r, 0.3), beta, loss};
    if (loss < target) return best;
  }
  return best;
}

double unitary_discrepancy(const HamiltonianSpec& h, double t, int n_f, int n_m, bool inject_fault,
                           OracleMethod method) {
  const OracleInputs in = choose_oracle_inputs(h, n_f, n_m);
  DerivedQuantities d;
  d.omega_tilde = h.omega_tilde;
  d.k_tilde = h.k_tilde;
  d.S_tilde = h.S_tilde;
  d.tau = constants::kTwoPi / h.omega_tilde;
  JointState s = joint_state(d, in.alpha, in.beta, t);
  if (inject_fault) {
    for (int n = 0; n <= s.n_max; ++n) s.branches[n].coefficient *= std::polar(1.0, 0.05 * n * n);
  }
  BruteForceOptions opts;
  opts.method = method;
  const Eigen::VectorXcd brute = brute_force_evolution(h, in.alpha, in.beta, t, n_f, n_m, opts);
  const Eigen::VectorXcd closed = joint_state_vector(s, n_f, n_m);
  return 1.0 - state_overlap(closed, brute);
}

double qfi_poisson_sum(double A, double B, double n_photons) {
  const int n_max = truncation_for(n_photons, 1e-17);
  const double mean = A * (n_photons * n_photons + n_photons) + B * n_photons;
  std::vector<double> terms(n_max + 1);
  for (int n = 0; n <= n_max; ++n) {
    const double x = A * double(n) * n + B * n - mean;
    terms[n] = poisson_weight(n_photons, n) * x * x;
  }
  return 4.0 * pairwise_sum(terms);
}

VerifyReport run_verification(const ScaledParams& params, const VerifyOptions& options) {
  validate(params);
  VerifyReport report;
  const GravityModel model(params);
  const DerivedQuantities d = model.derived();
  const cplx alpha = model.alpha();
  const double n_p = std::norm(alpha);

  // closed form against the truncated Hamiltonian
  {
    const HamiltonianSpec h = HamiltonianSpec::from(d);
    double worst = 0.0;
    for (double frac : {0.25, 0.5, 1.0}) {
      worst = std::max(worst, unitary_discrepancy(h, frac * d.tau, 30, 30, options.inject_fault));
    }
    report.checks.push_back(make_check("unitary_oracle", worst, 1e-8, "1 - overlap, worst over t in {tau/4, tau/2, tau}"));
  }

  const QfiCoefficients c = exact_coefficients(d);
  const double q_closed = qfi_closed_form(c, n_p);
  {
    const double q_state = qfi_from_state(model, alpha, 1e-3 * std::abs(params.g));
    report.checks.push_back(make_check("qfi_closed_vs_state", relative(q_state, q_closed), 1e-4));
  }
  {
    const double q_sum = qfi_poisson_sum(c.A, c.B, n_p);
    report.checks.push_back(make_check("qfi_closed_vs_poisson", relative(q_sum, q_closed), 1e-10));
  }

  FisherOptions fo;
  fo.execution = options.execution;
  {
    const FisherResult r = homodyne_fisher(d, alpha, constants::kPi / 2, fo);
    report.checks.push_back(make_check("homodyne_normalization", std::abs(r.normalization - 1.0), 1e-10));
  }
  {
    const FisherResult r = heterodyne_fisher(d, alpha, fo);
    report.checks.push_back(make_check("heterodyne_normalization", std::abs(r.normalization - 1.0), 1e-8));
  }

  {
    const cplx beta{0.5, 0.3};
    const double ts[] = {0.0, d.tau};
    const auto pts = phase_space_trajectory(d, MirrorScale{}, beta, n_p, ts);
    const double dist = std::hypot(pts[1].x - pts[0].x, pts[1].p - pts[0].p);
    report.checks.push_back(
        make_check("closed_loop", dist / std::hypot(pts[0].x, pts[0].p), 1e-12, "relative return distance at tau"));
  }

  {
    const auto ref = field_density_matrix_thermal(d, alpha, 0.0, d.tau);
    double worst = 0.0;
    for (double nbar : {1.0, 10.0}) {
      const auto m = field_density_matrix_thermal(d, alpha, nbar, d.tau);
      worst = std::max(worst, (m.rho - ref.rho).cwiseAbs().maxCoeff());
    }
    report.checks.push_back(make_check("thermal_independence", worst, 1e-12, "max |rho(nbar) - rho(0)| at tau"));
  }

  {
    // nbar = 0 thermal matrix equals the trace over a vacuum mirror
    const double t = d.tau / 3.0;
    const auto thermal = field_density_matrix_thermal(d, alpha, 0.0, t);
    const Eigen::MatrixXcd pure = reduced_field_matrix(joint_state(d, alpha, 0.0, t));
    const Eigen::Index n = std::min(thermal.rho.rows(), pure.rows());
    const double diff = (thermal.rho.topLeftCorner(n, n) - pure.topLeftCorner(n, n)).cwiseAbs().maxCoeff();
    report.checks.push_back(make_check("thermal_vs_reduced", diff, 1e-12, "nbar = 0 at tau/3"));
  }

  {
    double worst = 0.0;
    for (double nbar : {0.0, 1.0, 10.0}) {
      const double t = d.tau / 3.0;
      const auto m = field_density_matrix_thermal(d, alpha, nbar, t);
      std::vector<cplx> terms;
      for (Eigen::Index n = 0; n + 1 < m.rho.rows(); ++n) terms.push_back(std::sqrt(double(n + 1)) * m.rho(n + 1, n));
      cplx trace{0.0, 0.0};
      for (const auto& v : terms) trace += v;
      worst = std::max(worst, std::abs(trace - mean_field(d, alpha, nbar, t)));
    }
    report.checks.push_back(make_check("mean_field_trace", worst, 1e-10, "|<a> - Tr(a rho)| at tau/3"));
  }
  return report;
}

nlohmann::json to_json(const CheckResult& c) {
  return {{"name", c.name}, {"passed", c.passed}, {"value", c.value}, {"tolerance", c.tolerance}, {"detail", c.detail}};
}

nlohmann::json to_json(const VerifyReport& r) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : r.checks) checks.push_back(to_json(c));
  return {{"passed", r.all_passed()}, {"checks", checks}};
}

}  // namespace optograv
