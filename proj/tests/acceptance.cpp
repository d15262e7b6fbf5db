// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance [--expect-fail 2[,5...]]
//
// Exit status is 0 when the set of failing criteria equals the expected set.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "optograv/config.hpp"
#include "optograv/dynamics.hpp"
#include "optograv/estimation.hpp"
#include "optograv/inference.hpp"
#include "optograv/params.hpp"
#include "optograv/verify.hpp"

using namespace optograv;
using constants::kPi;
using cplx = std::complex<double>;

namespace {

struct Outcome {
  bool passed = false;
  std::string summary;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// worst normalisation errors over every state the criteria touch
double worst_hom_norm = 0.0;
double worst_het_norm = 0.0;
int states_checked = 0;

void note_norms(const FisherResult* hom, const FisherResult* het) {
  if (hom) worst_hom_norm = std::max(worst_hom_norm, std::abs(hom->normalization - 1.0));
  if (het) worst_het_norm = std::max(worst_het_norm, std::abs(het->normalization - 1.0));
  ++states_checked;
}

PhysicalParams with_g0_scale(double scale) {
  PhysicalParams p = RunConfig::default_physical_params();
  ParamsVariant v = p;
  set_sweep_variable(v, "g0", scale * derive_quantities(p).g0);
  return std::get<PhysicalParams>(v);
}

PhysicalParams with_photons(PhysicalParams p, double n) {
  p.alpha = {std::sqrt(n), 0.0};
  return p;
}

Outcome homodyne_optimality() {
  std::vector<PhysicalParams> points;
  for (int i = 0; i < 8; ++i) points.push_back(with_g0_scale(0.25 * std::pow(16.0, i / 7.0)));
  for (double n : {1.0, 3.0, 10.0, 20.0, 30.0, 50.0, 75.0, 100.0})
    points.push_back(with_photons(RunConfig::default_physical_params(), n));
  double worst = 0.0;
  for (const auto& p : points) {
    const DerivedQuantities d = derive_quantities(p);
    const FisherResult r = homodyne_fisher(d, p.alpha, kPi / 2);
    note_norms(&r, nullptr);
    worst = std::max(worst, std::abs(r.information / qfi_closed_form(exact_coefficients(d), p.photon_number()) - 1.0));
  }
  return {worst <= 1e-3, fmt("%.0f points, worst |F_hom/Q - 1| = %.2e (tol 1e-3)", double(points.size()), worst)};
}

Outcome heterodyne_ratio() {
  double lo = 1e300, hi = -1e300, worst = 0.0;
  for (double scale : {0.5, 1.0, 2.0}) {
    for (double n : {10.0, 30.0, 100.0}) {
      const PhysicalParams p = with_photons(with_g0_scale(scale), n);
      const DerivedQuantities d = derive_quantities(p);
      const FisherResult r = heterodyne_fisher(d, p.alpha);
      note_norms(nullptr, &r);
      const double ratio = r.information / qfi_closed_form(exact_coefficients(d), n);
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
      worst = std::max(worst, std::abs(ratio - 0.88));
    }
  }
  return {worst <= 0.02 && hi - lo < 0.02,
          fmt("F_het/Q in [%.6f, %.6f], spread %.1e, worst |ratio - 0.88| = %.3f (tol 0.02)", lo, hi, hi - lo, worst)};
}

Outcome qfi_linearity() {
  const PhysicalParams base = RunConfig::default_physical_params();
  const DerivedQuantities d = derive_quantities(base, GravityMode::FirstOrder);
  const QfiCoefficients c = exact_coefficients(d);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  std::vector<double> xs, ys;
  for (int n = 1; n <= 100; ++n) {
    const double q = qfi_closed_form(c, n);
    xs.push_back(n);
    ys.push_back(q);
    sxy += n * q;
    sxx += double(n) * n;
    syy += q * q;
  }
  const double slope = sxy / sxx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) ss_res += (ys[i] - slope * xs[i]) * (ys[i] - slope * xs[i]);
  const double r2 = 1.0 - ss_res / syy;
  const double slope_err = rel(slope, 4.0 * d.B * d.B);
  return {r2 > 0.9999 && slope_err <= 1e-6,
          fmt("A = %.1g, R^2 = %.12f, |slope/4B^2 - 1| = %.1e (tol 1e-6)", c.A, r2, slope_err)};
}

Outcome snr_budget_check() {
  const EstimationReport r = snr_budget(RunConfig::budget_params());
  const auto rows = platform_table(r);
  const double rel_factor = std::max(r.rel_error / 3.5e-10, 3.5e-10 / r.rel_error);
  const double sens_factor = std::max(r.sensitivity_ugal_rthz / 0.1, 0.1 / r.sensitivity_ugal_rthz);
  const bool ok = r.snr_bound >= 1e18 && r.snr_bound <= 1e19 && rel_factor <= 2.0 && sens_factor <= 2.0 &&
                  rows.size() == 5 && rows.back().platform == "Optomechanics";
  return {ok, fmt("R_g = %.3e, dg/g = %.3e (x%.2f of 3.5e-10), ", r.snr_bound, r.rel_error, rel_factor) +
                  fmt("%.3f uGal/rtHz (x%.2f of 0.1) at one shot per period", r.sensitivity_ugal_rthz, sens_factor)};
}

Outcome unitary_oracle() {
  double worst = 0.0, max_modulus = 0.0;
  int points = 0;
  for (double k : {0.02, 0.1, 0.3}) {
    for (double s : {0.0, 0.5, 2.0}) {
      const HamiltonianSpec h{1.0, k, s};
      const OracleInputs in = choose_oracle_inputs(h, 30, 30);
      max_modulus = std::max({max_modulus, std::abs(in.alpha), std::abs(in.beta)});
      for (double frac : {0.25, 0.5, 1.0}) {
        worst = std::max(worst, unitary_discrepancy(h, frac * constants::kTwoPi, 30, 30));
        ++points;
      }
    }
  }
  return {worst <= 1e-8 && max_modulus <= 2.0,
          fmt("%.0f points at 30x30, worst 1 - overlap = %.2e (tol 1e-8), max |alpha|,|beta| = %.2f", points, worst,
              max_modulus)};
}

Outcome thermal_independence() {
  double worst = 0.0;
  auto check = [&](const DerivedQuantities& d, cplx alpha) {
    const auto ref = field_density_matrix_thermal(d, alpha, 0.0, d.tau);
    for (double nbar : {1.0, 10.0}) {
      const auto m = field_density_matrix_thermal(d, alpha, nbar, d.tau);
      worst = std::max(worst, (m.rho - ref.rho).cwiseAbs().maxCoeff());
    }
  };
  const ScaledParams s;
  check(derive_quantities(s), s.alpha);
  const PhysicalParams p = RunConfig::default_physical_params();
  check(derive_quantities(p), p.alpha);
  return {worst <= 1e-12, fmt("scaled and SI states, nbar in {0, 1, 10}: max |delta rho| = %.2e (tol 1e-12)", worst)};
}

Outcome closed_loop() {
  double worst = 0.0;
  auto check = [&](const DerivedQuantities& d, const MirrorScale& scale, double n_p) {
    const double ts[] = {0.0, d.tau};
    const auto pts = phase_space_trajectory(d, scale, {0.5, 0.3}, n_p, ts);
    worst = std::max(worst, std::hypot(pts[1].x - pts[0].x, pts[1].p - pts[0].p) / std::hypot(pts[0].x, pts[0].p));
  };
  const ScaledParams s;
  check(derive_quantities(s), MirrorScale{}, std::norm(s.alpha));
  const PhysicalParams p = RunConfig::default_physical_params();
  check(derive_quantities(p), MirrorScale::from(p), p.photon_number());
  return {worst <= 1e-12, fmt("scaled and SI loops: worst relative return distance = %.2e (tol 1e-12)", worst)};
}

Outcome qfi_cross_validation() {
  double worst_state = 0.0, worst_sum = 0.0;
  for (cplx alpha : {cplx(std::sqrt(2.0), 0.0), cplx(1.0, 1.0), cplx(0.3, -2.0)}) {
    ScaledParams s;
    s.alpha = alpha;
    const GravityModel m(s);
    const QfiCoefficients c = exact_coefficients(m.derived());
    const double q = qfi_closed_form(c, std::norm(alpha));
    worst_state = std::max(worst_state, rel(qfi_from_state(m, alpha, 1e-3), q));
    worst_sum = std::max(worst_sum, rel(qfi_poisson_sum(c.A, c.B, std::norm(alpha)), q));
  }
  return {worst_state <= 1e-4 && worst_sum <= 1e-10,
          fmt("fidelity route %.1e (tol 1e-4), Poisson sum %.1e (tol 1e-10)", worst_state, worst_sum)};
}

Outcome crb_saturation() {
  // seed fixed before the first run
  const GravityModel model{ScaledParams{}};
  const StudySummary st = crb_saturation_study(model, model.alpha(), kPi / 2, 1000, 100, 20261015);
  const bool ok = st.normalized_variance >= 0.85 && st.normalized_variance <= 1.25;
  return {ok, fmt("Var(g_hat) m F = %.4f, 95%% CI [%.3f, %.3f], target [0.85, 1.25]", st.normalized_variance,
                  st.ci_low, st.ci_high)};
}

Outcome normalizations() {
  const ScaledParams s;
  const DerivedQuantities d = derive_quantities(s);
  const FisherResult hom = homodyne_fisher(d, s.alpha, kPi / 2);
  const FisherResult het = heterodyne_fisher(d, s.alpha);
  note_norms(&hom, &het);
  const PhysicalParams p = RunConfig::default_physical_params();
  const DerivedQuantities dp = derive_quantities(p);
  const FisherResult hom_p = homodyne_fisher(dp, p.alpha, kPi / 2);
  const FisherResult het_p = heterodyne_fisher(dp, p.alpha);
  note_norms(&hom_p, &het_p);
  return {worst_hom_norm <= 1e-10 && worst_het_norm <= 1e-8,
          fmt("%.0f states: homodyne %.1e (tol 1e-10), heterodyne %.1e (tol 1e-8)", states_checked, worst_hom_norm,
              worst_het_norm)};
}

std::set<int> parse_expected(int argc, char** argv) {
  std::set<int> out;
  for (int i = 1; i < argc; ++i) {
    if (std::string(argv[i]) == "--expect-fail" && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      std::string item;
      while (std::getline(ss, item, ',')) out.insert(std::stoi(item));
    } else {
      std::fprintf(stderr, "usage: acceptance [--expect-fail N[,N...]]\n");
      std::exit(2);
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  const std::set<int> expected = parse_expected(argc, argv);
  configure_threads_from_env();

  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"homodyne optimality", homodyne_optimality},
      {"heterodyne ratio", heterodyne_ratio},
      {"QFI linearity", qfi_linearity},
      {"SNR budget", snr_budget_check},
      {"unitary oracle", unitary_oracle},
      {"thermal independence", thermal_independence},
      {"closed loop", closed_loop},
      {"QFI cross-validation", qfi_cross_validation},
      {"CRB saturation", crb_saturation},
      {"distribution normalizations", normalizations},
  };

  std::set<int> failed;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.passed) failed.insert(id);
    std::printf("%s %2d %-28s %s [%.1fs]%s\n", o.passed ? "PASS" : "FAIL", id, criteria[i].first, o.summary.c_str(),
                secs, !o.passed && expected.count(id) ? " (expected)" : "");
    std::fflush(stdout);
  }
  std::printf("%zu/%zu passed\n", criteria.size() - failed.size(), criteria.size());
  if (failed != expected) {
    for (int id : failed)
      if (!expected.count(id)) std::printf("unexpected failure: %d\n", id);
    for (int id : expected)
      if (!failed.count(id)) std::printf("expected failure now passes: %d\n", id);
    return 1;
  }
  return 0;
}
