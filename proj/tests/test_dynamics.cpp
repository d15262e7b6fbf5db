#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "doctest.h"
#include "optograv/config.hpp"
#include "optograv/dynamics.hpp"
#include "optograv/error.hpp"
#include "optograv/fock.hpp"
#include "optograv/verify.hpp"
#include "test_support.hpp"

using namespace optograv;
using cplx = std::complex<double>;
using constants::kPi;
using constants::kTwoPi;
using testing_support::rel_err;

namespace {

DerivedQuantities scaled(double k, double s, double w = 1.0) {
  ScaledParams p;
  p.omega_tilde = w;
  p.k_tilde = k;
  p.S_tilde = s;
  return derive_quantities(p);
}

double wrap(double x) { return std::remainder(x, kTwoPi); }

}  // namespace

TEST_CASE("coherent amplitudes and truncation") {
  const cplx alpha{1.2, -0.7};
  const int n_max = truncation_for(std::norm(alpha));
  CHECK(poisson_tail(std::norm(alpha), n_max) < kTruncationTolerance);
  const auto c = coherent_amplitudes(alpha, n_max);
  double norm = 0.0;
  for (const auto& v : c) norm += std::norm(v);
  CHECK(std::abs(norm - 1.0) < 1e-13);
  CHECK(std::abs(c[1] / c[0] - alpha) < 1e-14);
  CHECK(std::abs(c[3] / c[2] - alpha / std::sqrt(3.0)) < 1e-14);

  // large photon numbers stay finite
  const auto big = coherent_amplitudes(cplx(300.0, 0.0), truncation_for(9e4));
  double total = 0.0;
  for (const auto& v : big) total += std::norm(v);
  CHECK(std::abs(total - 1.0) < 1e-10);
}

TEST_CASE("vacuum field gives one branch") {
  const DerivedQuantities d = scaled(0.1, 0.5);
  const cplx beta{0.3, 0.2};
  const double t = 0.7;
  const JointState s = joint_state(d, 0.0, beta, t);
  CHECK(s.n_max == 0);
  CHECK(std::abs(std::norm(s.branches[0].coefficient) - 1.0) < 1e-15);
  const cplx rot = std::polar(1.0, -d.omega_tilde * t);
  const cplx expected = beta * rot + d.S_tilde * (1.0 - rot);
  CHECK(std::abs(s.branches[0].gamma - expected) < 1e-15);
}

TEST_CASE("at one period the mirror returns and the field picks up the Kerr phase") {
  const DerivedQuantities d = scaled(0.1, 0.5);
  const cplx alpha{1.1, 0.4}, beta{0.3, -0.2};
  const JointState s = joint_state(d, alpha, beta, d.tau);
  const auto coh = coherent_amplitudes(alpha, s.n_max);
  for (int n = 0; n <= s.n_max; ++n) {
    CHECK(std::abs(s.branches[n].gamma - beta) < 1e-14);
    if (std::norm(coh[n]) < 1e-20) continue;
    const double theta = std::arg(s.branches[n].coefficient / coh[n]);
    const double expected = kTwoPi * std::pow(d.k_tilde * n + d.S_tilde, 2);
    CHECK(std::abs(wrap(theta - expected)) < 1e-12);
  }
}

TEST_CASE("period phase reduction stays accurate for large arguments") {
  const DerivedQuantities d = derive_quantities(RunConfig::budget_params());
  // the S^2 term is ~1.8e11 turns; only the n-dependent part matters
  for (int n : {1, 10, 1000, 100000}) {
    const double diff = wrap(period_phase(d, n) - period_phase(d, 0));
    const testing_support::hp k = d.k_tilde, s = d.S_tilde;
    const testing_support::hp turns = k * k * n * n + 2 * k * s * n;
    const testing_support::hp frac = turns - floor(turns);
    const double expected = wrap(kTwoPi * static_cast<double>(frac));
    CHECK(std::abs(wrap(diff - expected)) < 1e-12);
  }
}

TEST_CASE("c2/c1 phase difference") {
  const DerivedQuantities d = scaled(0.05, 1.0);
  const FieldState f = field_state_at_period(d, cplx(1.0, 0.0));
  const double diff = std::arg(f.amplitudes[2] / f.amplitudes[1]);
  // golden_params.py
  CHECK(std::abs(wrap(diff - 0.67544242052180555)) < 1e-13);
}

TEST_CASE("zero coupling leaves the coherent state up to a global phase") {
  const DerivedQuantities d = scaled(0.0, 0.7);
  const cplx alpha{1.3, 0.2};
  const FieldState f = field_state_at_period(d, alpha);
  const auto coh = coherent_amplitudes(alpha, f.n_max);
  const cplx global = f.amplitudes[0] / coh[0];
  CHECK(std::abs(std::arg(global) - wrap(kTwoPi * 0.49)) < 1e-12);
  for (int n = 0; n <= f.n_max; ++n) CHECK(std::abs(f.amplitudes[n] - global * coh[n]) < 1e-14);
}

TEST_CASE("joint state at tau is separable and matches the field state") {
  const DerivedQuantities d = scaled(0.1, 0.5);
  const cplx alpha{1.0, 0.5};
  const FieldState f = field_state_at_period(d, alpha);
  for (cplx beta : {cplx(0.0, 0.0), cplx(0.4, -0.3), cplx(-1.0, 1.0)}) {
    const Eigen::MatrixXcd rho = reduced_field_matrix(joint_state(d, alpha, beta, d.tau));
    for (int n = 0; n <= f.n_max; ++n)
      for (int m = 0; m <= f.n_max; ++m)
        CHECK(std::abs(rho(n, m) - f.amplitudes[n] * std::conj(f.amplitudes[m])) < 1e-14);
  }
}

TEST_CASE("brute-force oracle: scaled state at tau/3") {
  const DerivedQuantities d = scaled(0.1, 0.5);
  const HamiltonianSpec h = HamiltonianSpec::from(d);
  const cplx alpha{std::sqrt(2.0), 0.0}, beta{0.3, 0.2};
  const double t = d.tau / 3.0;
  const Eigen::VectorXcd brute = brute_force_evolution(h, alpha, beta, t, 30, 30);
  const Eigen::VectorXcd closed = joint_state_vector(joint_state(d, alpha, beta, t), 30, 30);
  CHECK(state_overlap(brute, closed) >= 1.0 - 1e-8);
}

TEST_CASE("brute-force oracle: t = tau/2 and tau, both diagonalisation routes") {
  const DerivedQuantities d = scaled(0.1, 0.5);
  const HamiltonianSpec h = HamiltonianSpec::from(d);
  for (double frac : {0.5, 1.0}) {
    CHECK(unitary_discrepancy(h, frac * d.tau, 30, 30) <= 1e-8);
  }
  // small dense problem: the two routes agree
  const cplx alpha{0.5, 0.1}, beta{0.5, 0.0};
  BruteForceOptions dense;
  dense.method = OracleMethod::DenseEigen;
  const Eigen::VectorXcd a = brute_force_evolution(h, alpha, beta, 1.3, 15, 25);
  const Eigen::VectorXcd b = brute_force_evolution(h, alpha, beta, 1.3, 15, 25, dense);
  CHECK((a - b).norm() < 1e-10);
}

TEST_CASE("brute-force oracle: free rotation without coupling") {
  HamiltonianSpec h{1.0, 0.0, 0.0};
  const cplx alpha{0.8, 0.0}, beta{1.0, 0.5};
  const double t = 0.9;
  const Eigen::VectorXcd brute = brute_force_evolution(h, alpha, beta, t, 20, 30);
  JointState expected;
  expected.n_max = 20;
  const auto c = coherent_amplitudes(alpha, 20);
  for (int n = 0; n <= 20; ++n) expected.branches.push_back({c[n], beta * std::polar(1.0, -t)});
  CHECK(state_overlap(brute, joint_state_vector(expected, 20, 30)) >= 1.0 - 1e-10);
}

TEST_CASE("brute-force oracle refuses oversized or under-truncated problems") {
  HamiltonianSpec h{1.0, 0.1, 0.5};
  try {
    brute_force_evolution(h, 1.0, 0.0, 1.0, 100, 100);
    FAIL("expected DimensionTooLarge");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DimensionTooLarge);
  }
  try {
    brute_force_evolution(h, 3.0, 0.0, 1.0, 10, 10);
    FAIL("expected TruncationInsufficient");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::TruncationInsufficient);
  }
}

TEST_CASE("phase-space loop") {
  const PhysicalParams p = RunConfig::default_physical_params();
  const DerivedQuantities d = derive_quantities(p);
  const MirrorScale scale = MirrorScale::from(p);
  const cplx beta{0.5, 0.3};

  const std::vector<double> ts = {0.0, d.tau / 2.0, d.tau};
  const auto pts = phase_space_trajectory(d, scale, beta, 30.0, ts);
  CHECK(pts[0].x == doctest::Approx(std::sqrt(2 * p.hbar / (p.m * p.omega)) * beta.real()).epsilon(1e-14));
  CHECK(pts[0].p == doctest::Approx(std::sqrt(2 * p.hbar * p.m * p.omega) * beta.imag()).epsilon(1e-14));
  const double back = std::hypot(pts[2].x - pts[0].x, pts[2].p - pts[0].p) / std::hypot(pts[0].x, pts[0].p);
  CHECK(back < 1e-12);

  // beta = 0, N_p = 0: x(tau/2) = 2 sqrt(2 hbar / m omega) S_tilde
  const auto half = phase_space_trajectory(d, scale, 0.0, 0.0, std::vector<double>{d.tau / 2.0});
  CHECK(rel_err(half[0].x, 2.0 * scale.position * d.S_tilde) < 1e-14);
  CHECK(std::abs(half[0].p) < 1e-12 * std::abs(half[0].x));
}

TEST_CASE("thermal density matrix") {
  const DerivedQuantities d = scaled(0.1, 0.5);
  const cplx alpha{std::sqrt(2.0), 0.0};

  SUBCASE("independent of the mirror temperature at tau") {
    const auto r0 = field_density_matrix_thermal(d, alpha, 0.0, d.tau);
    for (double nbar : {1.0, 10.0, 1000.0}) {
      const auto r = field_density_matrix_thermal(d, alpha, nbar, d.tau);
      CHECK((r.rho - r0.rho).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
  SUBCASE("pure at tau for a cold mirror") {
    const auto r = field_density_matrix_thermal(d, alpha, 0.0, d.tau);
    const FieldState f = field_state_at_period(d, alpha);
    for (int n = 0; n <= f.n_max; ++n)
      for (int m = 0; m <= f.n_max; ++m)
        CHECK(std::abs(r.rho(n, m) - f.amplitudes[n] * std::conj(f.amplitudes[m])) < 1e-14);
  }
  SUBCASE("damping ratio at tau/2") {
    const double t = d.tau / 2.0;
    const auto cold = field_density_matrix_thermal(d, alpha, 0.0, t);
    const auto warm = field_density_matrix_thermal(d, alpha, 1.0, t);
    const double k2 = d.k_tilde * d.k_tilde;
    const double expected = std::exp(-k2 * 2.0 * 3.0) / std::exp(-k2 * 2.0);
    CHECK(rel_err(std::abs(warm.rho(0, 1)) / std::abs(cold.rho(0, 1)), expected) < 1e-13);
  }
  SUBCASE("Hermitian with unit trace") {
    const auto r = field_density_matrix_thermal(d, alpha, 3.0, 0.4);
    CHECK((r.rho - r.rho.adjoint()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(std::abs(r.rho.trace().real() - 1.0) < 1e-12);
  }
}

TEST_CASE("mean field") {
  const cplx alpha{1.2, 0.3};
  SUBCASE("zero coupling") {
    const DerivedQuantities d = scaled(0.0, 0.5);
    CHECK(std::abs(std::abs(mean_field(d, alpha, 2.0, 0.8)) - std::abs(alpha)) < 1e-14);
  }
  SUBCASE("at tau equals the single-period value for any temperature") {
    const DerivedQuantities d = scaled(0.1, 0.5);
    const FieldState f = field_state_at_period(d, alpha);
    cplx a{0.0, 0.0};
    for (int n = 0; n < f.n_max; ++n) a += std::sqrt(n + 1.0) * f.amplitudes[n + 1] * std::conj(f.amplitudes[n]);
    for (double nbar : {0.0, 1.0, 10.0}) CHECK(std::abs(mean_field(d, alpha, nbar, d.tau) - a) < 1e-12);
  }
  SUBCASE("matches Tr(a rho)") {
    const DerivedQuantities d = scaled(0.1, 0.5);
    for (double nbar : {0.0, 0.5, 4.0})
      for (double t : {0.3, 1.7, 4.0}) {
        const auto r = field_density_matrix_thermal(d, alpha, nbar, t);
        cplx tr{0.0, 0.0};
        for (Eigen::Index n = 0; n + 1 < r.rho.rows(); ++n) tr += std::sqrt(double(n + 1)) * r.rho(n + 1, n);
        const cplx mf = mean_field(d, alpha, nbar, t);
        CHECK(std::abs(tr - mf) <= 1e-8 * std::abs(mf));
      }
  }
  SUBCASE("thermal average over coherent mirror states") {
    // the thermal mirror is a Gaussian mixture of coherent states with
    // variance nbar; Gauss-Hermite in both quadratures of beta
    const DerivedQuantities d = scaled(0.1, 0.5);
    const double nbar = 0.8, t = 2.1;
    constexpr int kNodes = 40;
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(kNodes, kNodes);
    for (int i = 1; i < kNodes; ++i) J(i, i - 1) = J(i - 1, i) = std::sqrt(i / 2.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    std::vector<double> x(kNodes), w(kNodes);
    for (int i = 0; i < kNodes; ++i) {
      x[i] = es.eigenvalues()(i);
      w[i] = std::pow(es.eigenvectors()(0, i), 2);  // weights of e^{-x^2}/sqrt(pi)
    }
    cplx avg{0.0, 0.0};
    const double sd = std::sqrt(nbar);
    for (int i = 0; i < kNodes; ++i)
      for (int j = 0; j < kNodes; ++j) {
        const cplx beta{sd * x[i], sd * x[j]};
        const Eigen::MatrixXcd rho = reduced_field_matrix(joint_state(d, alpha, beta, t));
        cplx tr{0.0, 0.0};
        for (Eigen::Index n = 0; n + 1 < rho.rows(); ++n) tr += std::sqrt(double(n + 1)) * rho(n + 1, n);
        avg += w[i] * w[j] * tr;
      }
    CHECK(std::abs(avg - mean_field(d, alpha, nbar, t)) < 1e-10);
  }
}

TEST_CASE("oracle input selection") {
  const HamiltonianSpec easy{1.0, 0.02, 0.0};
  const OracleInputs a = choose_oracle_inputs(easy, 30, 30);
  CHECK(std::abs(a.alpha) == doctest::Approx(2.0));
  CHECK(a.estimated_loss < 1e-10);
  const HamiltonianSpec hard{1.0, 0.3, 2.0};
  const OracleInputs b = choose_oracle_inputs(hard, 30, 30);
  CHECK(std::abs(b.alpha) < 2.0);
  CHECK(b.beta == cplx(2.0, 0.0));
  CHECK(b.estimated_loss < 1e-10);
}
