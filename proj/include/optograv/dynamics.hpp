#pragma once

#include <Eigen/Dense>
#include <complex>
#include <span>
#include <vector>

#include "optograv/fock.hpp"
#include "optograv/params.hpp"

namespace optograv {

/// Cavity field after one mechanical period, in the Fock basis. The global
/// phase 2 pi S_tilde^2 is kept in the amplitudes.
struct FieldState {
  std::vector<std::complex<double>> amplitudes;
  int n_max = 0;
  double norm_deficit = 0.0;
};

struct MirrorBranch {
  std::complex<double> coefficient;  // field amplitude of |n>
  std::complex<double> gamma;        // mirror coherent amplitude conditioned on n
};

/// sum_n coefficient_n |n> (x) |gamma_n>
struct JointState {
  std::vector<MirrorBranch> branches;
  int n_max = 0;
  double time = 0.0;
  double norm_deficit = 0.0;
};

struct FieldDensityMatrix {
  Eigen::MatrixXcd rho;
  double nbar = 0.0;
  double time = 0.0;
  double trace_deficit = 0.0;
};

struct PhaseSpacePoint {
  double x = 0.0;
  double p = 0.0;
};

/// Prefactors converting mirror coherent amplitudes into position and
/// momentum: <x> = position Re(gamma), <p> = momentum Im(gamma).
struct MirrorScale {
  double position = 1.4142135623730951;
  double momentum = 1.4142135623730951;

  /// sqrt(2 hbar / m omega) and sqrt(2 hbar m omega), bare omega.
  static MirrorScale from(const PhysicalParams& p);
};

/// Phase of |n> after one period: 2 pi (k n + S)^2, reduced modulo 2 pi.
double period_phase(const DerivedQuantities& d, int n);

/// d(period_phase)/dg without the n-independent part, which only moves the
/// global phase and drops out of every probability.
double period_phase_gradient(const DerivedQuantities& d, int n);

JointState joint_state(const DerivedQuantities& d, std::complex<double> alpha, std::complex<double> beta, double t);

FieldState field_state_at_period(const DerivedQuantities& d, std::complex<double> alpha);

/// Same as above with an explicit cutoff, skipping the tail check.
FieldState field_state_at_period(const DerivedQuantities& d, std::complex<double> alpha, int n_max);

std::vector<PhaseSpacePoint> phase_space_trajectory(const DerivedQuantities& d, const MirrorScale& scale,
                                                    std::complex<double> beta, double n_photons,
                                                    std::span<const double> t_grid);

FieldDensityMatrix field_density_matrix_thermal(const DerivedQuantities& d, std::complex<double> alpha, double nbar,
                                                double t);

/// Tr_mirror |Psi><Psi| for a coherent mirror input.
Eigen::MatrixXcd reduced_field_matrix(const JointState& s);

/// <a> for a thermal mirror; at t = tau it no longer depends on nbar.
std::complex<double> mean_field(const DerivedQuantities& d, std::complex<double> alpha, double nbar, double t);

// --- brute-force oracle -----------------------------------------------------

struct HamiltonianSpec {
  double omega_tilde = 1.0;
  double k_tilde = 0.0;
  double S_tilde = 0.0;

  static HamiltonianSpec from(const DerivedQuantities& d) { return {d.omega_tilde, d.k_tilde, d.S_tilde}; }
};

enum class OracleMethod {
  /// Diagonalise each photon-number sector separately (H commutes with n).
  SectorEigen,
  /// Diagonalise the whole product-space matrix at once.
  DenseEigen,
};

struct BruteForceOptions {
  int max_dimension = 4096;
  double tail_tolerance = kTruncationTolerance;
  OracleMethod method = OracleMethod::SectorEigen;
};

/// Rotating-frame Hamiltonian w b'b - w (k n + S)(b' + b) on the truncated
/// product basis, index n * (n_m + 1) + j.
Eigen::MatrixXd build_hamiltonian(const HamiltonianSpec& h, int n_f, int n_m);

/// exp(-i H t) |alpha, beta> by numerical diagonalisation.
Eigen::VectorXcd brute_force_evolution(const HamiltonianSpec& h, std::complex<double> alpha,
                                       std::complex<double> beta, double t, int n_f, int n_m,
                                       const BruteForceOptions& options = {});

/// Project the closed-form joint state onto the same truncated basis.
Eigen::VectorXcd joint_state_vector(const JointState& s, int n_f, int n_m);

/// |<a|b>|
double state_overlap(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b);

}  // namespace optograv
