#pragma once

#include <complex>
#include <string>
#include <vector>

#include "json.hpp"
#include "optograv/dynamics.hpp"
#include "optograv/params.hpp"
#include "optograv/quadrature.hpp"

namespace optograv {

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;      // measured discrepancy
  double tolerance = 0.0;  // pass when value <= tolerance
  std::string detail;
};

struct VerifyOptions {
  /// Test hook: adds a spurious n^2 phase to the closed-form state before the
  /// unitary comparison, which must then fail.
  bool inject_fault = false;
  Execution execution = Execution::Parallel;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool all_passed() const;
};

/// Input amplitudes for comparing the closed form against the truncated
/// Hamiltonian. beta sits at the n = 0 equilibrium (S_tilde) so the vacuum
/// branch does not move; |alpha| is the largest candidate whose estimated
/// truncation loss stays below `target`.
struct OracleInputs {
  std::complex<double> alpha;
  std::complex<double> beta;
  double estimated_loss = 0.0;
};

OracleInputs choose_oracle_inputs(const HamiltonianSpec& h, int n_f, int n_m, double target = 1e-10);

/// 1 - |<closed form|brute force>| for one (h, t) point at truncations n_f, n_m.
double unitary_discrepancy(const HamiltonianSpec& h, double t, int n_f, int n_m, bool inject_fault = false,
                           OracleMethod method = OracleMethod::SectorEigen);

/// 4 Var(A n^2 + B n) under the Poisson law, summed term by term.
double qfi_poisson_sum(double A, double B, double n_photons);

VerifyReport run_verification(const ScaledParams& params, const VerifyOptions& options = {});

nlohmann::json to_json(const CheckResult& c);
nlohmann::json to_json(const VerifyReport& r);

}  // namespace optograv
