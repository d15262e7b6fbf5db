#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "optograv/dynamics.hpp"
#include "optograv/params.hpp"
#include "optograv/quadrature.hpp"

namespace optograv {

/// Coefficients of n^2 and n in the g-derivative of the period phase.
struct QfiCoefficients {
  double A = 0.0;
  double B = 0.0;
};

/// {2 pi dk2_dg, 4 pi dkS_dg}
QfiCoefficients exact_coefficients(const DerivedQuantities& d);
/// {A, B} as closed first-order approximations.
QfiCoefficients approximate_coefficients(const DerivedQuantities& d);

/// 4 Var_Poisson(A n^2 + B n) in closed form.
double qfi_closed_form(QfiCoefficients c, double n_photons);

/// Fidelity route: 8 (1 - |<psi_g|psi_{g+delta}>|) / delta^2, symmetrised in
/// +-delta and Richardson-extrapolated over delta and delta/2.
double qfi_from_state(const GravityModel& model, std::complex<double> alpha, double delta_g);

struct MeasurementScheme {
  enum class Kind { Homodyne, Heterodyne };
  Kind kind = Kind::Homodyne;
  double phi = 0.0;  // local-oscillator phase in [0, 2 pi), homodyne only

  static MeasurementScheme homodyne(double phi);
  static MeasurementScheme heterodyne() { return {Kind::Heterodyne, 0.0}; }
};

/// Normalised Hermite functions psi_0..psi_{out.size()-1} at x. Uses a
/// rescaled three-term recurrence; values below ~1e-300 flush to zero.
void hermite_functions(double x, std::span<double> out);

/// p(x|g) = |sum_n c_n e^{-i n phi} psi_n(x)|^2
double homodyne_probability(double x, double phi, const FieldState& state);

/// p(xi|g) = |<xi|psi>|^2; (1/pi) integral d^2 xi p = 1.
double heterodyne_probability(std::complex<double> xi, const FieldState& state);

struct FisherOptions {
  Execution execution = Execution::Parallel;
  double p_floor = 1e-30;
  // homodyne: composite Gauss-Legendre on |x| <= sqrt(2)|alpha| + 12, panels
  // bisected locally until they agree to homodyne_rtol
  double homodyne_rtol = 1e-10;
  int homodyne_max_depth = 30;
  // heterodyne: polar product grid, refined by doubling both directions
  int radial_points = 200;
  int angular_points = 256;  // minimum; raised so the outer arc spacing stays <= 0.5
  // Husimi zeros leave cone-shaped kinks in dp^2/p, so convergence under
  // doubling is algebraic rather than spectral
  double heterodyne_rtol = 1e-4;
  int heterodyne_max_refinements = 3;
};

struct FisherResult {
  double information = 0.0;
  double normalization = 0.0;   // integral of p over the grid
  double excluded_bound = 0.0;  // upper bound on the dropped p < p_floor part
  std::size_t nodes = 0;
};

FisherResult homodyne_fisher(const DerivedQuantities& d, std::complex<double> alpha, double phi,
                             const FisherOptions& options = {});
FisherResult heterodyne_fisher(const DerivedQuantities& d, std::complex<double> alpha,
                               const FisherOptions& options = {});

inline double homodyne_fi(const DerivedQuantities& d, std::complex<double> alpha, double phi) {
  return homodyne_fisher(d, alpha, phi).information;
}
inline double heterodyne_fi(const DerivedQuantities& d, std::complex<double> alpha) {
  return heterodyne_fisher(d, alpha).information;
}

/// Homodyne normalisation and Fisher information on a fixed grid, without
/// refinement. Exposed for the serial/parallel comparison and benchmarks.
FisherResult homodyne_fisher_on_grid(const FieldState& state, std::span<const double> phase_gradient, double phi,
                                     double half_width, int panels, const FisherOptions& options);
FisherResult heterodyne_fisher_on_grid(const FieldState& state, std::span<const double> phase_gradient,
                                       double r_lo, double r_hi, int radial_panels, int angular_points,
                                       const FisherOptions& options);

/// 1 / (runs * information)
double cramer_rao(double information, int runs);

struct SnrOptions {
  bool homodyne = false;
  bool heterodyne = false;
  double phi = constants::kPi / 2.0;
  /// Mechanical periods per measurement; one shot per period by default.
  double periods_per_measurement = 1.0;
  FisherOptions fisher;
};

struct EstimationReport {
  PhysicalParams params;
  GravityMode mode = GravityMode::Full;
  double qfi = 0.0;         // exact gradients
  double qfi_approx = 0.0;  // closed A, B
  std::optional<double> fi_hom;
  std::optional<double> fi_het;
  double phi = 0.0;
  double crb = 0.0;
  double snr_bound = 0.0;
  double rel_error = 0.0;
  double cycle_rate_hz = 0.0;
  double sensitivity_ugal_rthz = 0.0;

  std::optional<double> ratio_hom() const;
  std::optional<double> ratio_het() const;
};

EstimationReport snr_budget(const PhysicalParams& p, GravityMode mode = GravityMode::Full,
                            const SnrOptions& options = {});

struct PlatformRow {
  std::string platform;
  std::string rel_error;
  std::string ugal_rthz;
  std::string status;
};

/// Cited literature values, stored verbatim.
const std::vector<PlatformRow>& literature_rows();

/// Literature rows followed by the computed optomechanics row.
std::vector<PlatformRow> platform_table(const EstimationReport& report);

}  // namespace optograv
