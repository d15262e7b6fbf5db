#pragma once

#include <complex>
#include <string>
#include <variant>
#include <vector>

namespace optograv {

namespace constants {
inline constexpr double kHbar = 1.054571817e-34;  // J s
inline constexpr double kGravitational = 6.67430e-11;  // m^3 kg^-1 s^-2
inline constexpr double kEarthMass = 5.9722e24;  // kg
inline constexpr double kEarthRadius = 6.371e6;  // m
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;
}  // namespace constants

/// Raw experimental inputs, SI units throughout. Angular frequencies in rad/s.
struct PhysicalParams {
  double m = 1e-7;
  double omega = constants::kTwoPi * 1e7;
  double omega_c = 1e15;
  double L0 = 1e-4;
  double g = 9.81;
  double R = constants::kEarthRadius;
  std::complex<double> alpha{0.0, 0.0};
  double nbar = 0.0;
  int runs = 1;
  double hbar = constants::kHbar;
  double G = constants::kGravitational;
  double M_earth = constants::kEarthMass;

  double photon_number() const { return std::norm(alpha); }
};

/// Full gravity keeps the curvature term (finite R) and the equilibrium
/// shift of the cavity length. FirstOrder drops both: R -> infinity and
/// L = L0, so the coupling no longer depends on g.
enum class GravityMode { Full, FirstOrder };

/// Dimensionless description of the cavity bypassing SI inputs. k_tilde and
/// S_tilde vary linearly with g around the reference value `g`.
struct ScaledParams {
  double omega_tilde = 1.0;
  double k_tilde = 0.1;
  double S_tilde = 0.5;
  double dk_tilde_dg = 0.02;
  double dS_tilde_dg = 0.5;
  double g = 1.0;
  std::complex<double> alpha{1.4142135623730951, 0.0};
  double nbar = 0.0;
  int runs = 1;
};

struct DerivedQuantities {
  double omega_tilde = 0.0;
  double L = 0.0;  // NaN in the scaled regime
  double g0 = 0.0;  // NaN in the scaled regime
  double g_tilde0 = 0.0;  // NaN in the scaled regime
  double k_tilde = 0.0;
  double S_tilde = 0.0;
  double tau = 0.0;
  // exact derivatives with respect to g
  double dk2_dg = 0.0;
  double dkS_dg = 0.0;
  double dS2_dg = 0.0;
  // closed first-order approximations of 2 pi dk2_dg and 4 pi dkS_dg
  double A = 0.0;
  double B = 0.0;
};

struct GravityGradients {
  double dk2_dg = 0.0;
  double dkS_dg = 0.0;
  double A = 0.0;
  double B = 0.0;
};

/// Throws Error{NonPositiveInput} or Error{FrequencyImaginary}.
void validate(const PhysicalParams& p);
void validate(const ScaledParams& p);

/// Soft diagnostics that do not prevent construction (e.g. L0/R > 1e-3).
std::vector<std::string> warnings(const PhysicalParams& p);

DerivedQuantities derive_quantities(const PhysicalParams& p, GravityMode mode = GravityMode::Full);
DerivedQuantities derive_quantities(const ScaledParams& p);

GravityGradients gradient_quantities(const PhysicalParams& p, GravityMode mode = GravityMode::Full);

/// Central finite-difference step in g: max(1e-6 |g|, 1e-9).
double finite_difference_step(double g);

/// Either parameterisation, evaluable at any value of g. This is what the
/// likelihood and finite-difference code paths use to move g around while
/// keeping every other input fixed.
class GravityModel {
 public:
  GravityModel(PhysicalParams p, GravityMode mode);
  explicit GravityModel(ScaledParams p);

  DerivedQuantities at(double g) const;
  DerivedQuantities derived() const { return at(g()); }

  double g() const;
  std::complex<double> alpha() const;
  double nbar() const;
  int runs() const;
  bool is_scaled() const { return std::holds_alternative<ScaledParams>(params_); }

  GravityModel with_alpha(std::complex<double> alpha) const;

  const std::variant<PhysicalParams, ScaledParams>& params() const { return params_; }
  GravityMode mode() const { return mode_; }

 private:
  std::variant<PhysicalParams, ScaledParams> params_;
  GravityMode mode_ = GravityMode::Full;
};

}  // namespace optograv
