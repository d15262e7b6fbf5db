#include "optograv/params.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "optograv/error.hpp"

namespace optograv {
namespace {

using constants::kPi;

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    std::ostringstream os;
    os << name << " must be finite and > 0 (got " << v << ")";
    throw Error(ErrorKind::NonPositiveInput, os.str());
  }
}

void require_finite(double v, const char* name) {
  if (!std::isfinite(v)) {
    throw Error(ErrorKind::NonPositiveInput, std::string(name) + " must be finite");
  }
}

}  // namespace

void validate(const PhysicalParams& p) {
  require_positive(p.m, "m");
  require_positive(p.omega, "omega");
  require_positive(p.omega_c, "omega_c");
  require_positive(p.L0, "L0");
  require_positive(p.R, "R");
  require_positive(p.hbar, "hbar");
  require_positive(p.G, "G");
  require_positive(p.M_earth, "M_earth");
  require_finite(p.g, "g");
  require_finite(p.alpha.real(), "alpha");
  require_finite(p.alpha.imag(), "alpha");
  if (!(p.nbar >= 0.0) || !std::isfinite(p.nbar)) {
    throw Error(ErrorKind::NonPositiveInput, "nbar must be >= 0");
  }
  if (p.runs < 1) throw Error(ErrorKind::NonPositiveInput, "runs must be >= 1");
  if (p.omega * p.omega <= 2.0 * p.g / p.R) {
    throw Error(ErrorKind::FrequencyImaginary, "omega^2 <= 2 g / R: modified mechanical frequency is not real");
  }
}

void validate(const ScaledParams& p) {
  require_positive(p.omega_tilde, "omega_tilde");
  require_finite(p.k_tilde, "k_tilde");
  require_finite(p.S_tilde, "S_tilde");
  require_finite(p.dk_tilde_dg, "dk_tilde_dg");
  require_finite(p.dS_tilde_dg, "dS_tilde_dg");
  require_finite(p.g, "g");
  require_finite(p.alpha.real(), "alpha");
  require_finite(p.alpha.imag(), "alpha");
  if (!(p.nbar >= 0.0) || !std::isfinite(p.nbar)) {
    throw Error(ErrorKind::NonPositiveInput, "nbar must be >= 0");
  }
  if (p.runs < 1) throw Error(ErrorKind::NonPositiveInput, "runs must be >= 1");
}

std::vector<std::string> warnings(const PhysicalParams& p) {
  std::vector<std::string> out;
  if (p.L0 / p.R > 1e-3) {
    std::ostringstream os;
    os << "L0/R = " << p.L0 / p.R << " exceeds 1e-3; the expansion of the potential in x/R is unreliable";
    out.push_back(os.str());
  }
  return out;
}

DerivedQuantities derive_quantities(const PhysicalParams& p, GravityMode mode) {
  validate(p);
  DerivedQuantities d;
  const double w = p.omega;
  const double w2 = w * w;
  const bool full = mode == GravityMode::Full;

  d.g0 = (p.omega_c / p.L0) * std::sqrt(p.hbar / (2.0 * p.m * w));

  // curvature of the potential and its g-derivative
  double dwt_dg = 0.0;
  if (full) {
    d.omega_tilde = w * std::sqrt(1.0 - 2.0 * p.g / (p.R * w2));
    dwt_dg = -1.0 / (p.R * d.omega_tilde);
  } else {
    d.omega_tilde = w;
  }

  // equilibrium length of the vertical cavity
  double dL_dg = 0.0;
  if (full) {
    const double gradient = 2.0 * p.G * p.M_earth / (w2 * p.R * p.R * p.R);
    dL_dg = (1.0 - gradient) / w2;
    d.L = p.L0 + p.g * dL_dg;
  } else {
    d.L = p.L0;
  }

  const double wt = d.omega_tilde;
  d.g_tilde0 = (p.omega_c / d.L) * std::sqrt(p.hbar / (2.0 * p.m * wt));
  d.k_tilde = d.g_tilde0 / wt;
  const double S = p.m * p.g * std::sqrt(1.0 / (2.0 * p.m * wt * p.hbar));
  d.S_tilde = S / wt;
  d.tau = constants::kTwoPi / wt;

  // k^2 = wc^2 hbar / (2 m L^2 wt^3), kS = wc g / (2 L wt^3), S^2 = g^2 m / (2 hbar wt^3)
  const double k2 = d.k_tilde * d.k_tilde;
  d.dk2_dg = k2 * (-2.0 * dL_dg / d.L - 3.0 * dwt_dg / wt);
  const double wt3 = wt * wt * wt;
  d.dkS_dg = p.omega_c / (2.0 * d.L * wt3) * (1.0 - p.g * dL_dg / d.L - 3.0 * p.g * dwt_dg / wt);
  d.dS2_dg = p.m / (2.0 * p.hbar) * (2.0 * p.g / wt3 - 3.0 * p.g * p.g * dwt_dg / (wt3 * wt));

  const double B0 = 2.0 * kPi * (d.g0 * p.m / w2) * std::sqrt(2.0 / (p.hbar * p.m * w));
  if (full) {
    d.A = -4.0 * kPi * d.g0 * d.g0 / (w2 * w2 * p.L0);
    d.B = B0 * (1.0 - 2.0 * p.g / (w2 * p.L0));
  } else {
    d.A = 0.0;
    d.B = B0;
  }
  return d;
}

DerivedQuantities derive_quantities(const ScaledParams& p) {
  validate(p);
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  DerivedQuantities d;
  d.omega_tilde = p.omega_tilde;
  d.L = nan;
  d.g0 = nan;
  d.g_tilde0 = nan;
  d.k_tilde = p.k_tilde;
  d.S_tilde = p.S_tilde;
  d.tau = constants::kTwoPi / p.omega_tilde;
  d.dk2_dg = 2.0 * p.k_tilde * p.dk_tilde_dg;
  d.dkS_dg = p.dk_tilde_dg * p.S_tilde + p.k_tilde * p.dS_tilde_dg;
  d.dS2_dg = 2.0 * p.S_tilde * p.dS_tilde_dg;
  d.A = 2.0 * kPi * d.dk2_dg;
  d.B = 4.0 * kPi * d.dkS_dg;
  return d;
}

GravityGradients gradient_quantities(const PhysicalParams& p, GravityMode mode) {
  const DerivedQuantities d = derive_quantities(p, mode);
  return {d.dk2_dg, d.dkS_dg, d.A, d.B};
}

double finite_difference_step(double g) { return std::max(1e-6 * std::abs(g), 1e-9); }

GravityModel::GravityModel(PhysicalParams p, GravityMode mode) : params_(p), mode_(mode) { validate(p); }

GravityModel::GravityModel(ScaledParams p) : params_(p) { validate(p); }

DerivedQuantities GravityModel::at(double g) const {
  if (const auto* s = std::get_if<ScaledParams>(&params_)) {
    ScaledParams shifted = *s;
    const double dg = g - s->g;
    shifted.k_tilde = s->k_tilde + s->dk_tilde_dg * dg;
    shifted.S_tilde = s->S_tilde + s->dS_tilde_dg * dg;
    shifted.g = g;
    return derive_quantities(shifted);
  }
  PhysicalParams p = std::get<PhysicalParams>(params_);
  p.g = g;
  return derive_quantities(p, mode_);
}

double GravityModel::g() const {
  return std::visit([](const auto& p) { return p.g; }, params_);
}

std::complex<double> GravityModel::alpha() const {
  return std::visit([](const auto& p) { return p.alpha; }, params_);
}

double GravityModel::nbar() const {
  return std::visit([](const auto& p) { return p.nbar; }, params_);
}

int GravityModel::runs() const {
  return std::visit([](const auto& p) { return p.runs; }, params_);
}

GravityModel GravityModel::with_alpha(std::complex<double> alpha) const {
  GravityModel out = *this;
  std::visit([alpha](auto& p) { p.alpha = alpha; }, out.params_);
  return out;
}

}  // namespace optograv
