#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "optograv/params.hpp"

namespace testing_support {

inline double rel_err(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

using hp = boost::multiprecision::cpp_bin_float_50;

// Cavity quantities straight from their definitions, at 50 digits. Shares no
// code with the library.
struct HpCavity {
  hp omega_tilde, L, g_tilde0, k, S;
};

inline HpCavity hp_cavity(const optograv::PhysicalParams& p, const hp& g, bool first_order = false) {
  const hp m = p.m, w = p.omega, wc = p.omega_c, L0 = p.L0, hbar = p.hbar;
  const hp R = p.R, G = p.G, M = p.M_earth;
  HpCavity c;
  c.omega_tilde = first_order ? w : hp(sqrt(w * w - 2 * g / R));
  c.L = first_order ? L0 : hp(L0 + (g / (w * w)) * (1 - 2 * G * M / (w * w * R * R * R)));
  c.g_tilde0 = (wc / c.L) * sqrt(hbar / (2 * m * c.omega_tilde));
  c.k = c.g_tilde0 / c.omega_tilde;
  c.S = m * g * sqrt(1 / (2 * m * c.omega_tilde * hbar)) / c.omega_tilde;
  return c;
}

template <class F>
double hp_derivative(F f, double g, double h) {
  const hp gg = g, hh = h;
  return static_cast<double>((f(gg + hh) - f(gg - hh)) / (2 * hh));
}

// Fixed-seed generator for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : eng_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
  double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng_); }

 private:
  std::mt19937_64 eng_;
};

// SI parameters where the g-dependence of omega_tilde and L is resolvable in
// double precision.
inline optograv::PhysicalParams resolvable_params(Gen& gen) {
  optograv::PhysicalParams p;
  p.m = gen.log_uniform(1e-3, 1.0);
  p.omega = gen.log_uniform(3e-3, 10.0);
  p.omega_c = gen.log_uniform(1e3, 1e6);
  p.L0 = gen.log_uniform(1e-3, 1.0);
  p.g = gen.uniform(1.0, 15.0);
  p.alpha = {gen.uniform(0.5, 3.0), 0.0};
  return p;
}

}  // namespace testing_support
