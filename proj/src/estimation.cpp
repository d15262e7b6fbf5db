#include "optograv/estimation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "optograv/error.hpp"
#include "optograv/fock.hpp"

namespace optograv {
namespace {

using constants::kPi;
using constants::kTwoPi;
using cplx = std::complex<double>;

constexpr double kLn10 = 2.302585092994046;
constexpr double kRescale = 1e150;

std::vector<double> gradients_for(const DerivedQuantities& d, int n_max) {
  std::vector<double> out(static_cast<std::size_t>(n_max) + 1);
  for (int n = 0; n <= n_max; ++n) out[n] = period_phase_gradient(d, n);
  return out;
}

bool close_enough(double a, double b, double rtol) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return std::abs(a - b) <= rtol * scale || scale == 0.0;
}

// <xi|n> for n in [lo, hi], recurring outward from n ~ |xi|^2 so no
// intermediate value overflows. Entries outside the window are not touched.
void coherent_bra(cplx xi, std::span<cplx> out, std::span<const double> sqrt_n, int lo, int hi) {
  const double r = std::abs(xi);
  if (r == 0.0) {
    std::fill(out.begin() + lo, out.begin() + hi + 1, cplx(0.0, 0.0));
    if (lo == 0) out[0] = 1.0;
    return;
  }
  const cplx xc = std::conj(xi);
  const int n0 = std::clamp(static_cast<int>(std::floor(r * r)), lo, hi);
  out[n0] = std::polar(std::exp(coherent_log_modulus(r, n0)), -n0 * std::arg(xi));
  for (int n = n0; n < hi; ++n) out[n + 1] = out[n] * xc / sqrt_n[n + 1];
  const cplx inv = 1.0 / xc;
  for (int n = n0; n > lo; --n) out[n - 1] = out[n] * sqrt_n[n] * inv;
}

void coherent_bra(cplx xi, std::span<cplx> out, std::span<const double> sqrt_n) {
  coherent_bra(xi, out, sqrt_n, 0, static_cast<int>(out.size()) - 1);
}

// levels carrying |c_n|^2 > 1e-40; everything outside is far below rounding
struct Window {
  int lo = 0;
  int hi = 0;
};

Window support(const FieldState& state) {
  Window w{0, state.n_max};
  while (w.lo < w.hi && std::norm(state.amplitudes[w.lo]) <= 1e-40) ++w.lo;
  while (w.hi > w.lo && std::norm(state.amplitudes[w.hi]) <= 1e-40) --w.hi;
  return w;
}

std::vector<double> sqrt_table(int n_max) {
  std::vector<double> s(static_cast<std::size_t>(n_max) + 2);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::sqrt(double(i));
  return s;
}

}  // namespace

QfiCoefficients exact_coefficients(const DerivedQuantities& d) {
  return {kTwoPi * d.dk2_dg, 2.0 * kTwoPi * d.dkS_dg};
}

QfiCoefficients approximate_coefficients(const DerivedQuantities& d) { return {d.A, d.B}; }

double qfi_closed_form(QfiCoefficients c, double n) {
  if (!(n >= 0.0)) throw Error(ErrorKind::InvalidArgument, "photon number must be >= 0");
  const double A = c.A;
  const double B = c.B;
  return 4.0 * (A * A * (4.0 * n * n * n + 6.0 * n * n + n) + B * B * n + 2.0 * A * B * (2.0 * n * n + n));
}

double qfi_from_state(const GravityModel& model, cplx alpha, double delta_g) {
  if (!(delta_g > 0.0)) throw Error(ErrorKind::InvalidArgument, "delta_g must be > 0");
  const double g0 = model.g();
  const int n_max = truncation_for(std::norm(alpha));
  const FieldState base = field_state_at_period(model.at(g0), alpha, n_max);

  std::vector<double> weight(base.amplitudes.size());
  double total = 0.0;
  for (std::size_t n = 0; n < weight.size(); ++n) total += weight[n] = std::norm(base.amplitudes[n]);
  for (double& w : weight) w /= total;

  // 1 - |<psi_g|psi_{g+dg}>| from the per-level phase shifts, arranged so the
  // small deficit is never formed by subtracting numbers close to one
  auto deficit = [&](double dg) {
    const FieldState moved = field_state_at_period(model.at(g0 + dg), alpha, n_max);
    std::vector<double> shift(weight.size(), 0.0);
    double mean = 0.0;
    for (std::size_t n = 0; n < weight.size(); ++n) {
      if (weight[n] == 0.0) continue;
      shift[n] = std::arg(std::conj(base.amplitudes[n]) * moved.amplitudes[n]);
    }
    // centre on a populated level so the wrap point sits far from the bulk
    const std::size_t ref = std::distance(weight.begin(), std::max_element(weight.begin(), weight.end()));
    const double origin = shift[ref];
    for (std::size_t n = 0; n < weight.size(); ++n) {
      shift[n] = std::remainder(shift[n] - origin, kTwoPi);
      mean += weight[n] * shift[n];
    }
    double one_minus_cos = 0.0;
    double sin_sum = 0.0;
    for (std::size_t n = 0; n < weight.size(); ++n) {
      const double x = shift[n] - mean;
      const double s = std::sin(0.5 * x);
      one_minus_cos += weight[n] * 2.0 * s * s;
      sin_sum += weight[n] * std::sin(x);
    }
    const double one_minus_f2 = one_minus_cos * (2.0 - one_minus_cos) - sin_sum * sin_sum;
    const double f = std::sqrt(std::max(0.0, 1.0 - one_minus_f2));
    return one_minus_f2 / (1.0 + f);
  };

  const double h = delta_g;
  const double d_small = deficit(0.5 * h) + deficit(-0.5 * h);
  if (d_small == 0.0) return 0.0;
  if (d_small < 100.0 * std::numeric_limits<double>::epsilon()) {
    std::ostringstream os;
    os << "overlap deficit " << d_small << " at delta_g/2 = " << 0.5 * h << " is below 100 eps";
    throw Error(ErrorKind::StepTooSmall, os.str());
  }
  const double d_large = deficit(h) + deficit(-h);
  const double q_large = 4.0 * d_large / (h * h);
  const double q_small = 4.0 * d_small / (0.25 * h * h);
  return (4.0 * q_small - q_large) / 3.0;
}

MeasurementScheme MeasurementScheme::homodyne(double phi) {
  if (!std::isfinite(phi)) throw Error(ErrorKind::InvalidArgument, "phi must be finite");
  double wrapped = std::fmod(phi, kTwoPi);
  if (wrapped < 0.0) wrapped += kTwoPi;
  if (wrapped >= kTwoPi) wrapped = 0.0;
  return {Kind::Homodyne, wrapped};
}

void hermite_functions(double x, std::span<double> out) {
  if (out.empty()) return;
  double log_scale = -0.5 * x * x - 0.25 * std::log(kPi);
  double factor = std::exp(log_scale);
  double prev = 0.0;
  double cur = 1.0;
  out[0] = factor;
  for (std::size_t n = 0; n + 1 < out.size(); ++n) {
    const double next = std::sqrt(2.0 / (n + 1.0)) * x * cur - std::sqrt(double(n) / (n + 1.0)) * prev;
    prev = cur;
    cur = next;
    if (std::abs(cur) > kRescale) {
      cur /= kRescale;
      prev /= kRescale;
      log_scale += 150.0 * kLn10;
      factor = std::exp(log_scale);
    }
    out[n + 1] = cur * factor;
  }
}

double homodyne_probability(double x, double phi, const FieldState& state) {
  std::vector<double> psi(state.amplitudes.size());
  hermite_functions(x, psi);
  cplx f = 0.0;
  for (std::size_t n = 0; n < psi.size(); ++n) f += state.amplitudes[n] * std::polar(psi[n], -double(n) * phi);
  return std::norm(f);
}

double heterodyne_probability(cplx xi, const FieldState& state) {
  std::vector<cplx> bra(state.amplitudes.size());
  coherent_bra(xi, bra, sqrt_table(state.n_max));
  cplx f = 0.0;
  for (std::size_t n = 0; n < bra.size(); ++n) f += state.amplitudes[n] * bra[n];
  return std::norm(f);
}

namespace {

// Homodyne integrand in the rotated basis: f = sum u_n psi_n, df = sum v_n psi_n.
class HomodyneIntegrand {
 public:
  HomodyneIntegrand(const FieldState& state, std::span<const double> phase_gradient, double phi,
                    const FisherOptions& options)
      : win_(support(state)), p_floor_(options.p_floor) {
    const std::size_t dim = state.amplitudes.size();
    u_.resize(dim);
    v_.resize(dim);
    for (std::size_t n = 0; n < dim; ++n) {
      u_[n] = state.amplitudes[n] * std::polar(1.0, -double(n) * phi);
      v_[n] = cplx(0.0, phase_gradient[n]) * u_[n];
    }
    const QuadratureRule ref = composite_gauss_legendre(-1.0, 1.0, 1);
    ref_nodes_ = ref.nodes;
    ref_weights_ = ref.weights;
  }

  // information, normalisation, excluded bound over one Gauss-Legendre panel
  std::array<double, 3> panel(double a, double b, std::vector<double>& psi) const {
    psi.resize(static_cast<std::size_t>(win_.hi) + 1);
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    double fi = 0.0, nm = 0.0, ex = 0.0;
    for (std::size_t i = 0; i < ref_nodes_.size(); ++i) {
      hermite_functions(mid + half * ref_nodes_[i], psi);
      cplx f = 0.0, df = 0.0;
      for (int n = win_.lo; n <= win_.hi; ++n) {
        f += u_[n] * psi[n];
        df += v_[n] * psi[n];
      }
      const double prob = std::norm(f);
      const double w = half * ref_weights_[i];
      nm += w * prob;
      if (prob < p_floor_) {
        ex += w * 4.0 * std::norm(df);
      } else {
        const double dp = 2.0 * std::real(std::conj(f) * df);
        fi += w * dp * dp / prob;
      }
    }
    return {fi, nm, ex};
  }

 private:
  Window win_;
  double p_floor_;
  std::vector<cplx> u_, v_;
  std::vector<double> ref_nodes_, ref_weights_;
};

FisherResult reduce_panels(const std::vector<std::array<double, 3>>& parts, std::size_t nodes) {
  std::vector<double> info(parts.size()), norm(parts.size()), excluded(parts.size());
  for (std::size_t i = 0; i < parts.size(); ++i) {
    info[i] = parts[i][0];
    norm[i] = parts[i][1];
    excluded[i] = parts[i][2];
  }
  return {pairwise_sum(info), pairwise_sum(norm), pairwise_sum(excluded), nodes};
}

template <class F>
void for_each_panel(Execution execution, int panels, F&& body) {
  if (execution == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (int p = 0; p < panels; ++p) body(p);
  } else {
    for (int p = 0; p < panels; ++p) body(p);
  }
}

}  // namespace

FisherResult homodyne_fisher_on_grid(const FieldState& state, std::span<const double> phase_gradient, double phi,
                                     double half_width, int panels, const FisherOptions& options) {
  const HomodyneIntegrand integrand(state, phase_gradient, phi, options);
  const double h = 2.0 * half_width / panels;
  std::vector<std::array<double, 3>> parts(panels);
  for_each_panel(options.execution, panels, [&](int p) {
    std::vector<double> psi;
    parts[p] = integrand.panel(-half_width + p * h, p + 1 == panels ? half_width : -half_width + (p + 1) * h, psi);
  });
  return reduce_panels(parts, static_cast<std::size_t>(panels) * kGaussOrder);
}

FisherResult homodyne_fisher(const DerivedQuantities& d, cplx alpha, double phi, const FisherOptions& options) {
  const FieldState state = field_state_at_period(d, alpha);
  const auto grad = gradients_for(d, state.n_max);
  const double half_width = std::sqrt(2.0) * std::abs(alpha) + 12.0;
  const int panels = std::max(16, static_cast<int>(std::ceil(2.0 * half_width / 1.5)));
  const FisherResult coarse = homodyne_fisher_on_grid(state, grad, phi, half_width, panels, options);

  // Near a zero of p the integrand stays bounded (dp^2/p <= 4|df|^2) but
  // varies on the scale of the zero's depth, so refine locally: bisect a
  // panel until its two halves agree with it to a share of the tolerance
  // proportional to its width.
  const HomodyneIntegrand integrand(state, grad, phi, options);
  const double total = 2.0 * half_width;
  const double tol_info = options.homodyne_rtol * coarse.information / total;
  const double tol_norm = options.homodyne_rtol * coarse.normalization / total;
  const double h = total / panels;
  std::vector<std::array<double, 3>> parts(panels);
  std::vector<std::size_t> evaluations(panels);
  std::vector<char> failed(panels, 0);
  for_each_panel(options.execution, panels, [&](int p) {
    std::vector<double> psi;
    std::array<double, 3> acc{0.0, 0.0, 0.0};
    std::size_t evals = 0;
    auto refine = [&](auto&& self, double a, double b, const std::array<double, 3>& whole, int depth) -> void {
      const double m = 0.5 * (a + b);
      const auto left = integrand.panel(a, m, psi);
      const auto right = integrand.panel(m, b, psi);
      evals += 2 * kGaussOrder;
      const double w = b - a;
      const bool ok = std::abs(left[0] + right[0] - whole[0]) <= tol_info * w &&
                      std::abs(left[1] + right[1] - whole[1]) <= tol_norm * w;
      if (ok || depth >= options.homodyne_max_depth) {
        if (!ok) failed[p] = 1;
        for (int k = 0; k < 3; ++k) acc[k] += left[k] + right[k];
        return;
      }
      self(self, a, m, left, depth + 1);
      self(self, m, b, right, depth + 1);
    };
    const double a = -half_width + p * h;
    const double b = p + 1 == panels ? half_width : a + h;
    const auto whole = integrand.panel(a, b, psi);
    evals += kGaussOrder;
    refine(refine, a, b, whole, 0);
    parts[p] = acc;
    evaluations[p] = evals;
  });
  if (std::any_of(failed.begin(), failed.end(), [](char f) { return f != 0; })) {
    throw Error(ErrorKind::QuadratureNotConverged, "homodyne Fisher information did not converge under bisection");
  }
  std::size_t nodes = 0;
  for (std::size_t e : evaluations) nodes += e;
  return reduce_panels(parts, nodes);
}

FisherResult heterodyne_fisher_on_grid(const FieldState& state, std::span<const double> phase_gradient, double r_lo,
                                       double r_hi, int radial_panels, int angular_points,
                                       const FisherOptions& options) {
  const std::size_t dim = state.amplitudes.size();
  std::vector<cplx> u(state.amplitudes);
  std::vector<cplx> v(dim);
  for (std::size_t n = 0; n < dim; ++n) v[n] = cplx(0.0, phase_gradient[n]) * u[n];
  const auto sqrt_n = sqrt_table(state.n_max);

  const QuadratureRule radial = composite_gauss_legendre(r_lo, r_hi, radial_panels);
  const int nr = static_cast<int>(radial.nodes.size());
  const double dtheta = kTwoPi / angular_points;
  const Window win = support(state);
  std::vector<double> info(nr), norm(nr), excluded(nr);

  auto ring_sum = [&](int i) {
    std::vector<cplx> bra(dim);
    const double r = radial.nodes[i];
    // (1/pi) d^2 xi = (1/pi) r dr dtheta
    const double w = radial.weights[i] * r * dtheta / kPi;
    double fi = 0.0, nm = 0.0, ex = 0.0;
    for (int j = 0; j < angular_points; ++j) {
      coherent_bra(std::polar(r, j * dtheta), bra, sqrt_n, win.lo, win.hi);
      cplx f = 0.0, df = 0.0;
      for (int n = win.lo; n <= win.hi; ++n) {
        f += u[n] * bra[n];
        df += v[n] * bra[n];
      }
      const double prob = std::norm(f);
      nm += prob;
      if (prob < options.p_floor) {
        ex += 4.0 * std::norm(df);
      } else {
        const double dp = 2.0 * std::real(std::conj(f) * df);
        fi += dp * dp / prob;
      }
    }
    info[i] = w * fi;
    norm[i] = w * nm;
    excluded[i] = w * ex;
  };

  if (options.execution == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (int i = 0; i < nr; ++i) ring_sum(i);
  } else {
    for (int i = 0; i < nr; ++i) ring_sum(i);
  }
  return {pairwise_sum(info), pairwise_sum(norm), pairwise_sum(excluded),
          static_cast<std::size_t>(nr) * angular_points};
}

FisherResult heterodyne_fisher(const DerivedQuantities& d, cplx alpha, const FisherOptions& options) {
  const FieldState state = field_state_at_period(d, alpha);
  const auto grad = gradients_for(d, state.n_max);
  const double r_lo = std::max(0.0, std::abs(alpha) - 12.0);
  const double r_hi = std::abs(alpha) + 12.0;
  int radial_panels = std::max(1, (options.radial_points + kGaussOrder - 1) / kGaussOrder);
  // the Husimi peak is ~1 wide; keep the arc spacing at the outer radius <= 0.5
  const int resolved = 64 * static_cast<int>(std::ceil(kTwoPi * r_hi / 0.5 / 64.0));
  int angular = std::max(options.angular_points, resolved);
  FisherResult prev = heterodyne_fisher_on_grid(state, grad, r_lo, r_hi, radial_panels, angular, options);
  for (int level = 0; level < options.heterodyne_max_refinements; ++level) {
    radial_panels *= 2;
    angular *= 2;
    FisherResult next = heterodyne_fisher_on_grid(state, grad, r_lo, r_hi, radial_panels, angular, options);
    if (close_enough(prev.information, next.information, options.heterodyne_rtol) &&
        close_enough(prev.normalization, next.normalization, options.heterodyne_rtol)) {
      return next;
    }
    prev = next;
  }
  throw Error(ErrorKind::QuadratureNotConverged, "heterodyne Fisher information did not converge under grid doubling");
}

double cramer_rao(double information, int runs) {
  if (runs < 1) throw Error(ErrorKind::InvalidArgument, "runs must be >= 1");
  if (!(information > 0.0)) throw Error(ErrorKind::ZeroInformation, "information must be > 0 for a finite bound");
  return 1.0 / (runs * information);
}

std::optional<double> EstimationReport::ratio_hom() const {
  if (!fi_hom) return std::nullopt;
  return *fi_hom / qfi;
}

std::optional<double> EstimationReport::ratio_het() const {
  if (!fi_het) return std::nullopt;
  return *fi_het / qfi;
}

EstimationReport snr_budget(const PhysicalParams& p, GravityMode mode, const SnrOptions& options) {
  if (!(options.periods_per_measurement > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "periods_per_measurement must be > 0");
  }
  const DerivedQuantities d = derive_quantities(p, mode);
  const double n = p.photon_number();
  EstimationReport r;
  r.params = p;
  r.mode = mode;
  r.phi = options.phi;
  r.qfi = qfi_closed_form(exact_coefficients(d), n);
  r.qfi_approx = qfi_closed_form(approximate_coefficients(d), n);
  r.crb = cramer_rao(r.qfi, p.runs);
  r.snr_bound = p.g * p.g * p.runs * r.qfi;
  r.rel_error = 1.0 / std::sqrt(r.snr_bound);
  r.cycle_rate_hz = d.omega_tilde / kTwoPi / options.periods_per_measurement;
  constexpr double kMicroGal = 1e-8;  // m/s^2
  const double per_shot = 1.0 / std::sqrt(r.qfi);
  r.sensitivity_ugal_rthz = per_shot / std::sqrt(r.cycle_rate_hz) / kMicroGal;
  if (options.homodyne) r.fi_hom = homodyne_fisher(d, p.alpha, options.phi, options.fisher).information;
  if (options.heterodyne) r.fi_het = heterodyne_fisher(d, p.alpha, options.fisher).information;
  return r;
}

const std::vector<PlatformRow>& literature_rows() {
  static const std::vector<PlatformRow> rows = {
      {"Atom Interferometry", "1.3e-9", "8", "achieved"},
      {"Superconducting gravimetry", "1e-12", "0.3", "achieved"},
      {"Falling corner cube", "2e-9", "15", "achieved"},
      {"Atom-Chip Fountain Gravimeter", "1.7e-7 (7.8e-10)", "(5.3)", "achieved (predicted)"},
  };
  return rows;
}

std::vector<PlatformRow> platform_table(const EstimationReport& report) {
  std::vector<PlatformRow> rows = literature_rows();
  char rel[32];
  char sens[32];
  std::snprintf(rel, sizeof rel, "%.2g", report.rel_error);
  std::snprintf(sens, sizeof sens, "%.2g", report.sensitivity_ugal_rthz);
  rows.push_back({"Optomechanics", rel, sens, "predicted"});
  return rows;
}

}  // namespace optograv
