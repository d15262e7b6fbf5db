#include "optograv/dynamics.hpp"

#include <cmath>
#include <sstream>

#include "optograv/error.hpp"

namespace optograv {
namespace {

using constants::kTwoPi;
using cplx = std::complex<double>;

double frac(double v) { return v - std::floor(v); }

// 1 - cos(x) without cancellation near multiples of 2 pi
double one_minus_cos(double x) {
  const double s = std::sin(0.5 * x);
  return 2.0 * s * s;
}

void check_deficit(double deficit, const char* what) {
  if (deficit > kTruncationTolerance) {
    std::ostringstream os;
    os << what << ": norm deficit " << deficit << " exceeds " << kTruncationTolerance;
    throw Error(ErrorKind::TruncationInsufficient, os.str());
  }
}

}  // namespace

MirrorScale MirrorScale::from(const PhysicalParams& p) {
  return {std::sqrt(2.0 * p.hbar / (p.m * p.omega)), std::sqrt(2.0 * p.hbar * p.m * p.omega)};
}

double period_phase(const DerivedQuantities& d, int n) {
  const double k = d.k_tilde;
  const double s = d.S_tilde;
  // products split with fma so the fractional turns keep full precision even
  // when S^2 or 2 k S n run to ~1e11
  auto frac_product = [](double a, double b) {
    const double p = a * b;
    return frac(p) + std::fma(a, b, -p);
  };
  const double ks = k * s;
  const double ks_err = std::fma(k, s, -ks);
  const double kk = k * k;
  const double kk_err = std::fma(k, k, -kk);
  const double nn = double(n) * n;
  const double turns = frac_product(s, s) + frac_product(2.0 * n, ks) + 2.0 * n * ks_err + frac_product(kk, nn) +
                       kk_err * nn;
  return kTwoPi * frac(turns);
}

double period_phase_gradient(const DerivedQuantities& d, int n) {
  return kTwoPi * (double(n) * n * d.dk2_dg + 2.0 * n * d.dkS_dg);
}

JointState joint_state(const DerivedQuantities& d, cplx alpha, cplx beta, double t) {
  if (!(t >= 0.0)) throw Error(ErrorKind::InvalidArgument, "time must be >= 0");
  const double n_p = std::norm(alpha);
  JointState s;
  s.n_max = truncation_for(n_p);
  s.norm_deficit = poisson_tail(n_p, s.n_max);
  check_deficit(s.norm_deficit, "joint_state");
  s.time = t;

  const double wt = d.omega_tilde * t;
  const double sin_wt = std::sin(wt);
  const double loop = wt - sin_wt;
  const double drive = beta.real() * sin_wt + beta.imag() * one_minus_cos(wt);
  const cplx rot = std::polar(1.0, -wt);
  const cplx eta = cplx(one_minus_cos(wt), sin_wt);  // 1 - e^{-i wt}

  const auto coh = coherent_amplitudes(alpha, s.n_max);
  s.branches.resize(coh.size());
  for (int n = 0; n <= s.n_max; ++n) {
    const double lambda = d.k_tilde * n + d.S_tilde;
    s.branches[n].coefficient = coh[n] * std::polar(1.0, lambda * lambda * loop + lambda * drive);
    s.branches[n].gamma = beta * rot + lambda * eta;
  }
  return s;
}

FieldState field_state_at_period(const DerivedQuantities& d, cplx alpha, int n_max) {
  FieldState f;
  f.n_max = n_max;
  f.norm_deficit = poisson_tail(std::norm(alpha), n_max);
  f.amplitudes = coherent_amplitudes(alpha, n_max);
  for (int n = 0; n <= n_max; ++n) f.amplitudes[n] *= std::polar(1.0, period_phase(d, n));
  return f;
}

FieldState field_state_at_period(const DerivedQuantities& d, cplx alpha) {
  const int n_max = truncation_for(std::norm(alpha));
  FieldState f = field_state_at_period(d, alpha, n_max);
  check_deficit(f.norm_deficit, "field_state_at_period");
  return f;
}

std::vector<PhaseSpacePoint> phase_space_trajectory(const DerivedQuantities& d, const MirrorScale& scale, cplx beta,
                                                    double n_photons, std::span<const double> t_grid) {
  if (!(n_photons >= 0.0)) throw Error(ErrorKind::InvalidArgument, "photon number must be >= 0");
  const double lambda = d.k_tilde * n_photons + d.S_tilde;
  std::vector<PhaseSpacePoint> out;
  out.reserve(t_grid.size());
  for (double t : t_grid) {
    const double wt = d.omega_tilde * t;
    const double c = std::cos(wt);
    const double s = std::sin(wt);
    const double re = beta.real() * c + beta.imag() * s + lambda * one_minus_cos(wt);
    const double im = beta.imag() * c - beta.real() * s + lambda * s;
    out.push_back({scale.position * re, scale.momentum * im});
  }
  return out;
}

FieldDensityMatrix field_density_matrix_thermal(const DerivedQuantities& d, cplx alpha, double nbar, double t) {
  if (!(nbar >= 0.0)) throw Error(ErrorKind::InvalidArgument, "nbar must be >= 0");
  if (!(t >= 0.0)) throw Error(ErrorKind::InvalidArgument, "time must be >= 0");
  const double n_p = std::norm(alpha);
  const int n_max = truncation_for(n_p);
  FieldDensityMatrix out;
  out.nbar = nbar;
  out.time = t;
  out.trace_deficit = poisson_tail(n_p, n_max);
  check_deficit(out.trace_deficit, "field_density_matrix_thermal");

  const double wt = d.omega_tilde * t;
  const double loop = wt - std::sin(wt);
  const double damping = d.k_tilde * d.k_tilde * one_minus_cos(wt) * (2.0 * nbar + 1.0);
  const double k = d.k_tilde;
  const double s = d.S_tilde;

  // rho_nm = c_n conj(c_m) exp(-damping (n - m)^2); the S^2 phase cancels
  const auto coh = coherent_amplitudes(alpha, n_max);
  std::vector<cplx> c(coh.size());
  for (int n = 0; n <= n_max; ++n) {
    c[n] = coh[n] * std::polar(1.0, (k * k * double(n) * n + 2.0 * k * s * n) * loop);
  }
  out.rho.resize(n_max + 1, n_max + 1);
  for (int n = 0; n <= n_max; ++n) {
    out.rho(n, n) = std::norm(c[n]);
    for (int m = 0; m < n; ++m) {
      const double diff = n - m;
      const cplx v = c[n] * std::conj(c[m]) * std::exp(-damping * diff * diff);
      out.rho(n, m) = v;
      out.rho(m, n) = std::conj(v);
    }
  }
  return out;
}

Eigen::MatrixXcd reduced_field_matrix(const JointState& s) {
  const int dim = s.n_max + 1;
  Eigen::MatrixXcd rho(dim, dim);
  for (int n = 0; n < dim; ++n) {
    const auto& bn = s.branches[n];
    for (int m = 0; m < dim; ++m) {
      const auto& bm = s.branches[m];
      // <gamma_m|gamma_n>
      const cplx ov = std::exp(-0.5 * std::norm(bm.gamma) - 0.5 * std::norm(bn.gamma) + std::conj(bm.gamma) * bn.gamma);
      rho(n, m) = bn.coefficient * std::conj(bm.coefficient) * ov;
    }
  }
  return rho;
}

cplx mean_field(const DerivedQuantities& d, cplx alpha, double nbar, double t) {
  const double n_p = std::norm(alpha);
  const double wt = d.omega_tilde * t;
  const double loop = wt - std::sin(wt);
  const double k2 = d.k_tilde * d.k_tilde;
  const double kerr = 2.0 * k2 * loop;
  const double visibility =
      -k2 * one_minus_cos(wt) * (2.0 * nbar + 1.0) - n_p * one_minus_cos(kerr);
  const double phase = (2.0 * d.k_tilde * d.S_tilde + k2) * loop + n_p * std::sin(kerr);
  return alpha * std::exp(visibility) * std::polar(1.0, phase);
}

Eigen::MatrixXd build_hamiltonian(const HamiltonianSpec& h, int n_f, int n_m) {
  const int mdim = n_m + 1;
  const int dim = (n_f + 1) * mdim;
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(dim, dim);
  for (int n = 0; n <= n_f; ++n) {
    const double drive = -h.omega_tilde * (h.k_tilde * n + h.S_tilde);
    const int base = n * mdim;
    for (int j = 0; j <= n_m; ++j) {
      H(base + j, base + j) = h.omega_tilde * j;
      if (j < n_m) {
        // <j+1| b' + b |j> = sqrt(j+1)
        const double v = drive * std::sqrt(j + 1.0);
        H(base + j + 1, base + j) = v;
        H(base + j, base + j + 1) = v;
      }
    }
  }
  return H;
}

Eigen::VectorXcd brute_force_evolution(const HamiltonianSpec& h, cplx alpha, cplx beta, double t, int n_f, int n_m,
                                       const BruteForceOptions& options) {
  if (n_f < 0 || n_m < 0) throw Error(ErrorKind::InvalidArgument, "truncations must be >= 0");
  const long dim = long(n_f + 1) * long(n_m + 1);
  if (dim > options.max_dimension) {
    std::ostringstream os;
    os << "product dimension " << dim << " exceeds cap " << options.max_dimension;
    throw Error(ErrorKind::DimensionTooLarge, os.str());
  }
  const double tail_f = poisson_tail(std::norm(alpha), n_f);
  const double tail_m = poisson_tail(std::norm(beta), n_m);
  if (tail_f > options.tail_tolerance || tail_m > options.tail_tolerance) {
    std::ostringstream os;
    os << "input coherent tails " << tail_f << ", " << tail_m << " exceed " << options.tail_tolerance;
    throw Error(ErrorKind::TruncationInsufficient, os.str());
  }

  const auto cf = coherent_amplitudes(alpha, n_f);
  const auto cm = coherent_amplitudes(beta, n_m);
  const int mdim = n_m + 1;
  Eigen::VectorXcd psi0(dim);
  for (int n = 0; n <= n_f; ++n)
    for (int j = 0; j <= n_m; ++j) psi0(n * mdim + j) = cf[n] * cm[j];

  const Eigen::MatrixXd H = build_hamiltonian(h, n_f, n_m);
  auto evolve = [t](const Eigen::MatrixXd& block, const Eigen::VectorXcd& in) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(block);
    const Eigen::MatrixXd& V = es.eigenvectors();
    Eigen::VectorXcd coeff = V.transpose().cast<cplx>() * in;
    for (Eigen::Index i = 0; i < coeff.size(); ++i) coeff(i) *= std::polar(1.0, -es.eigenvalues()(i) * t);
    return Eigen::VectorXcd(V.cast<cplx>() * coeff);
  };

  if (options.method == OracleMethod::DenseEigen) return evolve(H, psi0);

  Eigen::VectorXcd out(dim);
  for (int n = 0; n <= n_f; ++n) {
    const int base = n * mdim;
    out.segment(base, mdim) = evolve(H.block(base, base, mdim, mdim), psi0.segment(base, mdim));
  }
  return out;
}

Eigen::VectorXcd joint_state_vector(const JointState& s, int n_f, int n_m) {
  const int mdim = n_m + 1;
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(long(n_f + 1) * mdim);
  for (int n = 0; n <= std::min(n_f, s.n_max); ++n) {
    const auto mirror = coherent_amplitudes(s.branches[n].gamma, n_m);
    for (int j = 0; j <= n_m; ++j) v(n * mdim + j) = s.branches[n].coefficient * mirror[j];
  }
  return v;
}

double state_overlap(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) { return std::abs(a.dot(b)); }

}  // namespace optograv
