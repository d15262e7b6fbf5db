#include "optograv/inference.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <sstream>

#include "optograv/error.hpp"
#include "optograv/fock.hpp"

namespace optograv {
namespace {

using cplx = std::complex<double>;

// 3-point Gauss-Legendre on [a, b]
template <class F>
double gauss3(F&& f, double a, double b) {
  static const double x = std::sqrt(0.6);
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  return half * (5.0 / 9.0 * f(mid - half * x) + 8.0 / 9.0 * f(mid) + 5.0 / 9.0 * f(mid + half * x));
}

double trapezoid(const std::vector<double>& y, double h) {
  std::vector<double> terms(y);
  terms.front() *= 0.5;
  terms.back() *= 0.5;
  return h * pairwise_sum(terms);
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t replica_seed(std::uint64_t master, std::uint64_t index) { return splitmix64(master ^ splitmix64(index + 1)); }

HomodyneSampler::HomodyneSampler(const FieldState& state, double phi, const SamplerOptions& options) {
  const std::size_t dim = state.amplitudes.size();
  std::vector<cplx> u(dim);
  double mean_photons = 0.0;
  for (std::size_t n = 0; n < dim; ++n) {
    u[n] = state.amplitudes[n] * std::polar(1.0, -double(n) * phi);
    mean_photons += n * std::norm(state.amplitudes[n]);
  }
  auto density = [&u, dim](double x) {
    std::vector<double> psi(dim);
    hermite_functions(x, psi);
    cplx f = 0.0;
    for (std::size_t n = 0; n < dim; ++n) f += u[n] * psi[n];
    return std::norm(f);
  };

  const double half_width = std::sqrt(2.0 * mean_photons) + 12.0;
  lo_ = -half_width;
  int cells = options.initial_cells;
  for (int level = 0; level <= options.max_refinements; ++level, cells *= 2) {
    width_ = 2.0 * half_width / cells;
    std::vector<double> cdf(cells + 1, 0.0);
    double worst = 0.0;
    for (int i = 0; i < cells; ++i) {
      const double a = lo_ + i * width_;
      const double b = a + width_;
      const double mass = gauss3(density, a, b);
      const double left = gauss3(density, a, 0.5 * (a + b));
      worst = std::max(worst, std::abs(left - 0.5 * mass));
      cdf[i + 1] = cdf[i] + mass;
    }
    if (worst < options.cdf_tolerance) {
      cdf_ = std::move(cdf);
      interpolation_error_ = worst;
      return;
    }
  }
  throw Error(ErrorKind::GridResolutionInsufficient, "CDF interpolation error above tolerance at finest sampling grid");
}

std::vector<double> HomodyneSampler::draw(int m, std::uint64_t seed) const {
  if (m < 1) throw Error(ErrorKind::InvalidArgument, "m_samples must be >= 1");
  Rng rng(seed);
  std::vector<double> out(m);
  const double total = cdf_.back();
  for (int k = 0; k < m; ++k) {
    const double target = rng.uniform() * total;
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), target);
    const std::size_t i = std::min<std::size_t>(std::max<std::ptrdiff_t>(it - cdf_.begin() - 1, 0), cells() - 1);
    const double mass = cdf_[i + 1] - cdf_[i];
    const double frac = mass > 0.0 ? (target - cdf_[i]) / mass : 0.5;
    out[k] = lo_ + (i + std::clamp(frac, 0.0, 1.0)) * width_;
  }
  return out;
}

SampleBatch sample_homodyne(const FieldState& state, double phi, int m_samples, std::uint64_t seed, double true_g,
                            const SamplerOptions& options) {
  if (m_samples < 1) throw Error(ErrorKind::InvalidArgument, "m_samples must be >= 1");
  const auto scheme = MeasurementScheme::homodyne(phi);
  HomodyneSampler sampler(state, scheme.phi, options);
  return {sampler.draw(m_samples, seed), scheme, true_g, seed};
}

SearchInterval SearchInterval::around(double center, double relative) {
  const double half = std::abs(center) * relative;
  return {center - half, center + half};
}

HomodyneLikelihood::HomodyneLikelihood(const SampleBatch& batch, GravityModel model, cplx alpha)
    : model_(std::move(model)), alpha_(alpha), phi_(batch.scheme.phi) {
  if (batch.outcomes.empty()) throw Error(ErrorKind::InvalidArgument, "empty sample batch");
  n_max_ = truncation_for(std::norm(alpha));
  const Eigen::Index dim = n_max_ + 1;
  psi_.resize(static_cast<Eigen::Index>(batch.outcomes.size()), dim);
  std::vector<double> row(dim);
  for (std::size_t i = 0; i < batch.outcomes.size(); ++i) {
    hermite_functions(batch.outcomes[i], row);
    for (Eigen::Index n = 0; n < dim; ++n) psi_(static_cast<Eigen::Index>(i), n) = row[n];
  }
}

double HomodyneLikelihood::operator()(double g) const {
  const FieldState s = field_state_at_period(model_.at(g), alpha_, n_max_);
  Eigen::VectorXd re(n_max_ + 1), im(n_max_ + 1);
  for (int n = 0; n <= n_max_; ++n) {
    const cplx u = s.amplitudes[n] * std::polar(1.0, -double(n) * phi_);
    re(n) = u.real();
    im(n) = u.imag();
  }
  const Eigen::VectorXd fr = psi_ * re;
  const Eigen::VectorXd fi = psi_ * im;
  std::vector<double> logs(static_cast<std::size_t>(fr.size()));
  for (Eigen::Index i = 0; i < fr.size(); ++i) {
    const double p = fr(i) * fr(i) + fi(i) * fi(i);
    logs[i] = std::log(std::max(p, std::numeric_limits<double>::min()));
  }
  return pairwise_sum(logs);
}

EstimateResult max_likelihood(const SampleBatch& batch, const GravityModel& model, cplx alpha, SearchInterval search,
                              const MleOptions& options) {
  if (!(search.hi > search.lo)) throw Error(ErrorKind::InvalidArgument, "empty search interval");
  if (options.coarse_points < 3) throw Error(ErrorKind::InvalidArgument, "coarse_points must be >= 3");
  const HomodyneLikelihood loglik(batch, model, alpha);

  EstimateResult out;
  out.method = EstimatorMethod::MaxLik;
  const int n = options.coarse_points;
  const double step = (search.hi - search.lo) / (n - 1);
  std::size_t best = 0;
  double lmin = std::numeric_limits<double>::infinity();
  double lmax = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double g = search.lo + i * step;
    const double l = loglik(g);
    out.log_likelihood_curve.emplace_back(g, l);
    if (l > lmax) {
      lmax = l;
      best = i;
    }
    lmin = std::min(lmin, l);
  }
  if (lmax - lmin < 1e-9) throw Error(ErrorKind::FlatLikelihood, "log-likelihood range below 1e-9 over the interval");
  if (best == 0 || best == static_cast<std::size_t>(n - 1)) {
    std::ostringstream os;
    os << "maximum of the coarse likelihood at interval edge g = " << out.log_likelihood_curve[best].first;
    throw Error(ErrorKind::MaximumOnBoundary, os.str());
  }

  // golden-section refinement between the neighbours of the coarse maximum
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = out.log_likelihood_curve[best - 1].first;
  double b = out.log_likelihood_curve[best + 1].first;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = loglik(c);
  double fd = loglik(d);
  const double stop = options.tolerance * (search.hi - search.lo);
  while (b - a > stop) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = loglik(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = loglik(d);
    }
  }
  out.g_hat = 0.5 * (a + b);

  const double h = 0.25 * step;
  const double curvature = (loglik(out.g_hat + h) - 2.0 * loglik(out.g_hat) + loglik(out.g_hat - h)) / (h * h);
  if (!(curvature < 0.0)) throw Error(ErrorKind::FlatLikelihood, "non-negative curvature at the maximum");
  out.variance = -1.0 / curvature;
  return out;
}

EstimateResult bayes_posterior(const SampleBatch& batch, const GravityModel& model, cplx alpha, SearchInterval prior,
                               int grid_n) {
  if (grid_n < 64) throw Error(ErrorKind::InvalidArgument, "grid_n must be >= 64");
  if (!(prior.hi > prior.lo)) throw Error(ErrorKind::InvalidArgument, "empty prior interval");
  const HomodyneLikelihood loglik(batch, model, alpha);

  EstimateResult out;
  out.method = EstimatorMethod::Bayes;
  const double h = (prior.hi - prior.lo) / (grid_n - 1);
  std::vector<double> g(grid_n), lp(grid_n);
  for (int i = 0; i < grid_n; ++i) {
    g[i] = prior.lo + i * h;
    lp[i] = loglik(g[i]);
    out.log_likelihood_curve.emplace_back(g[i], lp[i]);
  }
  // log-sum-exp normalisation: shift by the maximum before exponentiating
  const double top = *std::max_element(lp.begin(), lp.end());
  std::vector<double> w(grid_n);
  for (int i = 0; i < grid_n; ++i) w[i] = std::exp(lp[i] - top);
  const double z = trapezoid(w, h);
  for (double& v : w) v /= z;

  std::vector<double> moment(grid_n);
  for (int i = 0; i < grid_n; ++i) moment[i] = g[i] * w[i];
  out.g_hat = trapezoid(moment, h);
  for (int i = 0; i < grid_n; ++i) moment[i] = (g[i] - out.g_hat) * (g[i] - out.g_hat) * w[i];
  out.variance = trapezoid(moment, h);
  out.posterior = std::move(w);
  return out;
}

StudySummary crb_saturation_study(const GravityModel& model, cplx alpha, double phi, int m_samples, int replicas,
                                  std::uint64_t seed, const StudyOptions& options) {
  if (replicas < 50) throw Error(ErrorKind::InvalidArgument, "replicas must be >= 50");
  if (m_samples < 1) throw Error(ErrorKind::InvalidArgument, "m_samples must be >= 1");

  StudySummary s;
  s.replicas = replicas;
  s.m_samples = m_samples;
  s.seed = seed;
  s.phi = MeasurementScheme::homodyne(phi).phi;
  s.true_g = model.g();
  const DerivedQuantities d = model.derived();
  FisherOptions fo;
  fo.execution = Execution::Serial;
  s.fisher = homodyne_fisher(d, alpha, s.phi, fo).information;

  const FieldState state = field_state_at_period(d, alpha);
  const HomodyneSampler sampler(state, s.phi, options.sampler);
  const SearchInterval bracket = SearchInterval::around(s.true_g, options.relative_bracket);

  s.estimates.assign(replicas, 0.0);
  std::vector<std::exception_ptr> failures(replicas);
  auto run = [&](int r) {
    try {
      SampleBatch batch{sampler.draw(m_samples, replica_seed(seed, r)), MeasurementScheme::homodyne(s.phi), s.true_g,
                        replica_seed(seed, r)};
      s.estimates[r] = max_likelihood(batch, model, alpha, bracket, options.mle).g_hat;
    } catch (...) {
      failures[r] = std::current_exception();
    }
  };
  if (options.execution == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (int r = 0; r < replicas; ++r) run(r);
  } else {
    for (int r = 0; r < replicas; ++r) run(r);
  }
  for (const auto& f : failures)
    if (f) std::rethrow_exception(f);

  auto normalized_variance = [&](const std::vector<double>& xs) {
    const double mean = pairwise_sum(xs) / xs.size();
    std::vector<double> sq(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) sq[i] = (xs[i] - mean) * (xs[i] - mean);
    return pairwise_sum(sq) / (xs.size() - 1) * m_samples * s.fisher;
  };
  s.mean_g_hat = pairwise_sum(s.estimates) / replicas;
  s.bias = s.mean_g_hat - s.true_g;
  s.normalized_variance = normalized_variance(s.estimates);
  s.variance = s.normalized_variance / (m_samples * s.fisher);

  // percentile bootstrap over replicas
  Rng rng(seed ^ 0xB0075712A9ULL);
  std::vector<double> boot(options.bootstrap_resamples);
  std::vector<double> resample(replicas);
  for (auto& b : boot) {
    for (auto& x : resample) x = s.estimates[static_cast<std::size_t>(rng.uniform() * replicas)];
    b = normalized_variance(resample);
  }
  std::sort(boot.begin(), boot.end());
  if (!boot.empty()) {
    s.ci_low = boot[static_cast<std::size_t>(0.025 * (boot.size() - 1))];
    s.ci_high = boot[static_cast<std::size_t>(0.975 * (boot.size() - 1))];
  }
  return s;
}

}  // namespace optograv
