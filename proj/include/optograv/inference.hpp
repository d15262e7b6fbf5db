#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "optograv/dynamics.hpp"
#include "optograv/estimation.hpp"
#include "optograv/params.hpp"
#include "optograv/quadrature.hpp"

namespace optograv {

/// Algorithm recorded in every output that depends on random draws.
inline constexpr const char* kRngAlgorithm = "mt19937_64/splitmix64-seeded";

std::uint64_t splitmix64(std::uint64_t x);

/// Seed of replica `index` under master seed `master`:
/// splitmix64(master ^ splitmix64(index + 1)).
std::uint64_t replica_seed(std::uint64_t master, std::uint64_t index);

/// Portable uniform draws: the engine is fully specified by the standard and
/// doubles are built from the top 53 bits, so streams match across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

struct SampleBatch {
  std::vector<double> outcomes;
  MeasurementScheme scheme;
  double true_g = 0.0;
  std::uint64_t seed = 0;
};

struct SamplerOptions {
  int initial_cells = 4096;
  int max_refinements = 5;
  double cdf_tolerance = 1e-6;
};

/// Inverse-CDF sampler for p(x|g) on a dense grid. Construction integrates
/// the density cell by cell and refines until linear interpolation of the
/// CDF is within `cdf_tolerance` at every cell midpoint.
class HomodyneSampler {
 public:
  HomodyneSampler(const FieldState& state, double phi, const SamplerOptions& options = {});

  std::vector<double> draw(int m, std::uint64_t seed) const;

  std::size_t cells() const { return cdf_.size() - 1; }
  double interpolation_error() const { return interpolation_error_; }

 private:
  double lo_ = 0.0;
  double width_ = 0.0;
  std::vector<double> cdf_;
  double interpolation_error_ = 0.0;
};

SampleBatch sample_homodyne(const FieldState& state, double phi, int m_samples, std::uint64_t seed,
                            double true_g = 0.0, const SamplerOptions& options = {});

struct SearchInterval {
  double lo = 0.0;
  double hi = 0.0;

  /// center * (1 -+ relative)
  static SearchInterval around(double center, double relative = 0.1);
};

/// sum_i log p(x_i|g) for a fixed batch. Hermite functions at the outcomes
/// are computed once; each evaluation re-derives the field state at g.
class HomodyneLikelihood {
 public:
  HomodyneLikelihood(const SampleBatch& batch, GravityModel model, std::complex<double> alpha);
  double operator()(double g) const;

 private:
  GravityModel model_;
  std::complex<double> alpha_;
  double phi_ = 0.0;
  int n_max_ = 0;
  Eigen::MatrixXd psi_;  // outcomes x levels
};

enum class EstimatorMethod { MaxLik, Bayes };

struct EstimateResult {
  double g_hat = 0.0;
  double variance = 0.0;
  std::vector<std::pair<double, double>> log_likelihood_curve;  // (g, log L)
  std::vector<double> posterior;  // density on the curve grid, Bayes only
  EstimatorMethod method = EstimatorMethod::MaxLik;
};

struct MleOptions {
  int coarse_points = 101;
  double tolerance = 1e-10;  // golden-section stop, relative to interval width
};

EstimateResult max_likelihood(const SampleBatch& batch, const GravityModel& model, std::complex<double> alpha,
                              SearchInterval search, const MleOptions& options = {});

EstimateResult bayes_posterior(const SampleBatch& batch, const GravityModel& model, std::complex<double> alpha,
                               SearchInterval prior, int grid_n);

struct StudyOptions {
  double relative_bracket = 0.1;
  int bootstrap_resamples = 1000;
  Execution execution = Execution::Parallel;
  SamplerOptions sampler;
  MleOptions mle;
};

struct StudySummary {
  int replicas = 0;
  int m_samples = 0;
  std::uint64_t seed = 0;
  double phi = 0.0;
  double true_g = 0.0;
  double fisher = 0.0;
  double mean_g_hat = 0.0;
  double bias = 0.0;
  double variance = 0.0;
  double normalized_variance = 0.0;  // Var(g_hat) m F, -> 1 at saturation
  double ci_low = 0.0;               // 95% bootstrap interval of the above
  double ci_high = 0.0;
  std::vector<double> estimates;
};

/// Independent sample -> MaxLik pipelines, one per replica, run concurrently.
StudySummary crb_saturation_study(const GravityModel& model, std::complex<double> alpha, double phi, int m_samples,
                                  int replicas, std::uint64_t seed, const StudyOptions& options = {});

}  // namespace optograv
