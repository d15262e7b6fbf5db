#include "optograv/quadrature.hpp"

#include <omp.h>

#include <boost/math/quadrature/gauss.hpp>
#include <cstdlib>
#include <string>

#include "optograv/error.hpp"

namespace optograv {

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

QuadratureRule composite_gauss_legendre(double lo, double hi, int panels) {
  if (panels < 1 || !(hi > lo)) throw Error(ErrorKind::InvalidArgument, "bad quadrature interval");
  using rule = boost::math::quadrature::gauss<double, kGaussOrder>;
  const auto& abscissa = rule::abscissa();
  const auto& weight = rule::weights();

  // expand the symmetric half-rule stored by boost (even order: no zero node)
  std::vector<double> x;
  std::vector<double> w;
  for (std::size_t i = abscissa.size(); i-- > 0;) {
    x.push_back(-abscissa[i]);
    w.push_back(weight[i]);
  }
  for (std::size_t i = 0; i < abscissa.size(); ++i) {
    if (abscissa[i] == 0.0) continue;
    x.push_back(abscissa[i]);
    w.push_back(weight[i]);
  }

  QuadratureRule out;
  out.points_per_panel = static_cast<int>(x.size());
  out.nodes.reserve(panels * x.size());
  out.weights.reserve(panels * x.size());
  const double width = (hi - lo) / panels;
  for (int p = 0; p < panels; ++p) {
    const double a = lo + p * width;
    const double half = 0.5 * width;
    const double mid = a + half;
    for (std::size_t i = 0; i < x.size(); ++i) {
      out.nodes.push_back(mid + half * x[i]);
      out.weights.push_back(half * w[i]);
    }
  }
  return out;
}

int configure_threads_from_env() {
  if (const char* env = std::getenv("OPTOGRAV_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) omp_set_num_threads(n);
    } catch (const std::exception&) {
      throw Error(ErrorKind::ConfigError, std::string("OPTOGRAV_THREADS is not an integer: ") + env);
    }
  }
  return omp_get_max_threads();
}

}  // namespace optograv
