#include "optograv/fock.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "optograv/error.hpp"

namespace optograv {

double coherent_log_modulus(double abs_alpha, int n) {
  if (abs_alpha == 0.0) {
    return n == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  }
  return -0.5 * abs_alpha * abs_alpha + n * std::log(abs_alpha) - 0.5 * std::lgamma(n + 1.0);
}

double poisson_tail(double mean, int n_max) {
  if (mean == 0.0) return 0.0;
  // sum terms above n_max directly; they decay geometrically once n > mean
  double tail = 0.0;
  const double log_mean = std::log(mean);
  for (long n = n_max + 1;; ++n) {
    const double term = std::exp(-mean + n * log_mean - std::lgamma(n + 1.0));
    tail += term;
    if (n > mean && term < tail * 1e-17) break;
    if (term == 0.0 && n > mean) break;
  }
  return tail;
}

int truncation_for(double mean, double tolerance, int cap) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) {
    throw Error(ErrorKind::InvalidArgument, "photon number must be finite and >= 0");
  }
  if (mean == 0.0) return 0;  // vacuum: the tail is exactly zero
  const double guess = std::ceil(mean + 10.0 * std::sqrt(mean) + 20.0);
  if (guess > cap) {
    std::ostringstream os;
    os << "photon number " << mean << " needs cutoff " << guess << " above cap " << cap;
    throw Error(ErrorKind::TruncationInsufficient, os.str());
  }
  int n_max = static_cast<int>(guess);
  while (poisson_tail(mean, n_max) >= tolerance) {
    n_max += 1 + n_max / 8;
    if (n_max > cap) {
      throw Error(ErrorKind::TruncationInsufficient, "Poisson tail above tolerance at truncation cap");
    }
  }
  return n_max;
}

std::vector<std::complex<double>> coherent_amplitudes(std::complex<double> alpha, int n_max) {
  std::vector<std::complex<double>> out(static_cast<std::size_t>(n_max) + 1);
  const double r = std::abs(alpha);
  const double arg = std::arg(alpha);
  for (int n = 0; n <= n_max; ++n) {
    out[n] = std::polar(std::exp(coherent_log_modulus(r, n)), n * arg);
  }
  return out;
}

}  // namespace optograv
