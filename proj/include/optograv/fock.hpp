#pragma once

#include <complex>
#include <vector>

namespace optograv {

inline constexpr double kTruncationTolerance = 1e-12;
inline constexpr int kDefaultTruncationCap = 1 << 20;

/// Photon-number cutoff for a Poisson distribution of mean `mean`:
/// ceil(N + 10 sqrt(N) + 20), then grown until the tail mass is below
/// `tolerance`. Throws TruncationInsufficient past `cap`.
int truncation_for(double mean, double tolerance = kTruncationTolerance, int cap = kDefaultTruncationCap);

/// Poisson mass strictly above n_max.
double poisson_tail(double mean, int n_max);

/// log of the modulus of <n|alpha> = e^{-|alpha|^2/2} alpha^n / sqrt(n!).
double coherent_log_modulus(double abs_alpha, int n);

/// <n|alpha> for n = 0..n_max, evaluated in log space so large |alpha| does
/// not overflow.
std::vector<std::complex<double>> coherent_amplitudes(std::complex<double> alpha, int n_max);

}  // namespace optograv
