#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace optograv {

/// Kernels that support both paths produce bit-identical results: parallel
/// loops only fill per-panel partial sums, which are then reduced serially
/// in a fixed pairwise order.
enum class Execution { Serial, Parallel };

double pairwise_sum(std::span<const double> values);

/// Nodes and weights of one Gauss-Legendre panel set.
struct Panel {
  double lo = 0.0;
  double hi = 0.0;
};

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  int points_per_panel = 0;

  std::size_t panels() const { return points_per_panel ? nodes.size() / points_per_panel : 0; }
};

inline constexpr int kGaussOrder = 20;

/// `panels` equal panels on [lo, hi], kGaussOrder Gauss-Legendre points each.
QuadratureRule composite_gauss_legendre(double lo, double hi, int panels);

/// Worker count from OPTOGRAV_THREADS when set; returns the count in effect.
int configure_threads_from_env();

}  // namespace optograv
