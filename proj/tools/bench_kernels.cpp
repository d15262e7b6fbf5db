// Serial vs OpenMP timings for the quadrature kernels and the replica study.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <omp.h>
#include <vector>

#include "optograv/config.hpp"
#include "optograv/dynamics.hpp"
#include "optograv/estimation.hpp"
#include "optograv/inference.hpp"
#include "optograv/quadrature.hpp"

using namespace optograv;

namespace {

template <class F>
double best_of(int reps, F&& f) {
  double best = 1e300;
  for (int i = 0; i < reps; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

void report(const char* name, double serial, double parallel, bool identical) {
  std::printf("%-22s serial %9.4f s  parallel %9.4f s  speedup %5.2fx  identical=%s\n", name, serial, parallel,
              serial / parallel, identical ? "yes" : "NO");
}

}  // namespace

int main() {
  const int threads = configure_threads_from_env();
  std::printf("threads: %d\n", threads);

  PhysicalParams p = RunConfig::default_physical_params();
  p.alpha = {10.0, 0.0};  // N_p = 100
  const DerivedQuantities d = derive_quantities(p);
  const FieldState state = field_state_at_period(d, p.alpha);
  std::vector<double> grad(state.amplitudes.size());
  for (std::size_t n = 0; n < grad.size(); ++n) grad[n] = period_phase_gradient(d, static_cast<int>(n));

  FisherOptions serial, parallel;
  serial.execution = Execution::Serial;
  parallel.execution = Execution::Parallel;

  {
    const double hw = std::sqrt(2.0) * std::abs(p.alpha) + 12.0;
    FisherResult a, b;
    const double ts = best_of(3, [&] { a = homodyne_fisher_on_grid(state, grad, constants::kPi / 2, hw, 512, serial); });
    const double tp = best_of(3, [&] { b = homodyne_fisher_on_grid(state, grad, constants::kPi / 2, hw, 512, parallel); });
    report("homodyne_fisher", ts, tp, a.information == b.information && a.normalization == b.normalization);
  }
  {
    const double r = std::abs(p.alpha);
    FisherResult a, b;
    const double ts =
        best_of(3, [&] { a = heterodyne_fisher_on_grid(state, grad, std::max(0.0, r - 12), r + 12, 20, 512, serial); });
    const double tp =
        best_of(3, [&] { b = heterodyne_fisher_on_grid(state, grad, std::max(0.0, r - 12), r + 12, 20, 512, parallel); });
    report("heterodyne_fisher", ts, tp, a.information == b.information && a.normalization == b.normalization);
  }
  {
    const GravityModel model{ScaledParams{}};
    StudyOptions so, sp;
    so.execution = Execution::Serial;
    sp.execution = Execution::Parallel;
    StudySummary a, b;
    const double ts = best_of(1, [&] { a = crb_saturation_study(model, model.alpha(), constants::kPi / 2, 1000, 100, 7, so); });
    const double tp = best_of(1, [&] { b = crb_saturation_study(model, model.alpha(), constants::kPi / 2, 1000, 100, 7, sp); });
    report("crb_study(100x1000)", ts, tp, a.estimates == b.estimates);
  }
  return 0;
}
