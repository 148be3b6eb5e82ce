// Sweeps the ORAS Robin weight on a fixed 256x256 instance with 5% known
// pixels and reports single-level outer iteration counts to 1e-6.  The
// winner is hard-coded as kDefaultOrasAlpha; rerun this after touching the
// transmission conditions.

#include <cstdio>
#include <vector>

#include "schwarz_inpaint/masks.hpp"
#include "schwarz_inpaint/schwarz.hpp"
#include "schwarz_inpaint/synthetic.hpp"

namespace si = schwarz_inpaint;

int main() {
  const si::ImageBuffer image = si::synthetic_test_image(256, 256, 3, 7);
  const si::InpaintingMask mask = si::random_mask(256, 256, 0.05, 11);
  const auto partition = si::partition_domain(256, 256, 32, 6);

  auto outer_iterations = [&](si::SchwarzFlavour flavour, double alpha) {
    si::SchwarzSolveOptions opt;
    opt.schwarz.flavour = flavour;
    opt.schwarz.alpha = alpha;
    opt.schwarz.max_outer_iterations = 5000;
    opt.tolerance = 1e-6;
    const auto result = si::solve_schwarz(image, mask, partition, opt);
    return result.report.converged ? result.report.iterations : -1;
  };

  std::printf("single-level outer iterations to 1e-6, 256x256, 5%% known, 32/6 blocks\n");
  const int ras = outer_iterations(si::SchwarzFlavour::Ras, 1.0);
  std::printf("  ras               %4d\n", ras);

  const std::vector<double> sweep{0.1, 0.25, 0.5, 1.0, 2.0, 4.0};
  double best_alpha = sweep.front();
  int best_iters = -1;
  for (double alpha : sweep) {
    const int iters = outer_iterations(si::SchwarzFlavour::Oras, alpha);
    std::printf("  oras alpha=%-5.2f  %4d%s\n", alpha, iters, iters < 0 ? " (cap)" : "");
    if (iters >= 0 && (best_iters < 0 || iters < best_iters)) {
      best_iters = iters;
      best_alpha = alpha;
    }
  }
  std::printf("winner: alpha=%.2f (%d iterations)\n", best_alpha, best_iters);
  return 0;
}
