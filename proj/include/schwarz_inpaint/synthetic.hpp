#pragma once

// Deterministic smooth test images: a few random Gaussian blobs on top of a
// low-frequency sinusoidal field, rescaled into [0.05, 0.95].  Seeded, so
// every run (and every thread count) sees identical data.

#include <cmath>
#include <random>

#include "schwarz_inpaint/image.hpp"

namespace schwarz_inpaint {

inline ImageBuffer synthetic_test_image(int width, int height, int channels,
                                        std::uint64_t seed) {
  detail::check_arg(width > 0 && height > 0 && channels > 0,
                    "synthetic_test_image: dimensions must be positive");
  ImageBuffer image(width, height, channels);
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const double diag = std::sqrt(static_cast<double>(width) * width +
                                static_cast<double>(height) * height);
  for (int c = 0; c < channels; ++c) {
    struct Blob {
      double cx, cy, inv_two_sigma_sq, amp;
    };
    Blob blobs[5];
    for (Blob& blob : blobs) {
      blob.cx = unit(gen) * width;
      blob.cy = unit(gen) * height;
      const double sigma = (0.05 + 0.20 * unit(gen)) * diag;
      blob.inv_two_sigma_sq = 1.0 / (2.0 * sigma * sigma);
      blob.amp = 0.3 + 0.7 * unit(gen);
    }
    const double kx = (1.0 + 2.0 * unit(gen)) * 2.0 * 3.14159265358979323846 / width;
    const double ky = (1.0 + 2.0 * unit(gen)) * 2.0 * 3.14159265358979323846 / height;
    const double phase_x = unit(gen) * 6.28318530717958647692;
    const double phase_y = unit(gen) * 6.28318530717958647692;

    auto dst = image.channel(c);
    double lo = 1e300, hi = -1e300;
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        double v = 0.4 * std::sin(kx * x + phase_x) * std::sin(ky * y + phase_y);
        for (const Blob& blob : blobs) {
          const double dx = x - blob.cx, dy = y - blob.cy;
          v += blob.amp * std::exp(-(dx * dx + dy * dy) * blob.inv_two_sigma_sq);
        }
        dst[static_cast<std::size_t>(y) * width + x] = v;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
    const double scale = hi > lo ? 0.9 / (hi - lo) : 0.0;
    for (double& v : dst) v = 0.05 + (v - lo) * scale;
  }
  return image;
}

}  // namespace schwarz_inpaint
