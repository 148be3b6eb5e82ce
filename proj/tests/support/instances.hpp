#pragma once

// Seeded random test instances shared across suites.

#include <random>

#include "schwarz_inpaint/image.hpp"
#include "schwarz_inpaint/masks.hpp"
#include "schwarz_inpaint/synthetic.hpp"

namespace test_support {

struct Instance {
  schwarz_inpaint::ImageBuffer image;
  schwarz_inpaint::InpaintingMask mask;
};

// Smooth image plus uniform random mask; density is clamped so at least one
// pixel is known.
inline Instance random_instance(int width, int height, double density, int channels,
                                std::uint64_t seed) {
  Instance inst;
  inst.image = schwarz_inpaint::synthetic_test_image(width, height, channels, seed);
  const double min_density = 1.0 / (static_cast<double>(width) * height);
  inst.mask = schwarz_inpaint::random_mask(width, height, std::max(density, 1.5 * min_density),
                                           seed ^ 0x9e3779b97f4a7c15ull);
  return inst;
}

// Uniform noise vector, handy where smoothness is unwanted.
inline schwarz_inpaint::ChannelVector random_vector(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  schwarz_inpaint::ChannelVector v(n);
  for (double& x : v) x = unit(gen);
  return v;
}

}  // namespace test_support
