// Regenerates data/sample.ppm, the colour test image the README examples
// and the end-to-end tests run against.

#include <cstdio>

#include "schwarz_inpaint/pnm.hpp"
#include "schwarz_inpaint/synthetic.hpp"

int main(int argc, char** argv) {
  const char* path = argc > 1 ? argv[1] : "data/sample.ppm";
  const auto image = schwarz_inpaint::synthetic_test_image(256, 256, 3, 1);
  schwarz_inpaint::write_pnm(path, image);
  std::printf("wrote %s (256x256, 3 channels)\n", path);
  return 0;
}
