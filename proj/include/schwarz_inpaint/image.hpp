#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace schwarz_inpaint {

using ChannelVector = std::vector<double>;

namespace detail {

inline void check_arg(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

}  // namespace detail

// Planar image with values in [0, 1]: channel c occupies the contiguous
// range [c * width * height, (c + 1) * width * height), row-major.
struct ImageBuffer {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<double> data;

  ImageBuffer() = default;

  ImageBuffer(int w, int h, int ch, double fill = 0.0)
      : width(w), height(h), channels(ch) {
    detail::check_arg(w > 0 && h > 0 && ch > 0, "ImageBuffer: dimensions must be positive");
    data.assign(static_cast<std::size_t>(w) * h * ch, fill);
  }

  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width) * height;
  }

  std::span<double> channel(int c) {
    detail::check_arg(c >= 0 && c < channels, "ImageBuffer::channel: index out of range");
    return {data.data() + static_cast<std::size_t>(c) * pixel_count(), pixel_count()};
  }

  std::span<const double> channel(int c) const {
    detail::check_arg(c >= 0 && c < channels, "ImageBuffer::channel: index out of range");
    return {data.data() + static_cast<std::size_t>(c) * pixel_count(), pixel_count()};
  }

  double& at(int x, int y, int c = 0) {
    return data[static_cast<std::size_t>(c) * pixel_count() +
                static_cast<std::size_t>(y) * width + x];
  }

  double at(int x, int y, int c = 0) const {
    return data[static_cast<std::size_t>(c) * pixel_count() +
                static_cast<std::size_t>(y) * width + x];
  }
};

// Binary mask over the pixel grid; known[i] == 1 marks a pixel whose value
// is prescribed, everything else is reconstructed by the solver.
struct InpaintingMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> known;

  InpaintingMask() = default;

  InpaintingMask(int w, int h, std::uint8_t fill = 0) : width(w), height(h) {
    detail::check_arg(w > 0 && h > 0, "InpaintingMask: dimensions must be positive");
    known.assign(static_cast<std::size_t>(w) * h, fill);
  }

  std::size_t size() const { return static_cast<std::size_t>(width) * height; }

  bool is_known(int x, int y) const {
    return known[static_cast<std::size_t>(y) * width + x] != 0;
  }

  std::size_t known_count() const {
    std::size_t n = 0;
    for (std::uint8_t k : known) n += k != 0;
    return n;
  }

  double density() const {
    return size() == 0 ? 0.0 : static_cast<double>(known_count()) / static_cast<double>(size());
  }
};

inline void require_same_grid(const ImageBuffer& image, const InpaintingMask& mask) {
  detail::check_arg(image.width == mask.width && image.height == mask.height,
                    "image and mask dimensions differ");
}

// Area-weighted box filter onto a target_w x target_h grid.  Each output
// pixel averages the source rectangle it covers, with fractional rows and
// columns weighted by overlap, so constants are preserved exactly up to
// rounding in the weights.
inline ImageBuffer box_downsample(const ImageBuffer& src, int target_w, int target_h) {
  detail::check_arg(target_w > 0 && target_h > 0, "box_downsample: target dimensions must be positive");
  detail::check_arg(target_w <= src.width && target_h <= src.height,
                    "box_downsample: target exceeds source dimensions");
  ImageBuffer out(target_w, target_h, src.channels);
  const double sx = static_cast<double>(src.width) / target_w;
  const double sy = static_cast<double>(src.height) / target_h;
  for (int c = 0; c < src.channels; ++c) {
    auto in = src.channel(c);
    auto dst = out.channel(c);
    for (int ty = 0; ty < target_h; ++ty) {
      const double y0 = ty * sy, y1 = (ty + 1) * sy;
      const int iy0 = static_cast<int>(y0);
      const int iy1 = std::min(src.height - 1, static_cast<int>(std::ceil(y1)) - 1);
      for (int tx = 0; tx < target_w; ++tx) {
        const double x0 = tx * sx, x1 = (tx + 1) * sx;
        const int ix0 = static_cast<int>(x0);
        const int ix1 = std::min(src.width - 1, static_cast<int>(std::ceil(x1)) - 1);
        double acc = 0.0, weight = 0.0;
        for (int y = iy0; y <= iy1; ++y) {
          const double wy = std::min<double>(y + 1, y1) - std::max<double>(y, y0);
          for (int x = ix0; x <= ix1; ++x) {
            const double wx = std::min<double>(x + 1, x1) - std::max<double>(x, x0);
            acc += wy * wx * in[static_cast<std::size_t>(y) * src.width + x];
            weight += wy * wx;
          }
        }
        dst[static_cast<std::size_t>(ty) * target_w + tx] = acc / weight;
      }
    }
  }
  return out;
}

}  // namespace schwarz_inpaint
