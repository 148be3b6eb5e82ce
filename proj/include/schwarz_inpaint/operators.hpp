#pragma once

// Matrix-free inpainting operator
//
//     A u = C u - (I - C) L u,        b = C f,
//
// where C is the diagonal 0/1 matrix of known pixels and L is the 5-point
// Laplacian with grid spacing 1 and reflecting boundaries: a neighbour that
// falls outside the image is replaced by the centre pixel, which is the same
// as dropping it from both the sum and the diagonal count.  Rows of known
// pixels are identity rows; a row of an unknown pixel p reads
//
//     (A u)_p = deg(p) u_p - sum_{q ~ p, q in image} u_q,
//
// with deg(p) the number of in-image 4-neighbours.  Unknown rows therefore
// sum to zero (constants are in the null space of the Laplacian part), which
// the reflecting treatment preserves on the boundary.

#include <span>

#include "schwarz_inpaint/image.hpp"
#include "schwarz_inpaint/parallel.hpp"

namespace schwarz_inpaint {

class InpaintingOperator {
 public:
  explicit InpaintingOperator(InpaintingMask mask) : mask_(std::move(mask)) {
    detail::check_arg(mask_.width > 0 && mask_.height > 0,
                      "InpaintingOperator: mask dimensions must be positive");
  }

  int width() const { return mask_.width; }
  int height() const { return mask_.height; }
  std::size_t size() const { return mask_.size(); }
  const InpaintingMask& mask() const { return mask_; }

  void apply(std::span<const double> u, std::span<double> out) const {
    detail::check_arg(u.size() == size() && out.size() == size(),
                      "InpaintingOperator::apply: vector length mismatch");
    const int w = mask_.width, h = mask_.height;
    auto rows = [&](std::size_t y_begin, std::size_t y_end) {
      for (std::size_t y = y_begin; y < y_end; ++y) {
        const std::size_t row = y * w;
        for (int x = 0; x < w; ++x) {
          const std::size_t i = row + x;
          if (mask_.known[i]) {
            out[i] = u[i];
            continue;
          }
          double sum = 0.0;
          int deg = 0;
          if (x > 0) { sum += u[i - 1]; ++deg; }
          if (x + 1 < w) { sum += u[i + 1]; ++deg; }
          if (y > 0) { sum += u[i - w]; ++deg; }
          if (y + 1 < static_cast<std::size_t>(h)) { sum += u[i + w]; ++deg; }
          out[i] = deg * u[i] - sum;
        }
      }
    };
    if (size() >= 1u << 15) {
      parallel::parallel_for(static_cast<std::size_t>(h), 16, rows);
    } else {
      rows(0, static_cast<std::size_t>(h));
    }
  }

 private:
  InpaintingMask mask_;
};

inline ChannelVector apply_operator(const InpaintingOperator& op, std::span<const double> u) {
  ChannelVector out(op.size());
  op.apply(u, out);
  return out;
}

// Right-hand side b = C f for one channel: known pixels carry their image
// value, unknown pixels are zero.  A mask with no known pixel leaves A
// singular and is rejected.
inline ChannelVector build_rhs(std::span<const double> f, const InpaintingMask& mask) {
  detail::check_arg(f.size() == mask.size(), "build_rhs: channel length mismatch");
  detail::check_arg(mask.known_count() > 0, "build_rhs: mask has no known pixels");
  ChannelVector b(mask.size(), 0.0);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask.known[i]) b[i] = f[i];
  }
  return b;
}

inline void residual_into(const InpaintingOperator& op, std::span<const double> u,
                          std::span<const double> b, std::span<double> r) {
  detail::check_arg(b.size() == op.size() && r.size() == op.size(),
                    "residual_into: vector length mismatch");
  op.apply(u, r);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
}

inline ChannelVector residual(const InpaintingOperator& op, std::span<const double> u,
                              std::span<const double> b) {
  ChannelVector r(op.size());
  residual_into(op, u, b, r);
  return r;
}

}  // namespace schwarz_inpaint
