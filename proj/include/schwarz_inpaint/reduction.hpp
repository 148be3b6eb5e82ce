#pragma once

// Elimination of known pixels.  Known rows of A are identity rows, so the
// system splits: u_q = b_q on known pixels, and the unknowns satisfy the
// reduced system
//
//     A_red x = b_red,   (b_red)_p = b_p + sum_{q ~ p, q known} b_q,
//
// where A_red keeps the Laplacian coupling between unknown pixels only.
// A_red is symmetric positive definite whenever every connected component of
// the unknown region touches at least one known pixel; otherwise that
// component's sub-block is a pure Neumann Laplacian (singular) and the
// reduction is rejected.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "schwarz_inpaint/operators.hpp"

namespace schwarz_inpaint {

inline constexpr std::int32_t kKnownPixel = -1;

struct ReducedSystem {
  int width = 0;
  int height = 0;
  std::vector<std::int32_t> unknown_of;  // pixel -> reduced index, or kKnownPixel
  std::vector<std::int32_t> pixel_of;    // reduced index -> pixel
  std::vector<double> diag;              // deg(p) per unknown

  std::size_t size() const { return pixel_of.size(); }

  // y = A_red x.
  void apply(std::span<const double> x, std::span<double> y) const {
    detail::check_arg(x.size() == size() && y.size() == size(),
                      "ReducedSystem::apply: vector length mismatch");
    const int w = width;
    auto run = [&](std::size_t begin, std::size_t end) {
      for (std::size_t k = begin; k < end; ++k) {
        const std::int32_t p = pixel_of[k];
        const int x_ = p % w;
        const int y_ = p / w;
        double acc = diag[k] * x[k];
        if (x_ > 0 && unknown_of[p - 1] >= 0) acc -= x[unknown_of[p - 1]];
        if (x_ + 1 < w && unknown_of[p + 1] >= 0) acc -= x[unknown_of[p + 1]];
        if (y_ > 0 && unknown_of[p - w] >= 0) acc -= x[unknown_of[p - w]];
        if (y_ + 1 < height && unknown_of[p + w] >= 0) acc -= x[unknown_of[p + w]];
        y[k] = acc;
      }
    };
    if (size() >= 1u << 15) {
      parallel::parallel_for(size(), 1024, run);
    } else {
      run(0, size());
    }
  }
};

// Builds the index maps and diagonal.  With check_singular set, walks each
// connected component of the unknown region and throws std::runtime_error if
// one has no known 4-neighbour anywhere (singular reduced block).
inline ReducedSystem reduce_structure(const InpaintingMask& mask, bool check_singular = true) {
  ReducedSystem sys;
  sys.width = mask.width;
  sys.height = mask.height;
  const int w = mask.width, h = mask.height;
  const std::size_t n = mask.size();
  sys.unknown_of.assign(n, kKnownPixel);
  for (std::size_t i = 0; i < n; ++i) {
    if (!mask.known[i]) {
      sys.unknown_of[i] = static_cast<std::int32_t>(sys.pixel_of.size());
      sys.pixel_of.push_back(static_cast<std::int32_t>(i));
    }
  }
  sys.diag.resize(sys.pixel_of.size());
  for (std::size_t k = 0; k < sys.pixel_of.size(); ++k) {
    const std::int32_t p = sys.pixel_of[k];
    const int x = p % w, y = p / w;
    sys.diag[k] = (x > 0) + (x + 1 < w) + (y > 0) + (y + 1 < h);
  }

  if (check_singular && !sys.pixel_of.empty()) {
    std::vector<std::uint8_t> seen(n, 0);
    std::vector<std::int32_t> stack;
    for (std::size_t start = 0; start < n; ++start) {
      if (mask.known[start] || seen[start]) continue;
      bool touches_known = false;
      stack.push_back(static_cast<std::int32_t>(start));
      seen[start] = 1;
      while (!stack.empty()) {
        const std::int32_t p = stack.back();
        stack.pop_back();
        const int x = p % w, y = p / w;
        const std::int32_t nbr[4] = {x > 0 ? p - 1 : -1, x + 1 < w ? p + 1 : -1,
                                     y > 0 ? p - w : -1, y + 1 < h ? p + w : -1};
        for (std::int32_t q : nbr) {
          if (q < 0) continue;
          if (mask.known[q]) {
            touches_known = true;
          } else if (!seen[q]) {
            seen[q] = 1;
            stack.push_back(q);
          }
        }
      }
      if (!touches_known) {
        throw std::runtime_error(
            "reduce_structure: singular system (an unknown region touches no known pixel)");
      }
    }
  }
  return sys;
}

// Reduced right-hand side for one channel: moves the couplings to known
// neighbours over to the right side.
inline ChannelVector reduced_rhs(const ReducedSystem& sys, std::span<const double> b) {
  detail::check_arg(b.size() == sys.unknown_of.size(), "reduced_rhs: vector length mismatch");
  const int w = sys.width, h = sys.height;
  ChannelVector r(sys.size());
  for (std::size_t k = 0; k < sys.size(); ++k) {
    const std::int32_t p = sys.pixel_of[k];
    const int x = p % w, y = p / w;
    double acc = b[p];
    if (x > 0 && sys.unknown_of[p - 1] == kKnownPixel) acc += b[p - 1];
    if (x + 1 < w && sys.unknown_of[p + 1] == kKnownPixel) acc += b[p + 1];
    if (y > 0 && sys.unknown_of[p - w] == kKnownPixel) acc += b[p - w];
    if (y + 1 < h && sys.unknown_of[p + w] == kKnownPixel) acc += b[p + w];
    r[k] = acc;
  }
  return r;
}

// Scatters a reduced solution back to the full grid; known pixels take their
// right-hand-side (= image) values.
inline ChannelVector embed_solution(const ReducedSystem& sys, std::span<const double> x,
                                    std::span<const double> b) {
  detail::check_arg(x.size() == sys.size(), "embed_solution: reduced length mismatch");
  detail::check_arg(b.size() == sys.unknown_of.size(), "embed_solution: full length mismatch");
  ChannelVector u(b.begin(), b.end());
  for (std::size_t k = 0; k < sys.size(); ++k) u[sys.pixel_of[k]] = x[k];
  return u;
}

struct ReducedProblem {
  ReducedSystem system;
  ChannelVector rhs;
};

inline ReducedProblem reduce_to_unknowns(const InpaintingOperator& op, std::span<const double> b) {
  detail::check_arg(b.size() == op.size(), "reduce_to_unknowns: vector length mismatch");
  ReducedProblem p;
  p.system = reduce_structure(op.mask());
  p.rhs = reduced_rhs(p.system, b);
  return p;
}

}  // namespace schwarz_inpaint
