#pragma once

// Mask generation: uniform random sampling and Voronoi-guided densification.
//
// Densification grows a sparse random mask towards a target density by
// repeatedly inpainting, splitting the image into Voronoi cells around the
// current mask points, and planting a new mask point at the worst pixel of
// the worst cells.  All ordering is deterministic: cells are ranked by
// (summed squared error desc, area desc, site pixel index asc) and ties on
// pixels break towards the lower pixel index.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "schwarz_inpaint/image.hpp"
#include "schwarz_inpaint/multilevel.hpp"

namespace schwarz_inpaint {

// Exactly round(density * pixels) known pixels, uniformly without
// replacement (partial Fisher-Yates over the pixel indices).
inline InpaintingMask random_mask(int width, int height, double density, std::uint64_t seed) {
  detail::check_arg(width > 0 && height > 0, "random_mask: dimensions must be positive");
  detail::check_arg(density > 0.0 && density <= 1.0, "random_mask: density must lie in (0, 1]");
  const std::size_t n = static_cast<std::size_t>(width) * height;
  std::size_t k = static_cast<std::size_t>(std::llround(density * static_cast<double>(n)));
  k = std::min(k, n);
  detail::check_arg(k >= 1, "random_mask: density rounds to zero known pixels");

  std::vector<std::uint32_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0u);
  std::mt19937_64 gen(seed);
  InpaintingMask mask(width, height);
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(idx[i], idx[pick(gen)]);
    mask.known[idx[i]] = 1;
  }
  return mask;
}

struct VoronoiAssignment {
  std::vector<std::int32_t> sites;    // known pixel indices, ascending
  std::vector<std::int32_t> site_of;  // pixel -> index into sites
};

// Exact nearest-site assignment under Euclidean distance; on equal distance
// the site with the lower pixel index wins.  Uses a bucket grid: a bucket
// is only scanned while its rectangle could still beat or tie the best
// candidate, and rings of buckets are expanded until they provably cannot.
inline VoronoiAssignment assign_nearest_site(const InpaintingMask& mask) {
  detail::check_arg(mask.known_count() > 0, "assign_nearest_site: mask has no known pixels");
  const int w = mask.width, h = mask.height;
  const std::size_t n = mask.size();
  VoronoiAssignment out;
  for (std::size_t i = 0; i < n; ++i) {
    if (mask.known[i]) out.sites.push_back(static_cast<std::int32_t>(i));
  }
  const std::size_t m = out.sites.size();
  out.site_of.assign(n, -1);

  const int cell = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(n) / m)));
  const int bw = (w + cell - 1) / cell, bh = (h + cell - 1) / cell;
  // Counting-sort sites into buckets; sites stay ascending inside a bucket.
  std::vector<std::int32_t> offset(static_cast<std::size_t>(bw) * bh + 1, 0);
  auto bucket_of = [&](std::int32_t p) {
    const int x = p % w, y = p / w;
    return static_cast<std::size_t>(y / cell) * bw + x / cell;
  };
  for (std::int32_t s : out.sites) ++offset[bucket_of(s) + 1];
  for (std::size_t i = 1; i < offset.size(); ++i) offset[i] += offset[i - 1];
  std::vector<std::int32_t> bucket_sites(m);
  {
    std::vector<std::int32_t> cursor(offset.begin(), offset.end() - 1);
    for (std::size_t si = 0; si < m; ++si) {
      bucket_sites[cursor[bucket_of(out.sites[si])]++] = static_cast<std::int32_t>(si);
    }
  }

  auto assign_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      const int px = static_cast<int>(p) % w, py = static_cast<int>(p) / w;
      const int bx0 = px / cell, by0 = py / cell;
      std::int64_t best_d = -1;
      std::int32_t best_site = -1;
      const int max_ring = std::max(bw, bh);
      for (int ring = 0; ring <= max_ring; ++ring) {
        if (best_site >= 0) {
          // Any bucket `ring` rings away is at least (ring-1)*cell+1 pixels
          // away; beyond that not even a tie is possible.
          const std::int64_t reach = static_cast<std::int64_t>(ring - 1) * cell + 1;
          if (ring >= 1 && reach * reach > best_d) break;
        }
        const int xlo = bx0 - ring, xhi = bx0 + ring;
        const int ylo = by0 - ring, yhi = by0 + ring;
        for (int by = std::max(0, ylo); by <= std::min(bh - 1, yhi); ++by) {
          const bool y_edge = by == ylo || by == yhi;
          for (int bx = std::max(0, xlo); bx <= std::min(bw - 1, xhi); ++bx) {
            if (!y_edge && bx != xlo && bx != xhi) continue;  // interior of ring
            // Distance from the pixel to the bucket rectangle.
            const int rx0 = bx * cell, rx1 = std::min(w - 1, rx0 + cell - 1);
            const int ry0 = by * cell, ry1 = std::min(h - 1, ry0 + cell - 1);
            const int dx = px < rx0 ? rx0 - px : (px > rx1 ? px - rx1 : 0);
            const int dy = py < ry0 ? ry0 - py : (py > ry1 ? py - ry1 : 0);
            const std::int64_t rect_d =
                static_cast<std::int64_t>(dx) * dx + static_cast<std::int64_t>(dy) * dy;
            if (best_site >= 0 && rect_d > best_d) continue;
            const std::size_t b = static_cast<std::size_t>(by) * bw + bx;
            for (std::int32_t k = offset[b]; k < offset[b + 1]; ++k) {
              const std::int32_t si = bucket_sites[k];
              const std::int32_t sp = out.sites[si];
              const int sx = sp % w, sy = sp / w;
              const std::int64_t ddx = sx - px, ddy = sy - py;
              const std::int64_t d = ddx * ddx + ddy * ddy;
              if (best_site < 0 || d < best_d || (d == best_d && si < best_site)) {
                best_d = d;
                best_site = si;
              }
            }
          }
        }
      }
      out.site_of[p] = best_site;
    }
  };
  if (n >= 1u << 15) {
    parallel::parallel_for(n, 4096, assign_range);
  } else {
    assign_range(0, n);
  }
  return out;
}

struct DensifyOptions {
  double initial_density = 0.0;   // <= 0: start at a quarter of the target
  double cell_fraction = 0.20;    // share of cells refined per sweep
  double inner_tolerance = 1e-3;  // tolerance of the guiding inpainting runs
  int max_sweeps = 100;
  MultilevelSolveOptions solve;   // solver driving the error estimates
};

struct DensifyResult {
  InpaintingMask mask;
  int sweeps = 0;
  bool reached_target = false;
};

inline DensifyResult voronoi_densify(const ImageBuffer& f, double target_density,
                                     std::uint64_t seed, const DensifyOptions& options = {}) {
  detail::check_arg(target_density > 0.0 && target_density <= 1.0,
                    "voronoi_densify: target density must lie in (0, 1]");
  detail::check_arg(options.initial_density <= 0.0 || options.initial_density < target_density,
                    "voronoi_densify: initial density must lie below the target");
  const std::size_t n = static_cast<std::size_t>(f.width) * f.height;
  const std::size_t target_k = std::max<std::size_t>(
      1, std::min(n, static_cast<std::size_t>(std::llround(target_density * static_cast<double>(n)))));
  double init = options.initial_density > 0.0 ? options.initial_density : target_density / 4.0;
  if (init * static_cast<double>(n) < 1.0) init = 1.5 / static_cast<double>(n);

  DensifyResult result;
  result.mask = random_mask(f.width, f.height, init, seed);

  MultilevelSolveOptions solve = options.solve;
  solve.tolerance = options.inner_tolerance;

  while (result.mask.known_count() < target_k && result.sweeps < options.max_sweeps) {
    const SolveResult guide = multilevel_solve(f, result.mask, LevelSolver::Oras, solve);
    const VoronoiAssignment cells = assign_nearest_site(result.mask);
    const std::size_t m = cells.sites.size();

    std::vector<double> cell_error(m, 0.0);
    std::vector<std::int64_t> cell_area(m, 0);
    std::vector<double> best_error(m, -1.0);
    std::vector<std::int32_t> best_pixel(m, -1);
    for (std::size_t p = 0; p < n; ++p) {
      if (result.mask.known[p]) continue;
      const std::int32_t s = cells.site_of[p];
      double e = 0.0;
      for (int c = 0; c < f.channels; ++c) {
        const double d = guide.image.channel(c)[p] - f.channel(c)[p];
        e += d * d;
      }
      cell_error[s] += e;
      ++cell_area[s];
      if (e > best_error[s]) {
        best_error[s] = e;
        best_pixel[s] = static_cast<std::int32_t>(p);
      }
    }

    std::vector<std::int32_t> order;
    order.reserve(m);
    for (std::size_t s = 0; s < m; ++s) {
      if (cell_area[s] > 0) order.push_back(static_cast<std::int32_t>(s));
    }
    std::sort(order.begin(), order.end(), [&](std::int32_t a, std::int32_t b) {
      if (cell_error[a] != cell_error[b]) return cell_error[a] > cell_error[b];
      if (cell_area[a] != cell_area[b]) return cell_area[a] > cell_area[b];
      return a < b;
    });

    std::size_t quota = std::max<std::size_t>(
        1, static_cast<std::size_t>(options.cell_fraction * static_cast<double>(m)));
    quota = std::min({quota, order.size(), target_k - result.mask.known_count()});
    for (std::size_t i = 0; i < quota; ++i) {
      result.mask.known[best_pixel[order[i]]] = 1;
    }
    ++result.sweeps;
  }
  result.reached_target = result.mask.known_count() >= target_k;
  return result;
}

}  // namespace schwarz_inpaint
