#pragma once

// Restricted additive Schwarz with optional Robin (optimised) transmission.
//
// One outer iteration: compute the global residual r = b - A u, solve
// R_i A_i R_i^T v_i = R_i r on every block, and add the corrections back
// through the boolean partition of unity, u += sum_i R_i^T D_i v_i.  The
// plain variant (RAS) uses A_i = R_i A R_i^T.  The optimised variant (ORAS)
// keeps the same off-diagonals but re-weights the diagonal where a block
// edge cuts through the unknown region:
//
//     diag(p) = deg_global(p) + (alpha - 1) * cut(p),
//
// cut(p) counting the in-image neighbours of p that fall outside the block.
// alpha = 1 reproduces RAS exactly; alpha = 0 is a pure Neumann cut.  The
// default comes from the sweep in tools/alpha_calibrate.cpp.

#include <cstdint>
#include <span>
#include <vector>

#include "schwarz_inpaint/cg.hpp"
#include "schwarz_inpaint/metrics.hpp"
#include "schwarz_inpaint/operators.hpp"
#include "schwarz_inpaint/partition.hpp"

namespace schwarz_inpaint {

enum class SchwarzFlavour { Ras, Oras };

// Robin weight selected by tools/alpha-calibrate (single-level ORAS outer
// iterations to 1e-6 on a fixed 256x256 instance with 5% known pixels:
// alpha 0.25 needs 7 outer iterations, RAS needs 12).
inline constexpr double kDefaultOrasAlpha = 0.25;

enum class ResidualNormalizer { InitialGuess, RhsNorm };

struct SchwarzOptions {
  SchwarzFlavour flavour = SchwarzFlavour::Oras;
  double alpha = kDefaultOrasAlpha;
  // Local solves are deliberately loose; they are confirmed against the true
  // local residual only when they claim convergence.
  SolverConfig local{1e-2, 30, 30};
  int max_outer_iterations = 1000;
};

// Full (unreduced) local system of one block: identity rows on known cells,
// Robin-weighted Laplacian rows on unknown cells.  Off-diagonal couplings
// run to every in-image neighbour inside the block, known or not.
struct LocalOperator {
  int width = 0, height = 0;
  std::vector<std::uint8_t> known;
  std::vector<double> diag;

  std::size_t size() const { return known.size(); }

  void apply(std::span<const double> v, std::span<double> out) const {
    detail::check_arg(v.size() == size() && out.size() == size(),
                      "LocalOperator::apply: vector length mismatch");
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const std::size_t i = static_cast<std::size_t>(y) * width + x;
        if (known[i]) {
          out[i] = v[i];
          continue;
        }
        double acc = diag[i] * v[i];
        if (x > 0) acc -= v[i - 1];
        if (x + 1 < width) acc -= v[i + 1];
        if (y > 0) acc -= v[i - width];
        if (y + 1 < height) acc -= v[i + width];
        out[i] = acc;
      }
    }
  }
};

namespace detail {

// Fills per-cell known flags and Robin diagonals for one block.  A cell's
// neighbour contributes -1 off-diagonal only when it lies inside the block;
// in-image neighbours outside the block show up in cut(p).  Cells are written
// at base + ly * row_stride + lx so callers may use a padded layout.
template <class KnownOut, class DiagOut>
void fill_local_structure(const InpaintingMask& mask, const Subdomain& sd,
                          SchwarzFlavour flavour, double alpha, KnownOut& known, DiagOut& diag,
                          int row_stride, std::size_t base) {
  const int w = mask.width, h = mask.height;
  for (int ly = 0; ly < sd.height; ++ly) {
    const int gy = sd.y0 + ly;
    for (int lx = 0; lx < sd.width; ++lx) {
      const int gx = sd.x0 + lx;
      const std::size_t cell = base + static_cast<std::size_t>(ly) * row_stride + lx;
      const std::size_t pixel = static_cast<std::size_t>(gy) * w + gx;
      known[cell] = mask.known[pixel];
      if (known[cell]) {
        diag[cell] = 1.0;
        continue;
      }
      const int deg = (gx > 0) + (gx + 1 < w) + (gy > 0) + (gy + 1 < h);
      int cut = 0;
      cut += gx > 0 && lx == 0;
      cut += gx + 1 < w && lx + 1 == sd.width;
      cut += gy > 0 && ly == 0;
      cut += gy + 1 < h && ly + 1 == sd.height;
      diag[cell] = flavour == SchwarzFlavour::Ras
                       ? static_cast<double>(deg)
                       : deg + (alpha - 1.0) * cut;
    }
  }
}

}  // namespace detail

inline LocalOperator build_local_operator(const InpaintingMask& mask,
                                          const SubdomainPartition& part, std::size_t index,
                                          SchwarzFlavour flavour,
                                          double alpha = kDefaultOrasAlpha) {
  detail::check_arg(index < part.size(), "build_local_operator: subdomain index out of range");
  detail::check_arg(mask.width == part.image_width && mask.height == part.image_height,
                    "build_local_operator: mask and partition dimensions differ");
  const Subdomain& sd = part.subdomains[index];
  LocalOperator op;
  op.width = sd.width;
  op.height = sd.height;
  op.known.resize(sd.cell_count());
  op.diag.resize(sd.cell_count());
  detail::fill_local_structure(mask, sd, flavour, alpha, op.known, op.diag, sd.width, 0);
  return op;
}

namespace detail {

// Full-block 5-point stencil on a grid padded by one ghost ring.  All CG
// vectors keep known and ghost slots pinned at exactly zero, so couplings
// into those slots vanish on their own and the inner loop needs no bounds
// tests or index indirection.
struct LocalStencilOperator {
  int width = 0, height = 0;     // interior (block) extent
  const double* unk = nullptr;   // 1.0 at unknown cells, 0.0 at known/ghost
  const double* diag = nullptr;  // padded Robin diagonals
  std::size_t padded = 0;

  std::size_t size() const { return padded; }

  void apply(std::span<const double> v, std::span<double> out) const {
    const int wp = width + 2;
    for (int row = 1; row <= height; ++row) {
      const std::size_t off = static_cast<std::size_t>(row) * wp;
      const double* vc = v.data() + off;
      const double* d = diag + off;
      const double* u = unk + off;
      double* o = out.data() + off;
      for (int col = 1; col <= width; ++col) {
        o[col] = u[col] * (d[col] * vc[col] - vc[col - 1] - vc[col + 1] - vc[col - wp] -
                           vc[col + wp]);
      }
    }
  }
};

// Per-worker storage for local solves.  Arrays named p* use the padded
// layout; v stays cell-ordered because the gather/scatter helpers do.
struct LocalScratch {
  std::vector<double> unk, knw;  // 1.0/0.0 masks over padded cells
  std::vector<double> diag;      // padded Robin diagonals (1.0 at knowns)
  std::vector<double> v;         // residual slice in, correction out
  std::vector<double> pv, rhs, x;
  CgWorkspace cg;
};

struct LocalSolveStats {
  int iterations = 0;
  bool converged = false;
};

// Builds the padded block structure once per (block, flavour); channel-
// independent.  Returns the number of unknown cells.
inline std::size_t prepare_local_block(const InpaintingMask& mask, const Subdomain& sd,
                                       SchwarzFlavour flavour, double alpha, LocalScratch& s) {
  const int wp = sd.width + 2;
  const std::size_t padded = static_cast<std::size_t>(wp) * (sd.height + 2);
  s.knw.assign(padded, 0.0);
  s.diag.assign(padded, 0.0);
  s.unk.assign(padded, 0.0);
  if (s.v.size() < sd.cell_count()) s.v.resize(sd.cell_count());
  fill_local_structure(mask, sd, flavour, alpha, s.knw, s.diag, wp, wp + 1);
  std::size_t m = 0;
  for (int ly = 0; ly < sd.height; ++ly) {
    double* unk = s.unk.data() + static_cast<std::size_t>(ly + 1) * wp + 1;
    const double* knw = s.knw.data() + static_cast<std::size_t>(ly + 1) * wp + 1;
    for (int lx = 0; lx < sd.width; ++lx) {
      unk[lx] = 1.0 - knw[lx];
      m += knw[lx] == 0.0;
    }
  }
  return m;
}

// Solves the block system against the residual slice already gathered into
// s.v (cell-ordered) and overwrites s.v with the local correction.
inline LocalSolveStats solve_local_block(const Subdomain& sd, std::size_t m,
                                         const SolverConfig& cfg, LocalScratch& s) {
  LocalSolveStats stats;
  if (m == 0) {  // every cell known: correction equals the residual
    stats.converged = true;
    return stats;
  }
  const int wp = sd.width + 2;
  const std::size_t padded = static_cast<std::size_t>(wp) * (sd.height + 2);
  s.pv.assign(padded, 0.0);
  for (int ly = 0; ly < sd.height; ++ly) {
    const double* src = s.v.data() + static_cast<std::size_t>(ly) * sd.width;
    double* dst = s.pv.data() + static_cast<std::size_t>(ly + 1) * wp + 1;
    for (int lx = 0; lx < sd.width; ++lx) dst[lx] = src[lx];
  }
  // Eliminate known cells: their correction is the residual itself, and it
  // feeds the right-hand side of in-block unknown neighbours.
  s.rhs.assign(padded, 0.0);
  for (int row = 1; row <= sd.height; ++row) {
    const std::size_t off = static_cast<std::size_t>(row) * wp;
    const double* pv = s.pv.data() + off;
    const double* kn = s.knw.data() + off;
    const double* u = s.unk.data() + off;
    double* rhs = s.rhs.data() + off;
    for (int col = 1; col <= sd.width; ++col) {
      rhs[col] = u[col] * (pv[col] + kn[col - 1] * pv[col - 1] + kn[col + 1] * pv[col + 1] +
                           kn[col - wp] * pv[col - wp] + kn[col + wp] * pv[col + wp]);
    }
  }
  const LocalStencilOperator op{sd.width, sd.height, s.unk.data(), s.diag.data(), padded};
  s.x.assign(padded, 0.0);
  s.cg.r.assign(padded, 0.0);
  s.cg.Ap.assign(padded, 0.0);
  auto report = cg_solve(op, std::span<const double>(s.rhs.data(), padded), s.x, cfg,
                         [](int, double) {}, s.cg);
  // Known slots keep the gathered residual; unknown slots take the CG result.
  for (int ly = 0; ly < sd.height; ++ly) {
    double* dst = s.v.data() + static_cast<std::size_t>(ly) * sd.width;
    const std::size_t off = static_cast<std::size_t>(ly + 1) * wp + 1;
    const double* x = s.x.data() + off;
    const double* unk = s.unk.data() + off;
    for (int lx = 0; lx < sd.width; ++lx) {
      if (unk[lx] != 0.0) dst[lx] = x[lx];
    }
  }
  stats.iterations = report.iterations;
  stats.converged = report.converged;
  return stats;
}

}  // namespace detail

struct LevelRunStats {
  int iterations = 0;
  double final_rel = 0.0;
  bool converged = false;
  long long local_solves = 0;
  long long local_failures = 0;  // local CG hit its cap or broke down
};

// Outer Schwarz loop over all channels of one level.  The sink is called as
// row(iteration, rel) for every outer iteration, iteration 0 included (the
// state before the first update); rel is the true joint residual divided by
// r0_norm.  r0_norm == 0 counts as already converged.
template <class RowSink>
LevelRunStats run_schwarz_level(const InpaintingOperator& op, const SubdomainPartition& part,
                                const std::vector<ChannelVector>& b,
                                std::vector<ChannelVector>& u, double r0_norm, double tolerance,
                                const SchwarzOptions& opt, RowSink&& row) {
  detail::check_arg(part.image_width == op.width() && part.image_height == op.height(),
                    "run_schwarz_level: partition and operator dimensions differ");
  detail::check_arg(!b.empty() && b.size() == u.size(),
                    "run_schwarz_level: channel count mismatch");
  detail::check_arg(opt.flavour == SchwarzFlavour::Ras || std::isfinite(opt.alpha),
                    "run_schwarz_level: alpha must be finite");
  const std::size_t nc = b.size();
  const std::size_t n = op.size();
  for (std::size_t c = 0; c < nc; ++c) {
    detail::check_arg(b[c].size() == n && u[c].size() == n,
                      "run_schwarz_level: vector length mismatch");
  }

  LevelRunStats stats;
  std::vector<ChannelVector> r(nc, ChannelVector(n));
  std::atomic<long long> failures{0};

  for (int outer = 0;; ++outer) {
    double joint_sq = 0.0;
    for (std::size_t c = 0; c < nc; ++c) {
      residual_into(op, u[c], b[c], r[c]);
      const double nrm = vec::norm(r[c]);
      joint_sq += nrm * nrm;
    }
    const double rel = r0_norm > 0.0 ? std::sqrt(joint_sq) / r0_norm : 0.0;
    row(outer, rel);
    stats.iterations = outer;
    stats.final_rel = rel;
    if (rel <= tolerance) {
      stats.converged = true;
      break;
    }
    if (outer >= opt.max_outer_iterations) break;

    parallel::parallel_for(part.size(), 1, [&](std::size_t begin, std::size_t end) {
      thread_local detail::LocalScratch scratch;
      for (std::size_t i = begin; i < end; ++i) {
        const Subdomain& sd = part.subdomains[i];
        const std::size_t m =
            detail::prepare_local_block(op.mask(), sd, opt.flavour, opt.alpha, scratch);
        for (std::size_t c = 0; c < nc; ++c) {
          restrict_block_into(part, i, r[c], std::span(scratch.v.data(), sd.cell_count()));
          const auto local = detail::solve_local_block(sd, m, opt.local, scratch);
          if (!local.converged) failures.fetch_add(1, std::memory_order_relaxed);
          accumulate_owned(part, i, std::span(scratch.v.data(), sd.cell_count()), u[c]);
        }
      }
    });
    stats.local_solves += static_cast<long long>(part.size()) * static_cast<long long>(nc);
  }
  stats.local_failures = failures.load();
  return stats;
}

struct SchwarzSolveOptions {
  SchwarzOptions schwarz;
  double tolerance = 1e-3;
  ResidualNormalizer normalizer = ResidualNormalizer::InitialGuess;
};

// Canonical initial guess u0 = b and its residual norm, the scale every
// relative residual in this library is measured against.
inline double canonical_r0(const InpaintingOperator& op, const std::vector<ChannelVector>& b,
                           ResidualNormalizer normalizer) {
  if (normalizer == ResidualNormalizer::RhsNorm) {
    double acc = 0.0;
    for (const auto& bc : b) {
      const double nrm = vec::norm(bc);
      acc += nrm * nrm;
    }
    return std::sqrt(acc);
  }
  std::vector<ChannelVector> u0(b.begin(), b.end());
  return multi_residual_norm(op, u0, b);
}

// Single-level Schwarz inpainting of all channels of f.  When a reference
// image is supplied each trace row also records PSNR against it.
inline SolveResult solve_schwarz(const ImageBuffer& f, const InpaintingMask& mask,
                                 const SubdomainPartition& partition,
                                 const SchwarzSolveOptions& options,
                                 const ImageBuffer* reference = nullptr) {
  require_same_grid(f, mask);
  detail::check_arg(options.tolerance > 0.0, "solve_schwarz: tolerance must be positive");
  Stopwatch clock;
  InpaintingOperator op(mask);
  const std::size_t nc = static_cast<std::size_t>(f.channels);
  std::vector<ChannelVector> b(nc);
  for (std::size_t c = 0; c < nc; ++c) {
    auto span = f.channel(static_cast<int>(c));
    b[c] = build_rhs(span, mask);
  }
  std::vector<ChannelVector> u(b.begin(), b.end());  // u0 = b
  const double r0 = canonical_r0(op, b, options.normalizer);

  SolveResult result;
  result.image = ImageBuffer(f.width, f.height, f.channels);
  auto sink = [&](int iter, double rel) {
    std::optional<double> quality;
    if (reference) {
      for (std::size_t c = 0; c < nc; ++c) {
        std::copy(u[c].begin(), u[c].end(), result.image.channel(static_cast<int>(c)).begin());
      }
      quality = psnr(result.image, *reference);
    }
    result.trace.append(iter, clock.elapsed_ms(), rel, quality);
  };
  const auto stats =
      run_schwarz_level(op, partition, b, u, r0, options.tolerance, options.schwarz, sink);

  for (std::size_t c = 0; c < nc; ++c) {
    std::copy(u[c].begin(), u[c].end(), result.image.channel(static_cast<int>(c)).begin());
  }
  result.report.iterations = stats.iterations;
  result.report.final_relative_residual = stats.final_rel;
  result.report.converged = stats.converged;
  if (!stats.converged) result.report.diagnostic = "schwarz: outer iteration cap reached";
  return result;
}

}  // namespace schwarz_inpaint
