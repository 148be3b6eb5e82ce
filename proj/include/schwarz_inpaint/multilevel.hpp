#pragma once

// Coarse-to-fine solving on a dyadic mask pyramid.
//
// Each coarse pixel covers a 2x2 block of fine pixels (clipped at odd
// edges).  A coarse pixel is known if any fine pixel under it is known, and
// its value defaults to the mean of the known fine pixels only — averaging
// in unknown (zero-filled) values would bias the coarse data, but that
// variant stays available behind the switch.  Coarse levels are solved to a
// loose tolerance and prolongated (cell-centred bilinear) as the next
// initial guess, with known pixels snapped back to their exact values.
//
// Relative residuals on every level are measured against that level's
// canonical initial guess u0 = b, so the finest-level trace of a multilevel
// run is directly comparable to a single-level run on the same data.

#include <algorithm>
#include <vector>

#include "schwarz_inpaint/reduction.hpp"
#include "schwarz_inpaint/schwarz.hpp"

namespace schwarz_inpaint {

enum class CoarseAveraging { KnownOnly, AllPixels };

struct LevelProblem {
  InpaintingMask mask;
  ImageBuffer values;  // known pixels carry data, unknown pixels are zero
};

// One restriction step: fine level -> coarse level at ceil(dim / 2).
inline LevelProblem restrict_level(const InpaintingMask& mask, const ImageBuffer& values,
                                   CoarseAveraging averaging = CoarseAveraging::KnownOnly) {
  require_same_grid(values, mask);
  detail::check_arg(mask.width >= 2 && mask.height >= 2,
                    "restrict_level: fine grid must be at least 2x2");
  const int fw = mask.width, fh = mask.height;
  const int cw = (fw + 1) / 2, ch = (fh + 1) / 2;
  LevelProblem coarse;
  coarse.mask = InpaintingMask(cw, ch);
  coarse.values = ImageBuffer(cw, ch, values.channels);
  for (int cy = 0; cy < ch; ++cy) {
    const int fy0 = 2 * cy, fy1 = std::min(fy0 + 2, fh);
    for (int cx = 0; cx < cw; ++cx) {
      const int fx0 = 2 * cx, fx1 = std::min(fx0 + 2, fw);
      int known_count = 0, total = 0;
      for (int y = fy0; y < fy1; ++y) {
        for (int x = fx0; x < fx1; ++x) {
          known_count += mask.is_known(x, y);
          ++total;
        }
      }
      if (known_count == 0) continue;
      coarse.mask.known[static_cast<std::size_t>(cy) * cw + cx] = 1;
      for (int c = 0; c < values.channels; ++c) {
        double acc = 0.0;
        for (int y = fy0; y < fy1; ++y) {
          for (int x = fx0; x < fx1; ++x) {
            if (averaging == CoarseAveraging::KnownOnly && !mask.is_known(x, y)) continue;
            acc += values.at(x, y, c);
          }
        }
        coarse.values.at(cx, cy, c) =
            acc / (averaging == CoarseAveraging::KnownOnly ? known_count : total);
      }
    }
  }
  return coarse;
}

// Levels from fine to coarse; level 0 holds the input data (unknown pixels
// zeroed).  Stops early once a level cannot be halved again.
inline std::vector<LevelProblem> build_pyramid(const ImageBuffer& f, const InpaintingMask& mask,
                                               int levels,
                                               CoarseAveraging averaging = CoarseAveraging::KnownOnly) {
  require_same_grid(f, mask);
  detail::check_arg(levels >= 1, "build_pyramid: levels must be >= 1");
  std::vector<LevelProblem> pyramid;
  pyramid.reserve(levels);
  LevelProblem base;
  base.mask = mask;
  base.values = ImageBuffer(f.width, f.height, f.channels);
  for (int c = 0; c < f.channels; ++c) {
    auto src = f.channel(c);
    auto dst = base.values.channel(c);
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = mask.known[i] ? src[i] : 0.0;
  }
  pyramid.push_back(std::move(base));
  while (static_cast<int>(pyramid.size()) < levels) {
    const auto& fine = pyramid.back();
    if (fine.mask.width < 2 || fine.mask.height < 2) break;
    pyramid.push_back(restrict_level(fine.mask, fine.values, averaging));
  }
  return pyramid;
}

// Cell-centred bilinear interpolation from a ceil(fw/2) x ceil(fh/2) grid
// onto fw x fh: fine pixel centre fx maps to coarse coordinate
// 0.5 fx - 0.25, clamped at the edges.
inline ChannelVector prolongate(std::span<const double> coarse, int cw, int ch, int fw, int fh) {
  detail::check_arg(cw == (fw + 1) / 2 && ch == (fh + 1) / 2,
                    "prolongate: coarse grid is not the dyadic parent of the fine grid");
  detail::check_arg(coarse.size() == static_cast<std::size_t>(cw) * ch,
                    "prolongate: coarse vector length mismatch");
  ChannelVector fine(static_cast<std::size_t>(fw) * fh);
  for (int fy = 0; fy < fh; ++fy) {
    double yc = 0.5 * fy - 0.25;
    yc = std::clamp(yc, 0.0, static_cast<double>(ch - 1));
    const int y0 = static_cast<int>(yc);
    const int y1 = std::min(y0 + 1, ch - 1);
    const double ty = yc - y0;
    for (int fx = 0; fx < fw; ++fx) {
      double xc = 0.5 * fx - 0.25;
      xc = std::clamp(xc, 0.0, static_cast<double>(cw - 1));
      const int x0 = static_cast<int>(xc);
      const int x1 = std::min(x0 + 1, cw - 1);
      const double tx = xc - x0;
      const double v00 = coarse[static_cast<std::size_t>(y0) * cw + x0];
      const double v01 = coarse[static_cast<std::size_t>(y0) * cw + x1];
      const double v10 = coarse[static_cast<std::size_t>(y1) * cw + x0];
      const double v11 = coarse[static_cast<std::size_t>(y1) * cw + x1];
      fine[static_cast<std::size_t>(fy) * fw + fx] =
          (1.0 - ty) * ((1.0 - tx) * v00 + tx * v01) + ty * ((1.0 - tx) * v10 + tx * v11);
    }
  }
  return fine;
}

enum class LevelSolver { Cg, Ras, Oras };

struct MultilevelSolveOptions {
  int levels = 3;
  double tolerance = 1e-3;         // finest level
  double coarse_tolerance = 1e-2;  // every level above the finest
  CoarseAveraging averaging = CoarseAveraging::KnownOnly;
  int block_size = 32;
  int overlap = 6;
  SchwarzOptions schwarz;              // flavour is overridden by the solver choice
  SolverConfig cg{1e-3, 100000, 4};    // tolerance field is overridden per level
  ResidualNormalizer normalizer = ResidualNormalizer::InitialGuess;
};

// Blocks never exceed the image and the overlap always stays a strict
// subset of a block, so coarse levels of a few pixels remain solvable.
inline SubdomainPartition clamped_partition(int width, int height, int block, int overlap) {
  const int block_eff = std::min(block, std::min(width, height));
  const int overlap_eff = std::max(0, std::min(overlap, block_eff - 1));
  return partition_domain(width, height, block_eff, overlap_eff);
}

namespace detail {

struct LevelOutcome {
  int iterations = 0;
  double final_rel = 0.0;
  bool converged = false;
};

// Lockstep CG on one level, working in the space of unknown pixels.  The
// trace (when sink_active) is normalised by the canonical r0 of this level.
template <class RowSink>
LevelOutcome run_cg_level(const LevelProblem& level, std::vector<ChannelVector>& u,
                          double tolerance, const SolverConfig& base_cfg, bool sink_active,
                          RowSink&& row) {
  const std::size_t nc = u.size();
  const ReducedSystem sys = reduce_structure(level.mask);
  std::vector<ChannelVector> b(nc), rhs(nc), x(nc);
  double r0_sq = 0.0, init_sq = 0.0;
  for (std::size_t c = 0; c < nc; ++c) {
    b[c] = build_rhs(level.values.channel(static_cast<int>(c)), level.mask);
    rhs[c] = reduced_rhs(sys, b[c]);
    const double nrm = vec::norm(rhs[c]);
    r0_sq += nrm * nrm;  // canonical u0 = b has reduced residual b_red
    x[c].resize(sys.size());
    for (std::size_t k = 0; k < sys.size(); ++k) x[c][k] = u[c][sys.pixel_of[k]];
  }
  const double r0 = std::sqrt(r0_sq);
  {
    ChannelVector tmp(sys.size());
    for (std::size_t c = 0; c < nc; ++c) {
      sys.apply(x[c], tmp);
      for (std::size_t k = 0; k < sys.size(); ++k) tmp[k] = rhs[c][k] - tmp[k];
      const double nrm = vec::norm(tmp);
      init_sq += nrm * nrm;
    }
  }
  const double rel0 = r0 > 0.0 ? std::sqrt(init_sq) / r0 : 0.0;
  if (sink_active) row(0, rel0, u);

  SolverConfig cfg = base_cfg;
  cfg.tolerance = tolerance;
  LevelOutcome out;
  auto observer = [&](int iter, double rel) {
    if (!sink_active) return;
    for (std::size_t c = 0; c < nc; ++c) {
      for (std::size_t k = 0; k < sys.size(); ++k) u[c][sys.pixel_of[k]] = x[c][k];
    }
    row(iter, rel, u);
  };
  SolveReport report = cg_solve_lockstep(sys, rhs, x, cfg, r0, observer);
  for (std::size_t c = 0; c < nc; ++c) {
    u[c] = embed_solution(sys, x[c], b[c]);
  }
  out.iterations = report.iterations;
  out.final_rel = report.final_relative_residual;
  out.converged = report.converged;
  return out;
}

template <class RowSink>
LevelOutcome run_schwarz_on_level(const LevelProblem& level, std::vector<ChannelVector>& u,
                                  double tolerance, const MultilevelSolveOptions& opt,
                                  SchwarzFlavour flavour, bool sink_active, RowSink&& row) {
  InpaintingOperator op(level.mask);
  const std::size_t nc = u.size();
  std::vector<ChannelVector> b(nc);
  for (std::size_t c = 0; c < nc; ++c) {
    b[c] = build_rhs(level.values.channel(static_cast<int>(c)), level.mask);
  }
  const SubdomainPartition part =
      clamped_partition(level.mask.width, level.mask.height, opt.block_size, opt.overlap);
  SchwarzOptions sopt = opt.schwarz;
  sopt.flavour = flavour;
  const double r0 = canonical_r0(op, b, opt.normalizer);
  auto sink = [&](int iter, double rel) {
    if (sink_active) row(iter, rel, u);
  };
  const LevelRunStats stats = run_schwarz_level(op, part, b, u, r0, tolerance, sopt, sink);
  return {stats.iterations, stats.final_rel, stats.converged};
}

}  // namespace detail

// Coarse-to-fine inpainting of all channels of f.  levels = 1 degenerates to
// the single-level method.  The result's trace and report describe the
// finest level only; coarse levels contribute their wall-clock time to the
// trace's time_ms column (the clock starts before pyramid construction).
inline SolveResult multilevel_solve(const ImageBuffer& f, const InpaintingMask& mask,
                                    LevelSolver solver, const MultilevelSolveOptions& options,
                                    const ImageBuffer* reference = nullptr) {
  require_same_grid(f, mask);
  detail::check_arg(options.tolerance > 0.0 && options.coarse_tolerance > 0.0,
                    "multilevel_solve: tolerances must be positive");
  Stopwatch clock;
  const auto pyramid = build_pyramid(f, mask, options.levels, options.averaging);
  const int depth = static_cast<int>(pyramid.size());
  const std::size_t nc = static_cast<std::size_t>(f.channels);

  SolveResult result;
  result.image = ImageBuffer(f.width, f.height, f.channels);
  auto row_sink = [&](int iter, double rel, const std::vector<ChannelVector>& u) {
    std::optional<double> quality;
    if (reference) {
      for (std::size_t c = 0; c < nc; ++c) {
        std::copy(u[c].begin(), u[c].end(), result.image.channel(static_cast<int>(c)).begin());
      }
      quality = psnr(result.image, *reference);
    }
    result.trace.append(iter, clock.elapsed_ms(), rel, quality);
  };

  std::vector<ChannelVector> u;
  std::string coarse_note;
  for (int level = depth - 1; level >= 0; --level) {
    const LevelProblem& problem = pyramid[level];
    if (level == depth - 1) {
      // Canonical start on the coarsest level: u0 = b.
      u.assign(nc, ChannelVector());
      for (std::size_t c = 0; c < nc; ++c) {
        u[c] = build_rhs(problem.values.channel(static_cast<int>(c)), problem.mask);
      }
    }
    const bool finest = level == 0;
    const double tol = finest ? options.tolerance : options.coarse_tolerance;
    detail::LevelOutcome outcome;
    if (solver == LevelSolver::Cg) {
      outcome = detail::run_cg_level(problem, u, tol, options.cg, finest, row_sink);
    } else {
      const SchwarzFlavour flavour =
          solver == LevelSolver::Ras ? SchwarzFlavour::Ras : SchwarzFlavour::Oras;
      outcome = detail::run_schwarz_on_level(problem, u, tol, options, flavour, finest, row_sink);
    }
    if (finest) {
      result.report.iterations = outcome.iterations;
      result.report.final_relative_residual = outcome.final_rel;
      result.report.converged = outcome.converged;
      if (!outcome.converged) result.report.diagnostic = "multilevel: finest level did not converge";
      if (!coarse_note.empty() && result.report.diagnostic.empty()) {
        result.report.diagnostic = coarse_note;
      }
    } else {
      if (!outcome.converged) coarse_note = "multilevel: a coarse level hit its iteration cap";
      // Seed the next finer level: prolongate, then snap known pixels.
      const LevelProblem& next = pyramid[level - 1];
      for (std::size_t c = 0; c < nc; ++c) {
        u[c] = prolongate(u[c], problem.mask.width, problem.mask.height, next.mask.width,
                          next.mask.height);
        auto values = next.values.channel(static_cast<int>(c));
        for (std::size_t i = 0; i < next.mask.size(); ++i) {
          if (next.mask.known[i]) u[c][i] = values[i];
        }
      }
    }
  }
  for (std::size_t c = 0; c < nc; ++c) {
    std::copy(u[c].begin(), u[c].end(), result.image.channel(static_cast<int>(c)).begin());
  }
  return result;
}

}  // namespace schwarz_inpaint
