#pragma once

// Named solver configurations: cg, mlcg, ras, oras, mloras.  Single-level
// methods run the multilevel driver with one level, so every method shares
// the same residual convention and trace plumbing.

#include <string>

#include "schwarz_inpaint/multilevel.hpp"

namespace schwarz_inpaint {

enum class Method { Cg, MultilevelCg, Ras, Oras, MultilevelOras };

inline const char* method_name(Method m) {
  switch (m) {
    case Method::Cg: return "cg";
    case Method::MultilevelCg: return "mlcg";
    case Method::Ras: return "ras";
    case Method::Oras: return "oras";
    case Method::MultilevelOras: return "mloras";
  }
  return "?";
}

inline Method parse_method(const std::string& name) {
  if (name == "cg") return Method::Cg;
  if (name == "mlcg") return Method::MultilevelCg;
  if (name == "ras") return Method::Ras;
  if (name == "oras") return Method::Oras;
  if (name == "mloras") return Method::MultilevelOras;
  throw std::invalid_argument("unknown method '" + name +
                              "' (expected cg, mlcg, ras, oras or mloras)");
}

inline bool is_multilevel(Method m) {
  return m == Method::MultilevelCg || m == Method::MultilevelOras;
}

struct RunOptions {
  double tolerance = 1e-3;
  int levels = 3;  // applies to mlcg / mloras
  int block_size = 32;
  int overlap = 6;
  double alpha = kDefaultOrasAlpha;
  double coarse_tolerance = 1e-2;
  CoarseAveraging averaging = CoarseAveraging::KnownOnly;
  SolverConfig local{1e-2, 30, 30};  // subdomain solves
  int max_outer_iterations = 1000;
  int cg_max_iterations = 100000;
  // Timed CG runs recompute the true residual every few iterations instead
  // of every iteration; convergence is still confirmed on a recomputation.
  int cg_check_interval = 4;
  ResidualNormalizer normalizer = ResidualNormalizer::InitialGuess;
};

inline SolveResult run_method(Method method, const ImageBuffer& f, const InpaintingMask& mask,
                              const RunOptions& options, const ImageBuffer* reference = nullptr) {
  MultilevelSolveOptions ml;
  ml.levels = is_multilevel(method) ? options.levels : 1;
  ml.tolerance = options.tolerance;
  ml.coarse_tolerance = options.coarse_tolerance;
  ml.averaging = options.averaging;
  ml.block_size = options.block_size;
  ml.overlap = options.overlap;
  ml.schwarz.alpha = options.alpha;
  ml.schwarz.local = options.local;
  ml.schwarz.max_outer_iterations = options.max_outer_iterations;
  ml.cg.max_iterations = options.cg_max_iterations;
  ml.cg.residual_check_interval = options.cg_check_interval;
  ml.normalizer = options.normalizer;

  LevelSolver solver = LevelSolver::Oras;
  switch (method) {
    case Method::Cg:
    case Method::MultilevelCg:
      solver = LevelSolver::Cg;
      break;
    case Method::Ras:
      solver = LevelSolver::Ras;
      break;
    case Method::Oras:
    case Method::MultilevelOras:
      solver = LevelSolver::Oras;
      break;
  }
  return multilevel_solve(f, mask, solver, ml, reference);
}

}  // namespace schwarz_inpaint
