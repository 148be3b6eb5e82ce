#pragma once

// Conjugate gradients for SPD systems, matrix-free.
//
// The recurrence residual drives the cheap per-iteration test, but
// convergence is only ever declared after recomputing the true residual
// b - A x from scratch; it is also recomputed (and the recurrence residual
// replaced) every residual_check_interval iterations to bound drift.

#include <cmath>
#include <concepts>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "schwarz_inpaint/image.hpp"
#include "schwarz_inpaint/parallel.hpp"

namespace schwarz_inpaint {

struct SolverConfig {
  double tolerance = 1e-6;         // on ||b - A x|| / ||b - A x0||
  int max_iterations = 10000;
  int residual_check_interval = 1; // true-residual recompute cadence
};

struct SolveReport {
  int iterations = 0;
  double final_relative_residual = 0.0;
  bool converged = false;
  std::string diagnostic;
};

template <class Op>
concept LinearOperator = requires(const Op& op, std::span<const double> x, std::span<double> y) {
  { op.size() } -> std::convertible_to<std::size_t>;
  op.apply(x, y);
};

namespace vec {

// All reductions go through parallel::parallel_sum so results are bitwise
// independent of the thread count.
inline double dot(std::span<const double> a, std::span<const double> b) {
  return parallel::parallel_sum(a.size(), [&](std::size_t i) { return a[i] * b[i]; });
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += alpha * x[i];
}

// p = r + beta p
inline void xpay(std::span<const double> r, double beta, std::span<double> p) {
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = r[i] + beta * p[i];
}

}  // namespace vec

template <LinearOperator Op>
double relative_residual(const Op& op, std::span<const double> u, std::span<const double> b,
                         double r0_norm) {
  detail::check_arg(u.size() == op.size() && b.size() == op.size(),
                    "relative_residual: vector length mismatch");
  if (r0_norm <= 0.0) return 0.0;
  std::vector<double> r(op.size());
  op.apply(u, r);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
  return vec::norm(r) / r0_norm;
}

inline void validate_solver_config(const SolverConfig& cfg) {
  detail::check_arg(cfg.tolerance > 0.0, "SolverConfig: tolerance must be positive");
  detail::check_arg(cfg.max_iterations >= 0, "SolverConfig: max_iterations must be non-negative");
  detail::check_arg(cfg.residual_check_interval >= 1,
                    "SolverConfig: residual_check_interval must be >= 1");
}

// Reusable buffers for cg_solve; callers running many small solves keep one
// of these alive to avoid per-solve allocation.
struct CgWorkspace {
  std::vector<double> r, p, Ap;
};

// Solves A x = b starting from the passed-in x.  The observer is invoked as
// observe(iteration, relative_residual) at every true-residual evaluation.
template <LinearOperator Op, class Observer>
SolveReport cg_solve(const Op& op, std::span<const double> b, std::vector<double>& x,
                     const SolverConfig& cfg, Observer&& observe, CgWorkspace& ws) {
  validate_solver_config(cfg);
  const std::size_t n = op.size();
  detail::check_arg(b.size() == n && x.size() == n, "cg_solve: vector length mismatch");
  SolveReport report;
  if (n == 0) {  // nothing to solve for
    report.converged = true;
    return report;
  }

  ws.r.resize(n);
  ws.p.resize(n);
  ws.Ap.resize(n);
  std::vector<double>&r = ws.r, &p = ws.p, &Ap = ws.Ap;
  op.apply(x, r);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
  const double r0 = vec::norm(r);
  if (r0 == 0.0) {
    report.converged = true;
    return report;
  }

  p = r;
  double rr = vec::dot(r, r);
  double rel = 1.0;
  for (int iter = 1; iter <= cfg.max_iterations; ++iter) {
    op.apply(p, Ap);
    const double pAp = vec::dot(p, Ap);
    if (!(pAp > 0.0) || !std::isfinite(pAp)) {
      report.iterations = iter - 1;
      report.final_relative_residual = rel;
      report.diagnostic = "cg breakdown: non-positive curvature p'Ap = " + std::to_string(pAp);
      return report;
    }
    const double alpha = rr / pAp;
    vec::axpy(alpha, p, x);
    vec::axpy(-alpha, Ap, r);
    double rr_new = vec::dot(r, r);

    const bool cadence = iter % cfg.residual_check_interval == 0 || iter == cfg.max_iterations;
    const bool maybe_done = std::sqrt(rr_new) <= cfg.tolerance * r0;
    if (cadence || maybe_done) {
      op.apply(x, Ap);  // reuse Ap as the true-residual buffer
      for (std::size_t i = 0; i < n; ++i) Ap[i] = b[i] - Ap[i];
      rel = vec::norm(Ap) / r0;
      observe(iter, rel);
      if (rel <= cfg.tolerance) {
        report.iterations = iter;
        report.final_relative_residual = rel;
        report.converged = true;
        return report;
      }
      r = Ap;  // residual replacement keeps the recurrence honest
      rr_new = vec::dot(r, r);
    }
    vec::xpay(r, rr_new / rr, p);
    rr = rr_new;
  }
  report.iterations = cfg.max_iterations;
  report.final_relative_residual = rel;
  report.diagnostic = "cg: max iterations reached";
  return report;
}

template <LinearOperator Op, class Observer>
SolveReport cg_solve(const Op& op, std::span<const double> b, std::vector<double>& x,
                     const SolverConfig& cfg, Observer&& observe) {
  CgWorkspace ws;
  return cg_solve(op, b, x, cfg, observe, ws);
}

template <LinearOperator Op>
SolveReport cg_solve(const Op& op, std::span<const double> b, std::vector<double>& x,
                     const SolverConfig& cfg) {
  CgWorkspace ws;
  return cg_solve(op, b, x, cfg, [](int, double) {}, ws);
}

// Joint residual norm over a stack of channels sharing one operator:
// sqrt(sum_c ||b_c - A u_c||^2).
template <LinearOperator Op>
double multi_residual_norm(const Op& op, const std::vector<ChannelVector>& u,
                           const std::vector<ChannelVector>& b) {
  detail::check_arg(u.size() == b.size(), "multi_residual_norm: channel count mismatch");
  std::vector<double> r(op.size());
  double acc = 0.0;
  for (std::size_t c = 0; c < u.size(); ++c) {
    op.apply(u[c], r);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[c][i] - r[i];
    const double nc = vec::norm(r);
    acc += nc * nc;
  }
  return std::sqrt(acc);
}

// Conjugate gradients over several channels in lockstep with a joint
// stopping test on the concatenated residual.  Each channel keeps its own
// alpha/beta; a channel whose residual is already negligible against the
// joint scale is frozen so it cannot trip the curvature guard.  external_r0
// supplies the normalisation (pass <= 0 to use the initial joint residual).
template <LinearOperator Op, class Observer>
SolveReport cg_solve_lockstep(const Op& op, const std::vector<ChannelVector>& b,
                              std::vector<ChannelVector>& x, const SolverConfig& cfg,
                              double external_r0, Observer&& observe) {
  validate_solver_config(cfg);
  const std::size_t n = op.size();
  const std::size_t nc = b.size();
  detail::check_arg(nc > 0 && x.size() == nc, "cg_solve_lockstep: channel count mismatch");
  for (std::size_t c = 0; c < nc; ++c) {
    detail::check_arg(b[c].size() == n && x[c].size() == n,
                      "cg_solve_lockstep: vector length mismatch");
  }
  SolveReport report;
  if (n == 0) {
    report.converged = true;
    return report;
  }

  std::vector<ChannelVector> r(nc), p(nc);
  std::vector<double> rr(nc), rr_next(nc);
  std::vector<char> frozen(nc, 0);
  ChannelVector Ap(n);
  double joint0_sq = 0.0;
  for (std::size_t c = 0; c < nc; ++c) {
    r[c].resize(n);
    op.apply(x[c], r[c]);
    for (std::size_t i = 0; i < n; ++i) r[c][i] = b[c][i] - r[c][i];
    rr[c] = vec::dot(r[c], r[c]);
    joint0_sq += rr[c];
    p[c] = r[c];
  }
  const double r0 = external_r0 > 0.0 ? external_r0 : std::sqrt(joint0_sq);
  if (r0 == 0.0 || std::sqrt(joint0_sq) <= cfg.tolerance * r0) {
    report.converged = true;
    report.final_relative_residual = r0 == 0.0 ? 0.0 : std::sqrt(joint0_sq) / r0;
    return report;
  }
  const double freeze_sq = 1e-4 * cfg.tolerance * cfg.tolerance * r0 * r0;

  double rel = std::sqrt(joint0_sq) / r0;
  for (int iter = 1; iter <= cfg.max_iterations; ++iter) {
    double joint_sq = 0.0;
    for (std::size_t c = 0; c < nc; ++c) {
      if (frozen[c] || rr[c] <= freeze_sq) {
        frozen[c] = 1;
        rr_next[c] = rr[c];
        joint_sq += rr[c];
        continue;
      }
      op.apply(p[c], Ap);
      const double pAp = vec::dot(p[c], Ap);
      if (!(pAp > 0.0) || !std::isfinite(pAp)) {
        report.iterations = iter - 1;
        report.final_relative_residual = rel;
        report.diagnostic =
            "cg breakdown: non-positive curvature p'Ap = " + std::to_string(pAp) +
            " in channel " + std::to_string(c);
        return report;
      }
      const double alpha = rr[c] / pAp;
      vec::axpy(alpha, p[c], x[c]);
      vec::axpy(-alpha, Ap, r[c]);
      rr_next[c] = vec::dot(r[c], r[c]);
      joint_sq += rr_next[c];
    }

    const bool cadence = iter % cfg.residual_check_interval == 0 || iter == cfg.max_iterations;
    const bool maybe_done = std::sqrt(joint_sq) <= cfg.tolerance * r0;
    if (cadence || maybe_done) {
      double true_sq = 0.0;
      for (std::size_t c = 0; c < nc; ++c) {
        op.apply(x[c], Ap);
        for (std::size_t i = 0; i < n; ++i) Ap[i] = b[c][i] - Ap[i];
        const double nc2 = vec::dot(Ap, Ap);
        true_sq += nc2;
        if (!frozen[c]) {
          r[c] = Ap;  // residual replacement at checkpoints
          rr_next[c] = nc2;
        }
      }
      rel = std::sqrt(true_sq) / r0;
      observe(iter, rel);
      if (rel <= cfg.tolerance) {
        report.iterations = iter;
        report.final_relative_residual = rel;
        report.converged = true;
        return report;
      }
    }
    for (std::size_t c = 0; c < nc; ++c) {
      if (frozen[c]) continue;
      vec::xpay(r[c], rr[c] > 0.0 ? rr_next[c] / rr[c] : 0.0, p[c]);
      rr[c] = rr_next[c];
    }
  }
  report.iterations = cfg.max_iterations;
  report.final_relative_residual = rel;
  report.diagnostic = "cg: max iterations reached";
  return report;
}

}  // namespace schwarz_inpaint
