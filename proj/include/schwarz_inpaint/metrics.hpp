#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <vector>

#include "schwarz_inpaint/cg.hpp"
#include "schwarz_inpaint/image.hpp"

namespace schwarz_inpaint {

class Stopwatch {
 public:
  Stopwatch() : start_(clock::now()) {}
  void restart() { start_ = clock::now(); }
  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(clock::now() - start_).count();
  }

 private:
  using clock = std::chrono::steady_clock;
  clock::time_point start_;
};

// Mean squared error per channel in 8-bit units: mean of (255 u - 255 f)^2.
inline std::vector<double> mse_per_channel(const ImageBuffer& u, const ImageBuffer& f) {
  detail::check_arg(u.width == f.width && u.height == f.height && u.channels == f.channels,
                    "mse_per_channel: image dimensions differ");
  std::vector<double> out(u.channels);
  for (int c = 0; c < u.channels; ++c) {
    auto a = u.channel(c);
    auto b = f.channel(c);
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double d = 255.0 * (a[i] - b[i]);
      acc += d * d;
    }
    out[c] = acc / static_cast<double>(a.size());
  }
  return out;
}

// PSNR in dB against peak 255, averaged over channels; +infinity when the
// images are identical.
inline double psnr(const ImageBuffer& u, const ImageBuffer& f) {
  const auto mse = mse_per_channel(u, f);
  double mean = 0.0;
  for (double m : mse) mean += m;
  mean /= static_cast<double>(mse.size());
  if (mean == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(255.0 * 255.0 / mean);
}

struct TraceRow {
  int iteration = 0;
  double time_ms = 0.0;
  double rel_residual = 0.0;
  std::optional<double> psnr;
};

// Per-iteration convergence log; serialises to the CSV schema
// iter,time_ms,rel_residual,psnr (psnr column empty when not tracked).
struct ConvergenceTrace {
  static constexpr const char* kCsvHeader = "iter,time_ms,rel_residual,psnr";

  std::vector<TraceRow> rows;

  void append(int iteration, double time_ms, double rel_residual,
              std::optional<double> psnr_db = std::nullopt) {
    rows.push_back({iteration, time_ms, rel_residual, psnr_db});
  }

  void write_csv(std::ostream& os) const {
    os << kCsvHeader << '\n';
    char buf[160];
    for (const auto& row : rows) {
      std::snprintf(buf, sizeof buf, "%d,%.3f,%.9e", row.iteration, row.time_ms,
                    row.rel_residual);
      os << buf;
      if (row.psnr) {
        if (std::isinf(*row.psnr)) {
          os << ",inf";
        } else {
          std::snprintf(buf, sizeof buf, ",%.4f", *row.psnr);
          os << buf;
        }
      } else {
        os << ',';
      }
      os << '\n';
    }
  }
};

// Everything a solve hands back: the reconstruction, the finest-level
// convergence trace, and the solver's own report.
struct SolveResult {
  ImageBuffer image;
  ConvergenceTrace trace;
  SolveReport report;
};

}  // namespace schwarz_inpaint
