// Command-line front end: inpaint a masked image, generate masks, compare
// solver variants, or benchmark across resolutions.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "schwarz_inpaint/masks.hpp"
#include "schwarz_inpaint/methods.hpp"
#include "schwarz_inpaint/metrics.hpp"
#include "schwarz_inpaint/pnm.hpp"
#include "schwarz_inpaint/synthetic.hpp"

namespace si = schwarz_inpaint;

namespace {

struct SolverFlags {
  double tol = 1e-3;
  int levels = 3;
  int block = 32;
  int overlap = 6;
  double alpha = si::kDefaultOrasAlpha;
  int threads = 0;
};

void add_solver_flags(CLI::App* cmd, SolverFlags& flags) {
  cmd->add_option("--tol", flags.tol, "relative residual tolerance")->capture_default_str();
  cmd->add_option("--levels", flags.levels, "pyramid depth for multilevel methods")
      ->capture_default_str();
  cmd->add_option("--block", flags.block, "subdomain block size")->capture_default_str();
  cmd->add_option("--overlap", flags.overlap, "subdomain overlap")->capture_default_str();
  cmd->add_option("--alpha", flags.alpha, "Robin weight for ORAS transmission")
      ->capture_default_str();
  cmd->add_option("--threads", flags.threads, "worker threads (0 = all cores)")
      ->envname("SCHWARZ_INPAINT_THREADS")
      ->capture_default_str();
}

si::RunOptions to_run_options(const SolverFlags& flags) {
  si::RunOptions opt;
  opt.tolerance = flags.tol;
  opt.levels = flags.levels;
  opt.block_size = flags.block;
  opt.overlap = flags.overlap;
  opt.alpha = flags.alpha;
  return opt;
}

void write_trace_csv(const std::string& path, const si::ConvergenceTrace& trace) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  trace.write_csv(out);
  if (!out.good()) throw std::runtime_error("write failure on " + path);
}

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> items;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

// "640x480" -> (640, 480)
std::pair<int, int> parse_resolution(const std::string& spec) {
  const auto x = spec.find('x');
  if (x == std::string::npos) {
    throw std::invalid_argument("bad resolution '" + spec + "' (expected WIDTHxHEIGHT)");
  }
  try {
    const int w = std::stoi(spec.substr(0, x));
    const int h = std::stoi(spec.substr(x + 1));
    if (w < 1 || h < 1) throw std::invalid_argument("");
    return {w, h};
  } catch (const std::exception&) {
    throw std::invalid_argument("bad resolution '" + spec + "' (expected WIDTHxHEIGHT)");
  }
}

int run_inpaint(const std::string& image_path, const std::string& mask_path,
                const std::string& out_path, const std::string& method_name_str,
                const SolverFlags& flags, const std::string& trace_path,
                const std::string& reference_path) {
  const si::Method method = si::parse_method(method_name_str);
  const si::ImageBuffer image = si::read_pnm(image_path);
  const si::InpaintingMask mask = si::read_mask_pbm(mask_path, image.width, image.height);
  si::ImageBuffer reference;
  const bool have_reference = !reference_path.empty();
  if (have_reference) reference = si::read_pnm(reference_path);

  si::parallel::set_thread_count(flags.threads);
  si::Stopwatch clock;
  const si::SolveResult result = si::run_method(method, image, mask, to_run_options(flags),
                                                have_reference ? &reference : nullptr);
  const double elapsed = clock.elapsed_ms();

  si::write_pnm(out_path, result.image);
  if (!trace_path.empty()) write_trace_csv(trace_path, result.trace);

  std::printf("%s: %dx%d, %d channels, %.1f%% known\n", method_name_str.c_str(), image.width,
              image.height, image.channels, 100.0 * mask.density());
  std::printf("iterations %d, relative residual %.3e, %.1f ms\n", result.report.iterations,
              result.report.final_relative_residual, elapsed);
  if (have_reference) {
    std::printf("psnr %.2f dB\n", si::psnr(result.image, reference));
  }
  if (!result.report.converged) {
    std::fprintf(stderr, "warning: did not converge (%s)\n", result.report.diagnostic.c_str());
    return 2;
  }
  return 0;
}

int run_mask(const std::string& image_path, const std::string& out_path, double density,
             const std::string& strategy, std::uint64_t seed, double initial_density,
             int max_sweeps, double inner_tol) {
  const si::ImageBuffer image = si::read_pnm(image_path);
  si::InpaintingMask mask;
  if (strategy == "random") {
    mask = si::random_mask(image.width, image.height, density, seed);
  } else if (strategy == "voronoi") {
    si::DensifyOptions opts;
    opts.initial_density = initial_density;
    opts.max_sweeps = max_sweeps;
    opts.inner_tolerance = inner_tol;
    const si::DensifyResult result = si::voronoi_densify(image, density, seed, opts);
    mask = result.mask;
    std::printf("densified over %d sweeps\n", result.sweeps);
    if (!result.reached_target) {
      std::fprintf(stderr, "warning: sweep cap hit before the target density\n");
    }
  } else {
    throw std::invalid_argument("unknown strategy '" + strategy + "' (random or voronoi)");
  }
  si::write_mask_pbm(out_path, mask);
  std::printf("%zu known pixels (%.2f%%) -> %s\n", mask.known_count(), 100.0 * mask.density(),
              out_path.c_str());
  return 0;
}

int run_compare(const std::string& image_path, const std::string& mask_path,
                const std::string& methods_csv, const SolverFlags& flags,
                const std::string& out_dir) {
  const si::ImageBuffer image = si::read_pnm(image_path);
  const si::InpaintingMask mask = si::read_mask_pbm(mask_path, image.width, image.height);
  si::parallel::set_thread_count(flags.threads);
  std::filesystem::create_directories(out_dir);

  std::ofstream summary(out_dir + "/summary.csv", std::ios::trunc);
  if (!summary) throw std::runtime_error("cannot open " + out_dir + "/summary.csv for writing");
  summary << "method,converged,iterations,time_ms,rel_residual,psnr\n";

  bool all_converged = true;
  for (const std::string& name : split_list(methods_csv)) {
    const si::Method method = si::parse_method(name);
    si::Stopwatch clock;
    const si::SolveResult result =
        si::run_method(method, image, mask, to_run_options(flags), &image);
    const double elapsed = clock.elapsed_ms();
    write_trace_csv(out_dir + "/trace_" + name + ".csv", result.trace);

    const double quality = si::psnr(result.image, image);
    char line[256];
    std::snprintf(line, sizeof line, "%s,%d,%d,%.3f,%.9e,%.4f", name.c_str(),
                  result.report.converged ? 1 : 0, result.report.iterations, elapsed,
                  result.report.final_relative_residual, quality);
    summary << line << '\n';
    std::printf("%-7s %5d iterations  %10.1f ms  rel %.3e  psnr %.2f dB%s\n", name.c_str(),
                result.report.iterations, elapsed, result.report.final_relative_residual,
                quality, result.report.converged ? "" : "  [not converged]");
    all_converged = all_converged && result.report.converged;
  }
  if (!summary.good()) throw std::runtime_error("write failure on " + out_dir + "/summary.csv");
  return all_converged ? 0 : 2;
}

int run_bench(const std::string& image_path, const std::string& resolutions_csv, double density,
              const std::string& methods_csv, const SolverFlags& flags, std::uint64_t seed,
              const std::string& out_path) {
  const si::ImageBuffer source = si::read_pnm(image_path);
  si::parallel::set_thread_count(flags.threads);

  std::ofstream out(out_path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + out_path + " for writing");
  out << "pixels,method,time_ms\n";

  const auto methods = split_list(methods_csv);
  const auto resolutions = split_list(resolutions_csv);
  if (resolutions.empty()) throw std::invalid_argument("no resolutions given");

  std::vector<std::vector<double>> times(methods.size());
  std::vector<double> pixel_counts;
  bool all_converged = true;

  for (std::size_t ri = 0; ri < resolutions.size(); ++ri) {
    const auto [w, h] = parse_resolution(resolutions[ri]);
    const si::ImageBuffer image = si::box_downsample(source, w, h);
    const si::InpaintingMask mask = si::random_mask(w, h, density, seed + ri);
    pixel_counts.push_back(static_cast<double>(w) * h);

    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
      const si::Method method = si::parse_method(methods[mi]);
      si::Stopwatch clock;
      const si::SolveResult result = si::run_method(method, image, mask, to_run_options(flags));
      const double elapsed = clock.elapsed_ms();
      times[mi].push_back(elapsed);
      all_converged = all_converged && result.report.converged;

      char line[128];
      std::snprintf(line, sizeof line, "%lld,%s,%.3f",
                    static_cast<long long>(pixel_counts.back()), methods[mi].c_str(), elapsed);
      out << line << '\n';
      std::printf("%9s  %-7s %10.1f ms%s\n", resolutions[ri].c_str(), methods[mi].c_str(),
                  elapsed, result.report.converged ? "" : "  [not converged]");
    }
  }
  if (!out.good()) throw std::runtime_error("write failure on " + out_path);

  // Least-squares slope of log(time) against log(pixels): 1.0 is linear
  // scaling in the pixel count.
  if (pixel_counts.size() >= 2) {
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      const double n = static_cast<double>(pixel_counts.size());
      for (std::size_t i = 0; i < pixel_counts.size(); ++i) {
        const double x = std::log(pixel_counts[i]);
        const double y = std::log(times[mi][i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
      }
      const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
      std::printf("%-7s time ~ pixels^%.3f\n", methods[mi].c_str(), slope);
    }
  }
  return all_converged ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse image inpainting by homogeneous diffusion"};
  app.require_subcommand(1);

  // inpaint
  auto* inpaint = app.add_subcommand("inpaint", "reconstruct an image from a sparse mask");
  std::string image_path, mask_path, out_path, method = "mloras", trace_path, reference_path;
  SolverFlags inpaint_flags;
  inpaint->add_option("--image", image_path, "input image (PGM/PPM)")->required();
  inpaint->add_option("--mask", mask_path, "mask of known pixels (PBM, set bit = known)")
      ->required();
  inpaint->add_option("--out", out_path, "output image path")->required();
  inpaint->add_option("--method", method, "cg, mlcg, ras, oras or mloras")
      ->capture_default_str();
  add_solver_flags(inpaint, inpaint_flags);
  inpaint->add_option("--trace", trace_path, "write per-iteration CSV trace here");
  inpaint->add_option("--reference", reference_path, "ground-truth image for PSNR reporting");

  // mask
  auto* mask_cmd = app.add_subcommand("mask", "generate an inpainting mask for an image");
  std::string mask_image, mask_out, strategy = "voronoi";
  double density = 0.0, initial_density = 0.0, inner_tol = 1e-3;
  std::uint64_t mask_seed = 1;
  int max_sweeps = 100;
  mask_cmd->add_option("--image", mask_image, "input image (PGM/PPM)")->required();
  mask_cmd->add_option("--density", density, "target fraction of known pixels")->required();
  mask_cmd->add_option("--out", mask_out, "output mask path (PBM)")->required();
  mask_cmd->add_option("--strategy", strategy, "random or voronoi")->capture_default_str();
  mask_cmd->add_option("--seed", mask_seed, "RNG seed")->capture_default_str();
  mask_cmd->add_option("--initial-density", initial_density,
                       "voronoi: starting density (0 = target/4)");
  mask_cmd->add_option("--sweeps", max_sweeps, "voronoi: densification sweep cap")
      ->capture_default_str();
  mask_cmd->add_option("--inner-tol", inner_tol, "voronoi: tolerance of guiding solves")
      ->capture_default_str();

  // compare
  auto* compare = app.add_subcommand("compare", "run several methods on one instance");
  std::string cmp_image, cmp_mask, cmp_methods = "cg,mlcg,ras,oras,mloras", cmp_out_dir;
  SolverFlags compare_flags;
  compare->add_option("--image", cmp_image, "input image (PGM/PPM)")->required();
  compare->add_option("--mask", cmp_mask, "mask of known pixels (PBM)")->required();
  compare->add_option("--methods", cmp_methods, "comma-separated method list")
      ->capture_default_str();
  compare->add_option("--out-dir", cmp_out_dir, "directory for traces and summary.csv")
      ->required();
  add_solver_flags(compare, compare_flags);

  // bench
  auto* bench = app.add_subcommand("bench", "time methods across resolutions");
  std::string bench_image, bench_res = "240x135,480x270,960x540,1920x1080";
  std::string bench_methods = "mloras,mlcg", bench_out;
  double bench_density = 0.05;
  std::uint64_t bench_seed = 1;
  SolverFlags bench_flags;
  bench->add_option("--image", bench_image, "source image, downsampled per resolution")
      ->required();
  bench->add_option("--resolutions", bench_res, "comma-separated WIDTHxHEIGHT list")
      ->capture_default_str();
  bench->add_option("--density", bench_density, "known-pixel fraction per instance")
      ->capture_default_str();
  bench->add_option("--methods", bench_methods, "comma-separated method list")
      ->capture_default_str();
  bench->add_option("--seed", bench_seed, "mask RNG seed")->capture_default_str();
  bench->add_option("--out", bench_out, "output CSV path")->required();
  add_solver_flags(bench, bench_flags);

  CLI11_PARSE(app, argc, argv);

  try {
    if (inpaint->parsed()) {
      return run_inpaint(image_path, mask_path, out_path, method, inpaint_flags, trace_path,
                         reference_path);
    }
    if (mask_cmd->parsed()) {
      return run_mask(mask_image, mask_out, density, strategy, mask_seed, initial_density,
                      max_sweeps, inner_tol);
    }
    if (compare->parsed()) {
      return run_compare(cmp_image, cmp_mask, cmp_methods, compare_flags, cmp_out_dir);
    }
    if (bench->parsed()) {
      return run_bench(bench_image, bench_res, bench_density, bench_methods, bench_flags,
                       bench_seed, bench_out);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
