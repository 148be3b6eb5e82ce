#include <gtest/gtest.h>

#include <cmath>

#include "schwarz_inpaint/multilevel.hpp"
#include "schwarz_inpaint/methods.hpp"
#include "support/instances.hpp"
#include "support/oracle.hpp"

namespace si = schwarz_inpaint;
using test_support::random_instance;

TEST(Restriction, TwoByTwoAveragingRules) {
  // 4x2 single-channel level; left 2x2 cell has all four pixels known,
  // right cell has exactly one.
  si::LevelProblem fine;
  fine.mask = si::InpaintingMask(4, 2);
  fine.values = si::ImageBuffer(4, 2, 1);
  auto set = [&](int x, int y, double v) {
    fine.mask.known[static_cast<std::size_t>(y) * 4 + x] = 1;
    fine.values.at(x, y, 0) = v;
  };
  set(0, 0, 0.2);
  set(1, 0, 0.4);
  set(0, 1, 0.6);
  set(1, 1, 0.8);
  set(2, 1, 0.3);

  const auto coarse = si::restrict_level(fine.mask, fine.values, si::CoarseAveraging::KnownOnly);
  EXPECT_EQ(coarse.mask.width, 2);
  EXPECT_EQ(coarse.mask.height, 1);
  EXPECT_TRUE(coarse.mask.is_known(0, 0));
  EXPECT_TRUE(coarse.mask.is_known(1, 0));
  EXPECT_NEAR(coarse.values.at(0, 0, 0), 0.5, 1e-15);   // mean of the four knowns
  EXPECT_NEAR(coarse.values.at(1, 0, 0), 0.3, 1e-15);   // single known survives

  // AllPixels averaging divides by the full cell size instead.
  const auto diluted = si::restrict_level(fine.mask, fine.values, si::CoarseAveraging::AllPixels);
  EXPECT_NEAR(diluted.values.at(1, 0, 0), 0.3 / 4.0, 1e-15);
  EXPECT_NEAR(diluted.values.at(0, 0, 0), 0.5, 1e-15);
}

TEST(Restriction, EmptyCellStaysUnknown) {
  si::LevelProblem fine;
  fine.mask = si::InpaintingMask(4, 4);
  fine.values = si::ImageBuffer(4, 4, 1);
  const auto coarse = si::restrict_level(fine.mask, fine.values, si::CoarseAveraging::KnownOnly);
  EXPECT_EQ(coarse.mask.known_count(), 0u);
  for (double v : coarse.values.data) EXPECT_EQ(v, 0.0);
}

TEST(Restriction, OddDimensionsClipBoundaryCells) {
  // 5x5 -> 3x3; the last coarse column/row draws from clipped 1-wide cells.
  si::LevelProblem fine;
  fine.mask = si::InpaintingMask(5, 5);
  fine.values = si::ImageBuffer(5, 5, 1);
  fine.mask.known[4 * 5 + 4] = 1;  // bottom-right corner, alone in its cell
  fine.values.at(4, 4, 0) = 0.9;

  const auto coarse = si::restrict_level(fine.mask, fine.values, si::CoarseAveraging::KnownOnly);
  EXPECT_EQ(coarse.mask.width, 3);
  EXPECT_EQ(coarse.mask.height, 3);
  EXPECT_TRUE(coarse.mask.is_known(2, 2));
  EXPECT_NEAR(coarse.values.at(2, 2, 0), 0.9, 1e-15);
  // AllPixels also divides by the clipped cell size (1 pixel), not 4.
  const auto clipped = si::restrict_level(fine.mask, fine.values, si::CoarseAveraging::AllPixels);
  EXPECT_NEAR(clipped.values.at(2, 2, 0), 0.9, 1e-15);
}

TEST(Restriction, DensityNeverDecreases) {
  for (int trial = 0; trial < 100; ++trial) {
    const int w = 3 + trial % 13, h = 3 + (trial * 7) % 11;
    const double density = std::max(0.02 + 0.6 * (trial % 10) / 10.0, 1.5 / (w * h));
    const auto mask = si::random_mask(w, h, density, 1000 + trial);
    si::LevelProblem fine;
    fine.mask = mask;
    fine.values = si::ImageBuffer(w, h, 1, 0.5);
    const auto coarse = si::restrict_level(fine.mask, fine.values, si::CoarseAveraging::KnownOnly);
    ASSERT_GE(coarse.mask.density(), mask.density() - 1e-12)
        << "coarsening lost density at trial " << trial;
    // OR-rule oracle, checked cell by cell.
    for (int cy = 0; cy < coarse.mask.height; ++cy) {
      for (int cx = 0; cx < coarse.mask.width; ++cx) {
        bool any = false;
        for (int dy = 0; dy < 2; ++dy) {
          for (int dx = 0; dx < 2; ++dx) {
            const int fx = 2 * cx + dx, fy = 2 * cy + dy;
            if (fx < w && fy < h && mask.is_known(fx, fy)) any = true;
          }
        }
        ASSERT_EQ(coarse.mask.is_known(cx, cy), any);
      }
    }
  }
}

TEST(Pyramid, StopsOnceALevelCannotBeHalved) {
  const auto image = si::synthetic_test_image(9, 3, 1, 4);
  const auto mask = si::random_mask(9, 3, 0.5, 5);
  const auto pyr = si::build_pyramid(image, mask, 5, si::CoarseAveraging::KnownOnly);
  // 9x3 -> 5x2 -> 3x1; a 3x1 level cannot be restricted again, so the
  // requested depth of 5 is cut short at 3.
  ASSERT_EQ(pyr.size(), 3u);
  EXPECT_EQ(pyr[1].mask.width, 5);
  EXPECT_EQ(pyr[1].mask.height, 2);
  EXPECT_EQ(pyr[2].mask.width, 3);
  EXPECT_EQ(pyr[2].mask.height, 1);
  EXPECT_GE(pyr[2].mask.known_count(), 1u);
}

TEST(Pyramid, LevelZeroZeroesUnknowns) {
  auto inst = random_instance(8, 8, 0.4, 2, 6);
  const auto pyr = si::build_pyramid(inst.image, inst.mask, 2, si::CoarseAveraging::KnownOnly);
  for (int c = 0; c < 2; ++c) {
    for (std::size_t i = 0; i < pyr[0].mask.size(); ++i) {
      if (pyr[0].mask.known[i]) {
        EXPECT_EQ(pyr[0].values.channel(c)[i], inst.image.channel(c)[i]);
      } else {
        EXPECT_EQ(pyr[0].values.channel(c)[i], 0.0);
      }
    }
  }
}

TEST(Prolongation, ConstantFieldsStayConstant) {
  si::ChannelVector coarse(3 * 2, 0.5);
  const auto fine = si::prolongate(coarse, 3, 2, 6, 4);
  ASSERT_EQ(fine.size(), 24u);
  for (double v : fine) EXPECT_DOUBLE_EQ(v, 0.5);
}

TEST(Prolongation, BilinearWeightsOnTinyGrid) {
  // 2x2 coarse -> 4x4 fine.  Coarse sample coordinate for fine x is
  // 0.5*x - 0.25 clamped to [0, 1]; same vertically.
  si::ChannelVector coarse{1.0, 2.0,
                           3.0, 4.0};
  const auto fine = si::prolongate(coarse, 2, 2, 4, 4);
  ASSERT_EQ(fine.size(), 16u);
  auto at = [&](int x, int y) { return fine[static_cast<std::size_t>(y) * 4 + x]; };
  // Corners clamp to the nearest coarse sample.
  EXPECT_DOUBLE_EQ(at(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(at(3, 0), 2.0);
  EXPECT_DOUBLE_EQ(at(0, 3), 3.0);
  EXPECT_DOUBLE_EQ(at(3, 3), 4.0);
  // x=1 maps to coarse coordinate 0.25: 3/4 weight on the left sample.
  EXPECT_DOUBLE_EQ(at(1, 0), 0.75 * 1.0 + 0.25 * 2.0);
  EXPECT_DOUBLE_EQ(at(2, 0), 0.25 * 1.0 + 0.75 * 2.0);
  EXPECT_DOUBLE_EQ(at(0, 1), 0.75 * 1.0 + 0.25 * 3.0);
  // Centre pixel (1,1): tensor product of the 0.25 offsets.
  EXPECT_DOUBLE_EQ(at(1, 1), 0.75 * 0.75 * 1.0 + 0.25 * 0.75 * 2.0 +
                                 0.75 * 0.25 * 3.0 + 0.25 * 0.25 * 4.0);
}

TEST(Prolongation, RejectsMismatchedShapes) {
  si::ChannelVector coarse(4, 0.0);
  EXPECT_THROW(si::prolongate(coarse, 2, 2, 5, 4), std::invalid_argument);
  EXPECT_THROW(si::prolongate(coarse, 2, 2, 4, 7), std::invalid_argument);
  EXPECT_THROW(si::prolongate(coarse, 3, 2, 4, 4), std::invalid_argument);
}

TEST(Multilevel, SingleLevelMatchesDirectSchwarzBitwise) {
  auto inst = random_instance(40, 30, 0.1, 3, 7);

  si::MultilevelSolveOptions mopt;
  mopt.levels = 1;
  mopt.tolerance = 1e-6;
  mopt.block_size = 12;
  mopt.overlap = 3;
  const auto ml = si::multilevel_solve(inst.image, inst.mask, si::LevelSolver::Oras, mopt);

  si::SchwarzSolveOptions sopt;
  sopt.schwarz = mopt.schwarz;
  sopt.tolerance = 1e-6;
  const auto part = si::partition_domain(40, 30, 12, 3);
  const auto sl = si::solve_schwarz(inst.image, inst.mask, part, sopt);

  EXPECT_EQ(ml.report.iterations, sl.report.iterations);
  ASSERT_EQ(ml.image.data.size(), sl.image.data.size());
  for (std::size_t i = 0; i < ml.image.data.size(); ++i) {
    ASSERT_EQ(ml.image.data[i], sl.image.data[i]) << "levels=1 differs from single-level at " << i;
  }
}

TEST(Multilevel, ConstantImageConvergesInstantlyOnFinestLevel) {
  // A constant is reproduced exactly on every level, so the prolongated
  // initialisation already solves the finest system: the canonical
  // residual normalisation must report 0 finest iterations.
  si::ImageBuffer flat(32, 32, 1, 0.7);
  const auto mask = si::random_mask(32, 32, 0.1, 9);
  si::MultilevelSolveOptions opt;
  opt.levels = 3;
  opt.block_size = 8;
  opt.overlap = 2;
  const auto result = si::multilevel_solve(flat, mask, si::LevelSolver::Oras, opt);
  EXPECT_TRUE(result.report.converged);
  EXPECT_EQ(result.report.iterations, 0);
  // The residual tolerance (1e-3) limits the leftover coarse-level error,
  // not the pointwise error; a tight solve is covered elsewhere.
  for (double v : result.image.channel(0)) EXPECT_NEAR(v, 0.7, 0.01);
}

TEST(Multilevel, CoarseInitialisationCutsFinestIterations) {
  auto inst = random_instance(96, 96, 0.05, 1, 11);
  si::MultilevelSolveOptions opt;
  opt.tolerance = 1e-3;
  opt.block_size = 16;
  opt.overlap = 3;

  opt.levels = 1;
  const auto flat = si::multilevel_solve(inst.image, inst.mask, si::LevelSolver::Oras, opt);
  opt.levels = 3;
  const auto nested = si::multilevel_solve(inst.image, inst.mask, si::LevelSolver::Oras, opt);

  ASSERT_TRUE(flat.report.converged);
  ASSERT_TRUE(nested.report.converged);
  EXPECT_LT(nested.report.iterations, flat.report.iterations)
      << "coarse-level initialisation should pay off on the finest level";
}

TEST(Multilevel, LevelsAgreeOnTheSolution) {
  auto inst = random_instance(48, 48, 0.08, 1, 15);
  si::MultilevelSolveOptions opt;
  opt.tolerance = 1e-8;
  opt.block_size = 16;
  opt.overlap = 4;
  opt.schwarz.max_outer_iterations = 5000;

  opt.levels = 1;
  const auto a = si::multilevel_solve(inst.image, inst.mask, si::LevelSolver::Oras, opt);
  opt.levels = 3;
  const auto b = si::multilevel_solve(inst.image, inst.mask, si::LevelSolver::Oras, opt);
  ASSERT_TRUE(a.report.converged);
  ASSERT_TRUE(b.report.converged);
  for (std::size_t i = 0; i < a.image.data.size(); ++i) {
    ASSERT_NEAR(a.image.data[i], b.image.data[i], 1e-6);
  }
}

TEST(Multilevel, CgLevelSolverMatchesDenseOracle) {
  auto inst = random_instance(24, 24, 0.15, 1, 21);
  si::MultilevelSolveOptions opt;
  opt.levels = 3;
  opt.tolerance = 1e-10;
  opt.cg.tolerance = 1e-10;
  const auto result = si::multilevel_solve(inst.image, inst.mask, si::LevelSolver::Cg, opt);
  ASSERT_TRUE(result.report.converged);
  const auto ref = test_support::dense_inpaint(inst.mask, inst.image.channel(0));
  for (std::size_t i = 0; i < result.image.pixel_count(); ++i) {
    ASSERT_NEAR(result.image.channel(0)[i], ref[static_cast<Eigen::Index>(i)], 1e-7);
  }
}

TEST(Multilevel, TraceOnlyCoversFinestLevel) {
  auto inst = random_instance(64, 64, 0.06, 1, 25);
  si::MultilevelSolveOptions opt;
  opt.levels = 3;
  opt.tolerance = 1e-4;
  opt.block_size = 16;
  opt.overlap = 3;
  const auto result =
      si::multilevel_solve(inst.image, inst.mask, si::LevelSolver::Oras, opt, &inst.image);
  ASSERT_TRUE(result.report.converged);
  const auto& rows = result.trace.rows;
  ASSERT_GE(rows.size(), 1u);
  EXPECT_EQ(rows.front().iteration, 0);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].iteration, rows[i - 1].iteration + 1);
    EXPECT_GE(rows[i].time_ms, rows[i - 1].time_ms);
  }
  // Coarse-level work happens before the finest sweep, so the first row's
  // clock must already include it.
  EXPECT_GT(rows.front().time_ms, 0.0);
  for (const auto& row : rows) ASSERT_TRUE(row.psnr.has_value());
}

TEST(RunMethod, AllMethodsAgreeAtTightTolerance) {
  auto inst = random_instance(32, 32, 0.12, 1, 33);
  si::RunOptions opt;
  opt.tolerance = 1e-9;
  opt.block_size = 12;
  opt.overlap = 3;
  opt.max_outer_iterations = 5000;
  const auto ref = test_support::dense_inpaint(inst.mask, inst.image.channel(0));
  for (auto method : {si::Method::Cg, si::Method::MultilevelCg, si::Method::Ras, si::Method::Oras,
                      si::Method::MultilevelOras}) {
    const auto result = si::run_method(method, inst.image, inst.mask, opt);
    ASSERT_TRUE(result.report.converged) << si::method_name(method);
    for (std::size_t i = 0; i < result.image.pixel_count(); ++i) {
      ASSERT_NEAR(result.image.channel(0)[i], ref[static_cast<Eigen::Index>(i)], 1e-6)
          << si::method_name(method) << " disagrees with the dense solve at " << i;
    }
  }
}

TEST(RunMethod, NamesRoundTrip) {
  for (auto method : {si::Method::Cg, si::Method::MultilevelCg, si::Method::Ras, si::Method::Oras,
                      si::Method::MultilevelOras}) {
    EXPECT_EQ(si::parse_method(si::method_name(method)), method);
  }
  EXPECT_THROW(si::parse_method("gauss-seidel"), std::invalid_argument);
  EXPECT_FALSE(si::is_multilevel(si::Method::Cg));
  EXPECT_TRUE(si::is_multilevel(si::Method::MultilevelCg));
  EXPECT_TRUE(si::is_multilevel(si::Method::MultilevelOras));
}
