// Copyright 2026 The bgrid Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "bgrid/fit.hpp"
#include "bgrid/laplacian.hpp"
#include "test_util.hpp"

namespace bgrid {
namespace {

using testing::scene_image;

TEST(LaplacianEnergy, ConstantGridIsZero) {
  std::mt19937 rng(1);
  const auto a = testing::random_affine(rng);
  EXPECT_EQ(laplacian_energy(make_constant_grid<double>({5, 4, 3}, a)), 0.0);
}

TEST(LaplacianEnergy, TwoCellsCountTheEdgeTwice) {
  AffineBilateralGrid<double> g(2, 1, 1);
  g.coeff(1, 0, 0, 0, 0) = 1.0;
  EXPECT_DOUBLE_EQ(laplacian_energy(g), 2.0);
}

TEST(LaplacianEnergy, MatchesBruteForce) {
  std::mt19937 rng(2);
  for (const GridDims d :
       {GridDims{3, 3, 2}, GridDims{1, 1, 5}, GridDims{4, 2, 3}}) {
    const auto g = testing::random_grid<double>(d, rng);
    const double ref = testing::brute_force_laplacian(g);
    EXPECT_NEAR(laplacian_energy(g), ref, 1e-12 * ref);
  }
}

TEST(LaplacianEnergy, SingleCellIsZero) {
  std::mt19937 rng(3);
  EXPECT_EQ(laplacian_energy(testing::random_grid<float>({1, 1, 1}, rng)),
            0.0);
}

FitProblem<float> problem(const ImagePlane<float>& in,
                          const ImagePlane<float>& out, GridDims dims,
                          double lambda) {
  FitProblem<float> pb;
  pb.input_lowres = in;
  pb.output_lowres = out;
  pb.dims = dims;
  pb.lambda_r = lambda;
  return pb;
}

TEST(FitGrid, IdentityPairGivesIdentity) {
  const auto img = scene_image(96, 64, 4);
  const auto res = fit_grid(problem(img, img, {8, 8, 4}, 0.15));
  EXPECT_GE(psnr(slice_apply(res.grid, img), img), 50.0);
  EXPECT_TRUE(res.report.converged);
}

TEST(FitGrid, RecoversGlobalAffine) {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 3; ++trial) {
    const auto a = testing::random_affine(rng);
    std::array<float, 12> af{};
    for (int i = 0; i < 12; ++i) af[i] = static_cast<float>(a[i]);
    const auto in = scene_image(80, 80, 10 + trial);
    const auto out = testing::apply_global_affine(in, af);
    auto pb = problem(in, out, {8, 8, 4}, 0.15);
    pb.tol = 1e-8;
    pb.max_iters = 1000;
    const auto res = fit_grid(pb);
    EXPECT_GE(psnr(slice_apply(res.grid, in), out), 40.0);
    const auto held_out = scene_image(160, 120, 99);
    EXPECT_GE(psnr(slice_apply(res.grid, held_out),
                   testing::apply_global_affine(held_out, af)),
              40.0);
  }
}

// Dark image: guidance never exceeds ~0.3, so the upper depth cells have no
// pixels.
ImagePlane<float> dark_scene() { return scene_image(64, 64, 21, 0.0, 0.3); }

ImagePlane<float> warm_target(const ImagePlane<float>& in) {
  std::array<float, 12> a{};
  a[0] = 1.2f;
  a[5] = 0.9f;
  a[10] = 0.7f;
  a[3] = 0.05f;
  return testing::apply_global_affine(in, a);
}

TEST(FitGrid, UnsupportedCellsKeepInitWithoutRegularizer) {
  const auto in = dark_scene();
  const auto res = fit_grid(problem(in, warm_target(in), {4, 4, 8}, 0.0));
  const auto id = identity_cell<float>();
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x)
      for (int z = 5; z < 8; ++z)
        for (int k = 0; k < 12; ++k)
          ASSERT_EQ(res.grid.cell(x, y, z)[k], id[k]);
}

TEST(FitGrid, RegularizerFillsUnsupportedCells) {
  const auto in = dark_scene();
  const auto res = fit_grid(problem(in, warm_target(in), {4, 4, 8}, 0.15));
  // The top cells pick up the warm transform from their supported
  // neighbors: red gain above 1, blue gain below 1.
  EXPECT_GT(res.grid.coeff(1, 1, 7, 0, 0), 1.05f);
  EXPECT_LT(res.grid.coeff(1, 1, 7, 2, 2), 0.95f);
}

TEST(FitGrid, ZeroInitLeavesBlackHolesWithoutRegularizer) {
  const auto in = dark_scene();
  auto pb = problem(in, warm_target(in), {4, 4, 8}, 0.0);
  pb.init = FitInit::Zero;
  const auto bare = fit_grid(pb);
  pb.lambda_r = 0.15;
  const auto smooth = fit_grid(pb);
  // A bright image falls in the unsupported cells.
  const ImagePlane<float> bright(16, 16, 0.9f);
  EXPECT_LT(max_abs_difference(slice_apply(bare.grid, bright),
                               ImagePlane<float>(16, 16)),
            1e-6);
  const auto lit = slice_apply(smooth.grid, bright);
  EXPECT_GT(lit.at(8, 8, 0), 0.5f);
}

// Starts above zero: with lambda_r = 0 the sparsely covered cells leave the
// normal equations too ill-conditioned for a tight tolerance.
TEST(FitGrid, RegularizerTradesDataForSmoothness) {
  const auto in = scene_image(64, 48, 31);
  const auto out = scene_image(64, 48, 32);
  double prev_data = -1, prev_lap = std::numeric_limits<double>::infinity();
  for (double lambda : {0.01, 0.05, 0.15, 0.5, 2.0}) {
    auto pb = problem(in, out, {6, 6, 4}, lambda);
    pb.tol = 1e-9;
    pb.max_iters = 5000;
    const auto res = fit_grid(pb);
    ASSERT_TRUE(res.report.converged) << lambda;
    EXPECT_GE(res.report.data_term, prev_data * (1 - 1e-6)) << lambda;
    EXPECT_LE(res.report.laplacian_energy, prev_lap * (1 + 1e-6)) << lambda;
    prev_data = res.report.data_term;
    prev_lap = res.report.laplacian_energy;
  }
}

TEST(FitGrid, BeatsIdentityAndBestGlobalAffine) {
  const auto in = scene_image(64, 64, 41);
  const auto out = scene_image(64, 64, 42);
  const double lambda = 0.15;
  const auto res = fit_grid(problem(in, out, {8, 8, 4}, lambda));
  const double fitted = res.report.objective(lambda);
  EXPECT_NEAR(fitted, fit_objective(res.grid, in, out, {}, lambda),
              1e-3 * fitted);
  const double ident = fit_objective(make_identity_grid(8, 8, 4), in, out, {},
                                     lambda);
  const auto best = make_constant_grid<float>(
      {8, 8, 4}, testing::best_global_affine(in, out));
  const double global = fit_objective(best, in, out, {}, lambda);
  EXPECT_LE(fitted, ident);
  EXPECT_LE(fitted, global);
}

TEST(FitGrid, SolutionIsLinearInTarget) {
  const auto in = scene_image(48, 48, 51);
  const auto out = scene_image(48, 48, 52);
  ImagePlane<float> twice = out;
  for (auto& v : twice.values()) v *= 2;
  auto pb = problem(in, out, {3, 3, 2}, 0.0);
  pb.init = FitInit::Zero;
  pb.tol = 1e-10;
  pb.max_iters = 2000;
  const auto a = fit_grid(pb);
  pb.output_lowres = twice;
  const auto b = fit_grid(pb);
  for (std::size_t i = 0; i < a.grid.coeffs().size(); ++i) {
    EXPECT_NEAR(b.grid.coeffs()[i], 2 * a.grid.coeffs()[i], 1e-3);
  }
}

TEST(FitGrid, DeterministicAcrossRunsAndWorkers) {
  const auto in = scene_image(80, 60, 61);
  const auto out = scene_image(80, 60, 62);
  auto pb = problem(in, out, {8, 8, 4}, 0.15);
  pb.workers = 1;
  const auto a = fit_grid(pb);
  const auto b = fit_grid(pb);
  pb.workers = 3;
  const auto c = fit_grid(pb);
  EXPECT_EQ(a.grid, b.grid);
  EXPECT_EQ(a.grid, c.grid);
  EXPECT_EQ(a.report.iterations, c.report.iterations);
}

TEST(FitGrid, ReportsNonConvergence) {
  const auto in = scene_image(64, 64, 71);
  const auto out = scene_image(64, 64, 72);
  auto pb = problem(in, out, {8, 8, 4}, 0.15);
  pb.max_iters = 1;
  const auto res = fit_grid(pb);
  EXPECT_FALSE(res.report.converged);
  EXPECT_EQ(res.report.iterations, 1);
  EXPECT_GT(res.report.relative_residual, pb.tol);
  EXPECT_TRUE(res.grid.all_finite());

  pb.max_iters = 0;
  const auto none = fit_grid(pb);
  EXPECT_EQ(none.report.iterations, 0);
  EXPECT_EQ(none.grid, make_identity_grid(8, 8, 4));
}

TEST(FitGrid, RejectsBadProblems) {
  const auto in = scene_image(16, 16, 81);
  EXPECT_THROW(fit_grid(problem(in, scene_image(16, 15, 81), {2, 2, 2}, 0.1)),
               std::invalid_argument);
  EXPECT_THROW(fit_grid(problem(in, in, {2, 2, 2}, -1.0)),
               std::invalid_argument);
  EXPECT_THROW(fit_grid(problem(in, in, {0, 2, 2}, 0.1)),
               std::invalid_argument);
  auto pb = problem(in, in, {2, 2, 2}, 0.1);
  pb.tol = 0;
  EXPECT_THROW(fit_grid(pb), std::invalid_argument);
  pb = problem(in, in, {2, 2, 2}, 0.1);
  pb.output_lowres.at(3, 3, 1) = std::nanf("");
  EXPECT_THROW(fit_grid(pb), std::invalid_argument);
  EXPECT_THROW(fit_grid(FitProblem<float>{}), std::invalid_argument);
}

}  // namespace
}  // namespace bgrid
