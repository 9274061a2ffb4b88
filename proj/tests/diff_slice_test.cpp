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

#include <random>

#include "bgrid/diff_slice.hpp"
#include "bgrid/gradcheck.hpp"
#include "bgrid/laplacian.hpp"
#include "bgrid/slice.hpp"
#include "test_util.hpp"

namespace bgrid {
namespace {

using testing::numeric_gradient;
using testing::random_grid;
using testing::random_image;
using testing::rel_err;

double weighted_objective(const AffineBilateralGrid<double>& g,
                          const ImagePlane<double>& img,
                          const ImagePlane<double>& upstream,
                          const GuidanceCurve& curve = {}) {
  const auto out = slice_apply(g, img, curve, 1);
  double s = 0;
  for (std::size_t i = 0; i < out.values().size(); ++i) {
    s += out.values()[i] * upstream.values()[i];
  }
  return s;
}

TEST(SliceBackward, ZeroUpstreamGivesZeroGradient) {
  std::mt19937 rng(1);
  const auto img = random_image<double>(13, 9, rng);
  const auto g = slice_backward(GridDims{4, 3, 5}, img, GuidanceCurve{},
                                ImagePlane<double>(13, 9));
  for (double v : g.coeffs()) EXPECT_EQ(v, 0.0);
}

TEST(SliceBackward, PixelAtCellCenterHitsOneCell) {
  // A constant 0.25 guidance puts every pixel at depth 0.25 * 2 - 0.5 = 0;
  // pixel (1, 2) of a 4x4 image lands exactly on cell (1, 2).
  const auto curve = GuidanceCurve::lut({0.25f, 0.25f});
  std::mt19937 rng(2);
  const auto img = random_image<double>(4, 4, rng);
  ImagePlane<double> up(4, 4);
  up.at(1, 2, 0) = 1.0;
  const auto g = slice_backward(GridDims{4, 4, 2}, img, curve, up);
  const double expect[4] = {img.at(1, 2, 0), img.at(1, 2, 1),
                            img.at(1, 2, 2), 1.0};
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x)
      for (int z = 0; z < 2; ++z)
        for (int k = 0; k < 12; ++k) {
          const bool hit = x == 1 && y == 2 && z == 0 && k < 4;
          EXPECT_NEAR(g.cell(x, y, z)[k], hit ? expect[k] : 0.0, 1e-12)
              << x << " " << y << " " << z << " " << k;
        }
}

TEST(SliceBackward, MatchesFiniteDifferences) {
  std::mt19937 rng(3);
  for (const GridDims dims : {GridDims{4, 4, 4}, GridDims{3, 2, 5},
                              GridDims{1, 1, 1}}) {
    const auto grid = random_grid<double>(dims, rng);
    const auto img = random_image<double>(8, 8, rng);
    const auto up = random_image<double>(8, 8, rng, -1, 1);
    const auto analytic = slice_backward(grid, img, GuidanceCurve{}, up);
    const auto numeric = numeric_gradient(grid, [&](const auto& g) {
      return weighted_objective(g, img, up);
    });
    for (std::size_t i = 0; i < numeric.size(); ++i) {
      EXPECT_LE(rel_err(analytic.coeffs()[i], numeric[i]), 1e-3) << i;
    }
  }
}

TEST(SliceBackward, MatchesFiniteDifferencesWithLut) {
  std::mt19937 rng(4);
  const auto curve = GuidanceCurve::lut({0.0f, 0.6f, 0.3f, 1.0f});
  const auto grid = random_grid<double>({3, 3, 4}, rng);
  const auto img = random_image<double>(9, 7, rng);
  const auto up = random_image<double>(9, 7, rng, -1, 1);
  const auto analytic = slice_backward(grid, img, curve, up);
  const auto numeric = numeric_gradient(grid, [&](const auto& g) {
    return weighted_objective(g, img, up, curve);
  });
  for (std::size_t i = 0; i < numeric.size(); ++i) {
    EXPECT_LE(rel_err(analytic.coeffs()[i], numeric[i]), 1e-3) << i;
  }
}

TEST(SliceBackward, IsAdjointOfSliceApply) {
  // <S g, u> == <g, S^T u> for the linear map S: grid -> output image.
  std::mt19937 rng(5);
  const GridDims dims{5, 4, 3};
  const auto g = random_grid<double>(dims, rng);
  const auto img = random_image<double>(21, 17, rng);
  const auto u = random_image<double>(21, 17, rng, -1, 1);
  const double lhs = weighted_objective(g, img, u);
  const auto st = slice_backward(dims, img, GuidanceCurve{}, u);
  double rhs = 0;
  for (std::size_t i = 0; i < g.coeffs().size(); ++i) {
    rhs += g.coeffs()[i] * st.coeffs()[i];
  }
  EXPECT_NEAR(lhs, rhs, 1e-9 * std::abs(lhs) + 1e-12);
}

TEST(SliceBackward, IsLinearInUpstream) {
  std::mt19937 rng(6);
  const GridDims dims{4, 4, 4};
  const auto img = random_image<double>(10, 12, rng);
  const auto a = random_image<double>(10, 12, rng, -1, 1);
  const auto b = random_image<double>(10, 12, rng, -1, 1);
  ImagePlane<double> mix(10, 12);
  for (std::size_t i = 0; i < mix.values().size(); ++i) {
    mix.values()[i] = 2.0 * a.values()[i] - 0.5 * b.values()[i];
  }
  const auto ga = slice_backward(dims, img, GuidanceCurve{}, a);
  const auto gb = slice_backward(dims, img, GuidanceCurve{}, b);
  const auto gm = slice_backward(dims, img, GuidanceCurve{}, mix);
  for (std::size_t i = 0; i < gm.coeffs().size(); ++i) {
    EXPECT_NEAR(gm.coeffs()[i], 2.0 * ga.coeffs()[i] - 0.5 * gb.coeffs()[i],
                1e-12);
  }
}

TEST(SliceBackward, TouchesOnlySupportingCells) {
  std::mt19937 rng(7);
  const GridDims dims{6, 6, 4};
  const auto img = random_image<double>(24, 24, rng);
  ImagePlane<double> up(24, 24);
  const int px = 5, py = 17;
  up.at(px, py, 1) = 1.0;
  const auto g = slice_backward(dims, img, GuidanceCurve{}, up);
  const auto s = pixel_stencil<double>(
      dims, px, py, 24, 24,
      GuidanceCurve{}(img.at(px, py, 0), img.at(px, py, 1),
                      img.at(px, py, 2)));
  for (int y = 0; y < dims.gh; ++y)
    for (int x = 0; x < dims.gw; ++x)
      for (int z = 0; z < dims.gd; ++z) {
        const bool near = (x == s.x.i0 || x == s.x.i1) &&
                          (y == s.y.i0 || y == s.y.i1) &&
                          (z == s.z.i0 || z == s.z.i1);
        for (int k = 0; k < 12; ++k) {
          if (!near) ASSERT_EQ(g.cell(x, y, z)[k], 0.0);
          // Only the green output row can receive gradient.
          if (k < 4 || k >= 8) ASSERT_EQ(g.cell(x, y, z)[k], 0.0);
        }
      }
}

TEST(SliceBackward, BitIdenticalAcrossRunsAndWorkers) {
  std::mt19937 rng(8);
  const GridDims dims{16, 16, 8};
  const auto img = random_image<float>(193, 131, rng);
  const auto up = random_image<float>(193, 131, rng, -1, 1);
  const auto ref = slice_backward(dims, img, GuidanceCurve{}, up, 1);
  for (unsigned w : {1u, 2u, 5u, 16u}) {
    EXPECT_EQ(slice_backward(dims, img, GuidanceCurve{}, up, w), ref) << w;
  }
}

TEST(SliceBackward, RejectsMismatchedUpstream) {
  std::mt19937 rng(9);
  const auto img = random_image<float>(8, 8, rng);
  EXPECT_THROW(slice_backward(GridDims{2, 2, 2}, img, GuidanceCurve{},
                              ImagePlane<float>(8, 7)),
               std::invalid_argument);
}

TEST(LaplacianBackward, ConstantGridHasZeroGradient) {
  std::mt19937 rng(10);
  const auto a = testing::random_affine(rng);
  const auto g = make_constant_grid<double>({4, 3, 5}, a);
  for (double v : laplacian_backward(g).coeffs()) EXPECT_EQ(v, 0.0);
  for (double v : laplacian_backward(make_identity_grid<double>(6, 6, 6))
                      .coeffs()) {
    EXPECT_EQ(v, 0.0);
  }
}

TEST(LaplacianBackward, MatchesFiniteDifferences) {
  std::mt19937 rng(11);
  for (const GridDims dims :
       {GridDims{4, 4, 4}, GridDims{1, 3, 2}, GridDims{2, 1, 1}}) {
    const auto grid = random_grid<double>(dims, rng);
    const auto analytic = laplacian_backward(grid);
    const auto numeric = numeric_gradient(
        grid, [](const auto& g) { return laplacian_energy(g); });
    for (std::size_t i = 0; i < numeric.size(); ++i) {
      EXPECT_LE(rel_err(analytic.coeffs()[i], numeric[i]), 1e-6) << i;
    }
  }
}

TEST(Gradcheck, ReportsSmallErrors) {
  for (unsigned seed : {0u, 1u, 2u, 42u}) {
    const auto rep = gradcheck(seed);
    EXPECT_LE(rep.slice_max_rel_error, 1e-3) << seed;
    EXPECT_LE(rep.laplacian_max_rel_error, 1e-6) << seed;
    EXPECT_GE(rep.dims.gw, 1);
    EXPECT_LE(rep.dims.gw, 4);
    EXPECT_LE(rep.width, 16);
  }
}

}  // namespace
}  // namespace bgrid
