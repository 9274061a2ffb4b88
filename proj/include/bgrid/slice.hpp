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

#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "bgrid/grid.hpp"
#include "bgrid/guidance.hpp"
#include "bgrid/image.hpp"
#include "bgrid/parallel.hpp"

namespace bgrid {

namespace detail {

/// The three axis stencils that locate one pixel in the grid.
template <class T>
struct PixelStencil {
  AxisSample<T> x;
  AxisSample<T> y;
  AxisSample<T> z;
};

/// Column / row stencils depend only on the pixel index, so they are shared
/// by every row (or column) of an image.
template <class T>
std::vector<AxisSample<T>> pixel_axis_stencils(int pixels, int cells) {
  std::vector<AxisSample<T>> s(pixels);
  for (int i = 0; i < pixels; ++i) {
    const T u = (static_cast<T>(i) + T(0.5)) / static_cast<T>(pixels);
    s[i] = axis_sample(to_cell_coord(u, cells), cells);
  }
  return s;
}

template <class T>
AxisSample<T> depth_stencil(T z, int gd) {
  return axis_sample(to_cell_coord(z, gd), gd);
}

/// Interpolated 3x4 matrix at a stencil. Interpolation order (y, then x,
/// then z) matches the row renderer exactly, so results agree bit for bit.
template <class T>
std::array<T, kCellCoeffs> sample_affine(const AffineBilateralGrid<T>& grid,
                                         const PixelStencil<T>& s) {
  std::array<T, kCellCoeffs> a{};
  for (int k = 0; k < kCellCoeffs; ++k) {
    auto yl = [&](int ix, int iz) {
      return lerp(grid.cell(ix, s.y.i0, iz)[k], grid.cell(ix, s.y.i1, iz)[k],
                  s.y.w);
    };
    const T a0 = lerp(yl(s.x.i0, s.z.i0), yl(s.x.i1, s.z.i0), s.x.w);
    const T a1 = lerp(yl(s.x.i0, s.z.i1), yl(s.x.i1, s.z.i1), s.x.w);
    a[k] = lerp(a0, a1, s.z.w);
  }
  return a;
}

template <class T>
void apply_affine(const T* a, T r, T g, T b, T* out) {
  out[0] = a[0] * r + a[1] * g + a[2] * b + a[3];
  out[1] = a[4] * r + a[5] * g + a[6] * b + a[7];
  out[2] = a[8] * r + a[9] * g + a[10] * b + a[11];
}

template <class T, class Guide>
void slice_rows(const AffineBilateralGrid<T>& grid, const ImagePlane<T>& img,
                ImagePlane<T>& out, const Guide& guide,
                const std::vector<AxisSample<T>>& xs,
                const std::vector<AxisSample<T>>& ys, int y_begin,
                int y_end) {
  const int gw = grid.gw();
  const int gd = grid.gd();
  const std::size_t slab_stride = static_cast<std::size_t>(gw) * gd *
                                  kCellCoeffs;
  // Grid row interpolated to the current image row: [x][z][12].
  std::vector<T> slab(slab_stride);
  const T* coeffs = grid.coeffs().data();
  const int width = img.width();
  for (int y = y_begin; y < y_end; ++y) {
    const AxisSample<T>& sy = ys[y];
    const T* r0 = coeffs + static_cast<std::size_t>(sy.i0) * slab_stride;
    const T* r1 = coeffs + static_cast<std::size_t>(sy.i1) * slab_stride;
    for (std::size_t i = 0; i < slab_stride; ++i) {
      slab[i] = lerp(r0[i], r1[i], sy.w);
    }
    const T* in = img.row(y);
    T* dst = out.row(y);
    for (int x = 0; x < width; ++x) {
      const T r = in[3 * x];
      const T g = in[3 * x + 1];
      const T b = in[3 * x + 2];
      const AxisSample<T>& sx = xs[x];
      const AxisSample<T> sz = depth_stencil(guide(r, g, b), gd);
      const T* c00 = slab.data() + (sx.i0 * gd + sz.i0) * kCellCoeffs;
      const T* c10 = slab.data() + (sx.i1 * gd + sz.i0) * kCellCoeffs;
      const T* c01 = slab.data() + (sx.i0 * gd + sz.i1) * kCellCoeffs;
      const T* c11 = slab.data() + (sx.i1 * gd + sz.i1) * kCellCoeffs;
      T a[kCellCoeffs];
      for (int k = 0; k < kCellCoeffs; ++k) {
        const T a0 = lerp(c00[k], c10[k], sx.w);
        const T a1 = lerp(c01[k], c11[k], sx.w);
        a[k] = lerp(a0, a1, sz.w);
      }
      apply_affine(a, r, g, b, dst + 3 * x);
    }
  }
}

template <class T, class Fn>
void with_guide(const GuidanceCurve& curve, Fn&& fn) {
  if (curve.kind() == GuidanceCurve::Kind::FixedLuma) {
    fn([](T r, T g, T b) {
      T z = static_cast<T>(kLumaR) * r + static_cast<T>(kLumaG) * g +
            static_cast<T>(kLumaB) * b;
      return z < T(0) ? T(0) : (z > T(1) ? T(1) : z);
    });
  } else {
    fn([&curve](T r, T g, T b) { return curve(r, g, b); });
  }
}

}  // namespace detail

/// Locates pixel (x, y) of a width x height image with guidance value z.
template <class T>
detail::PixelStencil<T> pixel_stencil(const GridDims& dims, int x, int y,
                                      int width, int height, T z) {
  using namespace detail;
  const T u = (static_cast<T>(x) + T(0.5)) / static_cast<T>(width);
  const T v = (static_cast<T>(y) + T(0.5)) / static_cast<T>(height);
  return {axis_sample(to_cell_coord(u, dims.gw), dims.gw),
          axis_sample(to_cell_coord(v, dims.gh), dims.gh),
          depth_stencil(z, dims.gd)};
}

/// Renders `img` through the grid into `out` (same size as `img`): per
/// pixel, trilinearly sample the 3x4 matrix at (x/w, y/h, guidance) and
/// multiply by (r, g, b, 1). The output is not clamped. Rows are split over
/// `workers` threads (0 = all hardware threads); the result does not depend
/// on the split.
template <class T>
void slice_apply_into(const AffineBilateralGrid<T>& grid,
                      const ImagePlane<T>& img, const GuidanceCurve& curve,
                      ImagePlane<T>& out, unsigned workers = 0) {
  if (!out.same_size(img)) {
    throw std::invalid_argument("slice_apply_into: output size mismatch");
  }
  const auto xs = detail::pixel_axis_stencils<T>(img.width(), grid.gw());
  const auto ys = detail::pixel_axis_stencils<T>(img.height(), grid.gh());
  detail::with_guide<T>(curve, [&](const auto& guide) {
    parallel_for(static_cast<std::size_t>(img.height()), workers,
                 [&](std::size_t begin, std::size_t end) {
                   detail::slice_rows(grid, img, out, guide, xs, ys,
                                      static_cast<int>(begin),
                                      static_cast<int>(end));
                 });
  });
}

template <class T>
ImagePlane<T> slice_apply(const AffineBilateralGrid<T>& grid,
                          const ImagePlane<T>& img,
                          const GuidanceCurve& curve = {},
                          unsigned workers = 0) {
  ImagePlane<T> out(img.width(), img.height());
  slice_apply_into(grid, img, curve, out, workers);
  return out;
}

}  // namespace bgrid
