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

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "bgrid/grid.hpp"
#include "bgrid/guidance.hpp"
#include "bgrid/image.hpp"
#include "bgrid/laplacian.hpp"
#include "bgrid/parallel.hpp"
#include "bgrid/slice.hpp"

namespace bgrid {

namespace detail {

// Row blocks used for scatter accumulation. The partition depends only on
// the image height, never on the worker count, and partial sums are merged
// in block order, so scattered gradients are bit-reproducible.
inline constexpr int kScatterBlocks = 16;

/// Calls fn(cell_index, weight, pixel_index, r, g, b) for each of the eight
/// trilinear taps of every pixel in rows [y_begin, y_end).
template <class T, class Fn>
void for_each_tap(const GridDims& dims, const ImagePlane<T>& img,
                  const GuidanceCurve& curve, int y_begin, int y_end,
                  Fn&& fn) {
  const auto xs = pixel_axis_stencils<T>(img.width(), dims.gw);
  const auto ys = pixel_axis_stencils<T>(img.height(), dims.gh);
  for (int y = y_begin; y < y_end; ++y) {
    const T* in = img.row(y);
    const AxisSample<T>& sy = ys[y];
    for (int x = 0; x < img.width(); ++x) {
      const T r = in[3 * x];
      const T g = in[3 * x + 1];
      const T b = in[3 * x + 2];
      const AxisSample<T>& sx = xs[x];
      const AxisSample<T> sz = depth_stencil(curve(r, g, b), dims.gd);
      const std::size_t p = static_cast<std::size_t>(y) * img.width() + x;
      const int iy[2] = {sy.i0, sy.i1};
      const int ix[2] = {sx.i0, sx.i1};
      const int iz[2] = {sz.i0, sz.i1};
      const T wy[2] = {T(1) - sy.w, sy.w};
      const T wx[2] = {T(1) - sx.w, sx.w};
      const T wz[2] = {T(1) - sz.w, sz.w};
      for (int a = 0; a < 2; ++a) {
        for (int c = 0; c < 2; ++c) {
          for (int e = 0; e < 2; ++e) {
            const T w = wy[a] * wx[c] * wz[e];
            if (w == T(0)) continue;
            const std::size_t cell =
                (static_cast<std::size_t>(iy[a]) * dims.gw + ix[c]) *
                    dims.gd +
                iz[e];
            fn(cell, w, p, r, g, b);
          }
        }
      }
    }
  }
}

/// Accumulates per-tap contributions into a grid-shaped buffer using fixed
/// row blocks merged in order. contribute(dst12, weight, pixel, r, g, b) adds
/// one tap's share to the 12 coefficients of its cell.
template <class T, class Contribute>
GridGradient<T> scatter(const GridDims& dims, const ImagePlane<T>& img,
                        const GuidanceCurve& curve, unsigned workers,
                        Contribute&& contribute) {
  const int blocks = std::min(img.height(), kScatterBlocks);
  const std::size_t n = dims.cell_count() * kCellCoeffs;
  std::vector<std::vector<T>> partial(blocks);
  parallel_tasks(static_cast<std::size_t>(blocks), workers,
                 [&](std::size_t blk) {
                   auto& buf = partial[blk];
                   buf.assign(n, T(0));
                   const int y0 = static_cast<int>(
                       static_cast<long long>(img.height()) * blk / blocks);
                   const int y1 = static_cast<int>(
                       static_cast<long long>(img.height()) * (blk + 1) /
                       blocks);
                   for_each_tap(dims, img, curve, y0, y1,
                                [&](std::size_t cell, T w, std::size_t p, T r,
                                    T g, T b) {
                                  contribute(buf.data() + cell * kCellCoeffs,
                                             w, p, r, g, b);
                                });
                 });
  GridGradient<T> grad(dims);
  auto out = grad.coeffs();
  for (const auto& buf : partial) {
    for (std::size_t i = 0; i < n; ++i) out[i] += buf[i];
  }
  return grad;
}

}  // namespace detail

/// Adjoint of slice_apply with respect to the grid coefficients.
///
/// Each pixel scatters upstream(p) (r, g, b, 1)^T into its eight supporting
/// cells with its trilinear weights. The guidance is held fixed.
template <class T>
GridGradient<T> slice_backward(const GridDims& dims, const ImagePlane<T>& img,
                               const GuidanceCurve& curve,
                               const ImagePlane<T>& upstream,
                               unsigned workers = 0) {
  check_dims(dims);
  if (!img.same_size(upstream)) {
    throw std::invalid_argument("upstream gradient must match image size");
  }
  const T* up = upstream.values().data();
  return detail::scatter(
      dims, img, curve, workers,
      [up](T* dst, T w, std::size_t p, T r, T g, T b) {
        const T in[4] = {r, g, b, T(1)};
        for (int row = 0; row < kAffineRows; ++row) {
          const T s = w * up[3 * p + row];
          for (int col = 0; col < kAffineCols; ++col) {
            dst[row * kAffineCols + col] += s * in[col];
          }
        }
      });
}

template <class T>
GridGradient<T> slice_backward(const AffineBilateralGrid<T>& grid,
                               const ImagePlane<T>& img,
                               const GuidanceCurve& curve,
                               const ImagePlane<T>& upstream,
                               unsigned workers = 0) {
  return slice_backward(grid.dims(), img, curve, upstream, workers);
}

}  // namespace bgrid
