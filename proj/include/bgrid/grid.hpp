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
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bgrid {

inline constexpr int kAffineRows = 3;
inline constexpr int kAffineCols = 4;
inline constexpr int kCellCoeffs = kAffineRows * kAffineCols;

struct GridDims {
  int gw = 1;
  int gh = 1;
  int gd = 1;

  std::size_t cell_count() const {
    return static_cast<std::size_t>(gw) * gh * gd;
  }
  friend bool operator==(const GridDims&, const GridDims&) = default;
};

inline void check_dims(const GridDims& d) {
  if (d.gw < 1 || d.gh < 1 || d.gd < 1) {
    throw std::invalid_argument(
        "grid dimensions must be >= 1, got " + std::to_string(d.gw) + "x" +
        std::to_string(d.gh) + "x" + std::to_string(d.gd));
  }
}

/// A gw x gh x gd lattice of 3x4 affine color transforms.
///
/// Coefficients are stored y-major, then x, then z; each cell holds its
/// 3x4 matrix row-major (rows = output r,g,b; columns = input r,g,b,1).
/// This is also the payload order of the grid file format.
template <class T = float>
class AffineBilateralGrid {
 public:
  using value_type = T;

  AffineBilateralGrid() : AffineBilateralGrid(GridDims{}) {}

  explicit AffineBilateralGrid(GridDims dims) : dims_(dims) {
    check_dims(dims);
    coeffs_.assign(dims.cell_count() * kCellCoeffs, T(0));
  }

  AffineBilateralGrid(int gw, int gh, int gd)
      : AffineBilateralGrid(GridDims{gw, gh, gd}) {}

  const GridDims& dims() const { return dims_; }
  int gw() const { return dims_.gw; }
  int gh() const { return dims_.gh; }
  int gd() const { return dims_.gd; }
  std::size_t cell_count() const { return dims_.cell_count(); }

  std::size_t cell_index(int x, int y, int z) const {
    return (static_cast<std::size_t>(y) * dims_.gw + x) * dims_.gd + z;
  }

  std::span<T, kCellCoeffs> cell(int x, int y, int z) {
    return std::span<T, kCellCoeffs>(
        coeffs_.data() + cell_index(x, y, z) * kCellCoeffs, kCellCoeffs);
  }
  std::span<const T, kCellCoeffs> cell(int x, int y, int z) const {
    return std::span<const T, kCellCoeffs>(
        coeffs_.data() + cell_index(x, y, z) * kCellCoeffs, kCellCoeffs);
  }

  T& coeff(int x, int y, int z, int row, int col) {
    return cell(x, y, z)[row * kAffineCols + col];
  }
  const T& coeff(int x, int y, int z, int row, int col) const {
    return cell(x, y, z)[row * kAffineCols + col];
  }

  /// All coefficients in storage order.
  std::span<T> coeffs() { return coeffs_; }
  std::span<const T> coeffs() const { return coeffs_; }

  bool all_finite() const {
    return std::all_of(coeffs_.begin(), coeffs_.end(),
                       [](T v) { return std::isfinite(v); });
  }

  template <class U>
  AffineBilateralGrid<U> cast() const {
    AffineBilateralGrid<U> out(dims_);
    std::transform(coeffs_.begin(), coeffs_.end(), out.coeffs().begin(),
                   [](T v) { return static_cast<U>(v); });
    return out;
  }

  friend bool operator==(const AffineBilateralGrid&,
                         const AffineBilateralGrid&) = default;

 private:
  GridDims dims_;
  std::vector<T> coeffs_;
};

/// A grid whose every cell equals `cell` (row-major 3x4).
template <class T = float>
AffineBilateralGrid<T> make_constant_grid(
    GridDims dims, const std::array<T, kCellCoeffs>& cell) {
  AffineBilateralGrid<T> g(dims);
  auto c = g.coeffs();
  for (std::size_t i = 0; i < g.cell_count(); ++i) {
    std::copy(cell.begin(), cell.end(), c.begin() + i * kCellCoeffs);
  }
  return g;
}

template <class T = float>
constexpr std::array<T, kCellCoeffs> identity_cell() {
  return {T(1), T(0), T(0), T(0),  //
          T(0), T(1), T(0), T(0),  //
          T(0), T(0), T(1), T(0)};
}

/// Every cell is [I3 | 0].
template <class T = float>
AffineBilateralGrid<T> make_identity_grid(int gw, int gh, int gd) {
  return make_constant_grid<T>(GridDims{gw, gh, gd}, identity_cell<T>());
}

namespace detail {

/// Linear-interpolation stencil along one axis: value = v[i0] + w*(v[i1]-v[i0]).
template <class T>
struct AxisSample {
  int i0 = 0;
  int i1 = 0;
  T w = T(0);
};

/// Stencil for a continuous coordinate already in cell-index units (cell
/// centers at integers), with clamp-to-edge boundaries.
template <class T>
AxisSample<T> axis_sample(T coord, int n) {
  const T c = std::clamp(coord, T(0), static_cast<T>(n - 1));
  AxisSample<T> s;
  s.i0 = std::min(static_cast<int>(c), n - 1);
  s.i1 = std::min(s.i0 + 1, n - 1);
  s.w = c - static_cast<T>(s.i0);
  return s;
}

/// Maps a normalized coordinate u in [0, 1] to cell-index units under the
/// half-cell-centered convention.
template <class T>
T to_cell_coord(T u, int n) {
  return u * static_cast<T>(n) - T(0.5);
}

template <class T>
T lerp(T a, T b, T w) {
  return a + w * (b - a);
}

}  // namespace detail

/// Trilinearly resamples the coefficient field to new dimensions, sampling
/// at the target cells' centers in normalized grid space.
template <class T>
AffineBilateralGrid<T> resample_grid(const AffineBilateralGrid<T>& grid,
                                     int gw, int gh, int gd) {
  AffineBilateralGrid<T> out(GridDims{gw, gh, gd});
  const auto& d = grid.dims();
  auto stencils = [](int dst, int src) {
    std::vector<detail::AxisSample<T>> s(dst);
    for (int i = 0; i < dst; ++i) {
      const T u = (static_cast<T>(i) + T(0.5)) / static_cast<T>(dst);
      s[i] = detail::axis_sample(detail::to_cell_coord(u, src), src);
    }
    return s;
  };
  const auto xs = stencils(gw, d.gw);
  const auto ys = stencils(gh, d.gh);
  const auto zs = stencils(gd, d.gd);
  for (int y = 0; y < gh; ++y) {
    for (int x = 0; x < gw; ++x) {
      for (int z = 0; z < gd; ++z) {
        const auto& sx = xs[x];
        const auto& sy = ys[y];
        const auto& sz = zs[z];
        auto dst = out.cell(x, y, z);
        for (int k = 0; k < kCellCoeffs; ++k) {
          auto at = [&](int ix, int iy, int iz) {
            return grid.cell(ix, iy, iz)[k];
          };
          using detail::lerp;
          const T y0 = lerp(lerp(at(sx.i0, sy.i0, sz.i0),
                                 at(sx.i1, sy.i0, sz.i0), sx.w),
                            lerp(at(sx.i0, sy.i0, sz.i1),
                                 at(sx.i1, sy.i0, sz.i1), sx.w),
                            sz.w);
          const T y1 = lerp(lerp(at(sx.i0, sy.i1, sz.i0),
                                 at(sx.i1, sy.i1, sz.i0), sx.w),
                            lerp(at(sx.i0, sy.i1, sz.i1),
                                 at(sx.i1, sy.i1, sz.i1), sx.w),
                            sz.w);
          dst[k] = lerp(y0, y1, sy.w);
        }
      }
    }
  }
  return out;
}

}  // namespace bgrid
