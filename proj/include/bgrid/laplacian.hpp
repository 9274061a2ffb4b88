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

#include <cstddef>

#include "bgrid/grid.hpp"

namespace bgrid {

/// Gradient with respect to every grid coefficient; shaped like the grid.
template <class T>
using GridGradient = AffineBilateralGrid<T>;

namespace detail {

/// Calls fn(a, b) once per unordered six-connected neighbor pair (a, b) of
/// cell indices.
template <class Fn>
void for_each_grid_edge(const GridDims& d, Fn&& fn) {
  auto idx = [&](int x, int y, int z) {
    return (static_cast<std::size_t>(y) * d.gw + x) * d.gd + z;
  };
  for (int y = 0; y < d.gh; ++y) {
    for (int x = 0; x < d.gw; ++x) {
      for (int z = 0; z < d.gd; ++z) {
        const std::size_t s = idx(x, y, z);
        if (x + 1 < d.gw) fn(s, idx(x + 1, y, z));
        if (y + 1 < d.gh) fn(s, idx(x, y + 1, z));
        if (z + 1 < d.gd) fn(s, idx(x, y, z + 1));
      }
    }
  }
}

/// out[s] = deg(s) * g[s] - sum of g[t] over six-connected neighbors t.
template <class T>
void graph_laplacian(const AffineBilateralGrid<T>& g, AffineBilateralGrid<T>& out) {
  auto src = g.coeffs();
  auto dst = out.coeffs();
  std::fill(dst.begin(), dst.end(), T(0));
  for_each_grid_edge(g.dims(), [&](std::size_t a, std::size_t b) {
    const T* ca = src.data() + a * kCellCoeffs;
    const T* cb = src.data() + b * kCellCoeffs;
    T* da = dst.data() + a * kCellCoeffs;
    T* db = dst.data() + b * kCellCoeffs;
    for (int k = 0; k < kCellCoeffs; ++k) {
      const T diff = ca[k] - cb[k];
      da[k] += diff;
      db[k] -= diff;
    }
  });
}

}  // namespace detail

/// Bilateral-space smoothness energy: the sum over every cell s and every
/// six-connected neighbor t of ||G[s] - G[t]||_F^2. Each neighbor pair is
/// counted from both sides.
template <class T>
double laplacian_energy(const AffineBilateralGrid<T>& grid) {
  const auto c = grid.coeffs();
  double edges = 0;
  detail::for_each_grid_edge(grid.dims(), [&](std::size_t a, std::size_t b) {
    for (int k = 0; k < kCellCoeffs; ++k) {
      const double d = static_cast<double>(c[a * kCellCoeffs + k]) -
                       static_cast<double>(c[b * kCellCoeffs + k]);
      edges += d * d;
    }
  });
  return 2.0 * edges;
}

/// Gradient of laplacian_energy: 4 * (deg(s) G[s] - sum_t G[t]) per cell.
template <class T>
GridGradient<T> laplacian_backward(const AffineBilateralGrid<T>& grid) {
  GridGradient<T> grad(grid.dims());
  detail::graph_laplacian(grid, grad);
  for (auto& v : grad.coeffs()) v *= T(4);
  return grad;
}

}  // namespace bgrid
