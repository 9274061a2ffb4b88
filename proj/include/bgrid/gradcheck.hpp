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
#include <cmath>
#include <random>

#include "bgrid/diff_slice.hpp"
#include "bgrid/grid.hpp"
#include "bgrid/image.hpp"
#include "bgrid/laplacian.hpp"
#include "bgrid/slice.hpp"

namespace bgrid {

struct GradcheckReport {
  unsigned seed = 0;
  GridDims dims;
  int width = 0;
  int height = 0;
  double slice_max_rel_error = 0;
  double laplacian_max_rel_error = 0;
};

/// |analytic - numeric| / max(|analytic|, |numeric|, floor). The floor keeps
/// coefficients whose true gradient is zero from dividing noise by noise.
inline double relative_error(double analytic, double numeric,
                             double floor = 1e-6) {
  return std::abs(analytic - numeric) /
         std::max({std::abs(analytic), std::abs(numeric), floor});
}

/// Compares slice_backward and laplacian_backward with central finite
/// differences (step h, 64-bit) on a random instance derived from `seed`:
/// a grid of at most 4x4x4 cells, an image of at most 16x16 pixels and the
/// objective 0.5 * sum_p w_p ||slice_apply(G)(p) - t_p||^2.
inline GradcheckReport gradcheck(unsigned seed, double h = 1e-4) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> cells(1, 4);
  std::uniform_int_distribution<int> pixels(2, 16);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> coeff(-1.0, 1.0);

  GradcheckReport rep;
  rep.seed = seed;
  rep.dims = {cells(rng), cells(rng), cells(rng)};
  rep.width = pixels(rng);
  rep.height = pixels(rng);

  AffineBilateralGrid<double> grid(rep.dims);
  for (auto& v : grid.coeffs()) v = coeff(rng);
  ImagePlane<double> img(rep.width, rep.height);
  ImagePlane<double> target(rep.width, rep.height);
  ImagePlane<double> weight(rep.width, rep.height);
  for (auto& v : img.values()) v = unit(rng);
  for (auto& v : target.values()) v = unit(rng);
  for (auto& v : weight.values()) v = 0.5 + unit(rng);
  const GuidanceCurve curve;

  auto objective = [&](const AffineBilateralGrid<double>& g) {
    const auto out = slice_apply(g, img, curve, 1);
    double s = 0;
    for (std::size_t i = 0; i < out.values().size(); ++i) {
      const double d = out.values()[i] - target.values()[i];
      s += 0.5 * weight.values()[i] * d * d;
    }
    return s;
  };
  const auto out = slice_apply(grid, img, curve, 1);
  ImagePlane<double> upstream(rep.width, rep.height);
  for (std::size_t i = 0; i < out.values().size(); ++i) {
    upstream.values()[i] =
        weight.values()[i] * (out.values()[i] - target.values()[i]);
  }
  const auto analytic = slice_backward(grid, img, curve, upstream, 1);
  const auto lap = laplacian_backward(grid);

  auto probe = grid;
  for (std::size_t i = 0; i < grid.coeffs().size(); ++i) {
    const double v0 = grid.coeffs()[i];
    probe.coeffs()[i] = v0 + h;
    const double fp = objective(probe);
    const double lp = laplacian_energy(probe);
    probe.coeffs()[i] = v0 - h;
    const double fm = objective(probe);
    const double lm = laplacian_energy(probe);
    probe.coeffs()[i] = v0;
    rep.slice_max_rel_error =
        std::max(rep.slice_max_rel_error,
                 relative_error(analytic.coeffs()[i], (fp - fm) / (2 * h)));
    rep.laplacian_max_rel_error =
        std::max(rep.laplacian_max_rel_error,
                 relative_error(lap.coeffs()[i], (lp - lm) / (2 * h)));
  }
  return rep;
}

}  // namespace bgrid
