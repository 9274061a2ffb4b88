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
#include <chrono>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "bgrid/grid.hpp"
#include "bgrid/image.hpp"
#include "bgrid/slice.hpp"

namespace bgrid {

struct BenchReport {
  int width = 0;
  int height = 0;
  GridDims dims;
  int iters = 0;
  double median_seconds = 0;
  double min_seconds = 0;

  double megapixels() const {
    return static_cast<double>(width) * height / 1e6;
  }
  double median_mpix_per_second() const {
    return megapixels() / median_seconds;
  }
  double peak_mpix_per_second() const { return megapixels() / min_seconds; }
};

inline double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median of empty set");
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

/// Smooth, full-range synthetic photo stand-in for benchmarks and tests.
inline ImagePlane<float> synthetic_image(int width, int height,
                                         unsigned seed = 0) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<float> phase(0.0f, 6.2831853f);
  std::uniform_real_distribution<float> freq(1.0f, 4.0f);
  float ph[6];
  float fr[6];
  for (int i = 0; i < 6; ++i) {
    ph[i] = phase(rng);
    fr[i] = freq(rng);
  }
  ImagePlane<float> img(width, height);
  for (int y = 0; y < height; ++y) {
    const float v = (y + 0.5f) / height;
    float* row = img.row(y);
    for (int x = 0; x < width; ++x) {
      const float u = (x + 0.5f) / width;
      for (int c = 0; c < 3; ++c) {
        const float s = std::sin(6.2831853f * fr[2 * c] * u + ph[2 * c]) *
                        std::cos(6.2831853f * fr[2 * c + 1] * v +
                                 ph[2 * c + 1]);
        row[3 * x + c] = 0.5f + 0.45f * s;
      }
    }
  }
  return img;
}

/// A grid with varied, smoothly changing cells (not the identity), so that
/// rendering does the same work it does for real grids.
inline AffineBilateralGrid<float> synthetic_grid(GridDims dims,
                                                 unsigned seed = 0) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<float> jitter(-0.1f, 0.1f);
  auto g = make_identity_grid<float>(dims.gw, dims.gh, dims.gd);
  for (auto& v : g.coeffs()) v += jitter(rng);
  return g;
}

/// Times slice_apply over `iters` runs after one untimed warmup. Image
/// synthesis and any file I/O are outside the timed region.
inline BenchReport bench_slice(int width, int height, GridDims dims,
                               int iters = 9, unsigned workers = 0) {
  if (iters < 1) throw std::invalid_argument("bench: iters must be >= 1");
  const auto img = synthetic_image(width, height, 1);
  const auto grid = synthetic_grid(dims, 2);
  ImagePlane<float> out(width, height);
  slice_apply_into(grid, img, {}, out, workers);
  std::vector<double> times;
  times.reserve(iters);
  for (int i = 0; i < iters; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    slice_apply_into(grid, img, {}, out, workers);
    const auto t1 = std::chrono::steady_clock::now();
    times.push_back(std::chrono::duration<double>(t1 - t0).count());
    if (!std::isfinite(out.values()[0])) {
      throw std::runtime_error("bench: non-finite output");
    }
  }
  BenchReport rep;
  rep.width = width;
  rep.height = height;
  rep.dims = dims;
  rep.iters = iters;
  rep.median_seconds = median(times);
  rep.min_seconds = *std::min_element(times.begin(), times.end());
  return rep;
}

}  // namespace bgrid
