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
#include <stdexcept>
#include <utility>
#include <vector>

#include "bgrid/image.hpp"

namespace bgrid {

// Rec.601 luma weights.
inline constexpr double kLumaR = 0.299;
inline constexpr double kLumaG = 0.587;
inline constexpr double kLumaB = 0.114;

/// Maps a color to the grid's depth coordinate z in [0, 1].
///
/// FixedLuma clamps Rec.601 luma to [0, 1]. PiecewiseLinearLut additionally
/// passes that luma through K >= 2 knots placed uniformly over [0, 1] and
/// clamps the interpolated value back to [0, 1].
class GuidanceCurve {
 public:
  enum class Kind { FixedLuma, PiecewiseLinearLut };

  GuidanceCurve() = default;

  static GuidanceCurve fixed_luma() { return GuidanceCurve(); }

  static GuidanceCurve lut(std::vector<float> knots) {
    if (knots.size() < 2) {
      throw std::invalid_argument("guidance LUT needs at least 2 knots");
    }
    for (float k : knots) {
      if (!std::isfinite(k)) {
        throw std::invalid_argument("guidance LUT knots must be finite");
      }
    }
    GuidanceCurve g;
    g.kind_ = Kind::PiecewiseLinearLut;
    g.knots_ = std::move(knots);
    return g;
  }

  Kind kind() const { return kind_; }
  const std::vector<float>& knots() const { return knots_; }

  template <class T>
  T operator()(T r, T g, T b) const {
    T z = static_cast<T>(kLumaR) * r + static_cast<T>(kLumaG) * g +
          static_cast<T>(kLumaB) * b;
    z = std::clamp(z, T(0), T(1));
    if (kind_ == Kind::FixedLuma) return z;
    const int segments = static_cast<int>(knots_.size()) - 1;
    const T pos = z * static_cast<T>(segments);
    const int i = std::min(static_cast<int>(pos), segments - 1);
    const T t = pos - static_cast<T>(i);
    const T a = static_cast<T>(knots_[i]);
    const T c = static_cast<T>(knots_[i + 1]);
    return std::clamp(a + t * (c - a), T(0), T(1));
  }

  friend bool operator==(const GuidanceCurve&, const GuidanceCurve&) = default;

 private:
  Kind kind_ = Kind::FixedLuma;
  std::vector<float> knots_;
};

/// Scalar guidance plane, row-major, one value per pixel.
template <class T>
std::vector<T> guidance(const ImagePlane<T>& img, const GuidanceCurve& curve) {
  std::vector<T> z(img.pixel_count());
  const auto v = img.values();
  for (std::size_t p = 0; p < z.size(); ++p) {
    z[p] = curve(v[3 * p], v[3 * p + 1], v[3 * p + 2]);
  }
  return z;
}

}  // namespace bgrid
