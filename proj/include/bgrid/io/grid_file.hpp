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

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "bgrid/grid.hpp"
#include "bgrid/guidance.hpp"
#include "bgrid/io/binary.hpp"

namespace bgrid::io {

// Layout (little-endian):
//   "ABGF" | version u32 = 1 | gw gh gd u32 | rows u32 = 3 | cols u32 = 4 |
//   guidance tag u8 (0 fixed luma, 1 LUT: K u32 + K f32) |
//   gh*gw*gd*12 f32, ordered y -> x -> z -> row-major 3x4.
inline constexpr std::uint32_t kGridFileVersion = 1;

struct GridFile {
  AffineBilateralGrid<float> grid;
  GuidanceCurve curve;

  friend bool operator==(const GridFile&, const GridFile&) = default;
};

inline std::vector<std::uint8_t> encode_grid(const AffineBilateralGrid<float>& grid,
                                             const GuidanceCurve& curve = {}) {
  ByteWriter w;
  w.magic("ABGF");
  w.u32(kGridFileVersion);
  w.u32(static_cast<std::uint32_t>(grid.gw()));
  w.u32(static_cast<std::uint32_t>(grid.gh()));
  w.u32(static_cast<std::uint32_t>(grid.gd()));
  w.u32(kAffineRows);
  w.u32(kAffineCols);
  if (curve.kind() == GuidanceCurve::Kind::FixedLuma) {
    w.u8(0);
  } else {
    w.u8(1);
    w.u32(static_cast<std::uint32_t>(curve.knots().size()));
    for (float k : curve.knots()) w.f32(k);
  }
  for (float v : grid.coeffs()) w.f32(v);
  return w.data();
}

inline GridFile decode_grid(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expect_magic("ABGF");
  const std::size_t version_at = r.offset();
  const std::uint32_t version = r.u32("version");
  if (version != kGridFileVersion) {
    throw ParseError(version_at, "unsupported version " + std::to_string(version));
  }
  std::uint32_t dims[3];
  for (auto& d : dims) {
    const std::size_t at = r.offset();
    d = r.u32("grid dimension");
    if (d < 1 || d > (1u << 16)) {
      throw ParseError(at, "grid dimension out of range: " + std::to_string(d));
    }
  }
  const std::size_t shape_at = r.offset();
  const std::uint32_t rows = r.u32("rows");
  const std::uint32_t cols = r.u32("cols");
  if (rows != kAffineRows || cols != kAffineCols) {
    throw ParseError(shape_at, "expected 3x4 affine cells, got " + std::to_string(rows) +
                                   "x" + std::to_string(cols));
  }
  const std::size_t tag_at = r.offset();
  const std::uint8_t tag = r.u8("guidance tag");
  GuidanceCurve curve;
  if (tag == 1) {
    const std::size_t k_at = r.offset();
    const std::uint32_t k = r.u32("knot count");
    if (k < 2) throw ParseError(k_at, "LUT needs at least 2 knots");
    r.need(static_cast<std::size_t>(k) * 4, "LUT knots");
    std::vector<float> knots(k);
    for (auto& v : knots) {
      const std::size_t at = r.offset();
      v = r.f32("LUT knot");
      if (!std::isfinite(v)) throw ParseError(at, "non-finite LUT knot");
    }
    curve = GuidanceCurve::lut(std::move(knots));
  } else if (tag != 0) {
    throw ParseError(tag_at, "unknown guidance tag " + std::to_string(tag));
  }
  const GridDims gd{static_cast<int>(dims[0]), static_cast<int>(dims[1]),
                    static_cast<int>(dims[2])};
  const std::size_t payload = gd.cell_count() * kCellCoeffs * 4;
  r.need(payload, "coefficient payload");
  AffineBilateralGrid<float> grid(gd);
  for (auto& v : grid.coeffs()) {
    const std::size_t at = r.offset();
    v = r.f32("coefficient");
    if (!std::isfinite(v)) throw ParseError(at, "non-finite coefficient");
  }
  r.expect_end();
  return {std::move(grid), std::move(curve)};
}

inline void write_grid_file(const std::string& path, const AffineBilateralGrid<float>& grid,
                            const GuidanceCurve& curve = {}) {
  write_file(path, encode_grid(grid, curve));
}

inline GridFile read_grid_file(const std::string& path) {
  const auto bytes = read_file(path);
  return with_source(path, [&] { return decode_grid(bytes); });
}

}  // namespace bgrid::io
