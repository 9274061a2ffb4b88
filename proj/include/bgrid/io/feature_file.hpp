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

#include "bgrid/io/binary.hpp"
#include "bgrid/stats.hpp"

namespace bgrid::io {

// Layout (little-endian):
//   "FMAP" | version u32 = 1 | layer count u32 |
//   per layer: name length u32, UTF-8 name, H W C u32, H*W*C f32 in (y, x, c)
//   order.
inline constexpr std::uint32_t kFeatureFileVersion = 1;

inline std::vector<std::uint8_t> encode_features(const FeatureMapSet<float>& layers) {
  ByteWriter w;
  w.magic("FMAP");
  w.u32(kFeatureFileVersion);
  w.u32(static_cast<std::uint32_t>(layers.size()));
  for (const auto& layer : layers) {
    w.u32(static_cast<std::uint32_t>(layer.name.size()));
    w.bytes({reinterpret_cast<const std::uint8_t*>(layer.name.data()), layer.name.size()});
    w.u32(static_cast<std::uint32_t>(layer.map.height()));
    w.u32(static_cast<std::uint32_t>(layer.map.width()));
    w.u32(static_cast<std::uint32_t>(layer.map.channels()));
    for (float v : layer.map.values()) w.f32(v);
  }
  return w.data();
}

inline FeatureMapSet<float> decode_features(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expect_magic("FMAP");
  const std::size_t version_at = r.offset();
  const std::uint32_t version = r.u32("version");
  if (version != kFeatureFileVersion) {
    throw ParseError(version_at, "unsupported version " + std::to_string(version));
  }
  const std::uint32_t count = r.u32("layer count");
  FeatureMapSet<float> layers;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t name_len = r.u32("layer name length");
    std::string name = r.string(name_len, "layer name");
    std::uint32_t shape[3];
    for (auto& s : shape) {
      const std::size_t at = r.offset();
      s = r.u32("layer dimension");
      if (s < 1 || s > (1u << 20)) {
        throw ParseError(at, "layer dimension out of range: " + std::to_string(s));
      }
    }
    const std::size_t n = static_cast<std::size_t>(shape[0]) * shape[1] * shape[2];
    if (n > r.remaining() / 4) {
      throw ParseError(r.offset(), "truncated layer data: need " + std::to_string(n * 4) +
                                       " bytes, have " + std::to_string(r.remaining()));
    }
    FeatureMap<float> map(static_cast<int>(shape[0]), static_cast<int>(shape[1]),
                          static_cast<int>(shape[2]));
    for (auto& v : map.values()) {
      const std::size_t at = r.offset();
      v = r.f32("feature value");
      if (!std::isfinite(v)) throw ParseError(at, "non-finite feature value");
    }
    layers.push_back({std::move(name), std::move(map)});
  }
  r.expect_end();
  return layers;
}

inline void write_feature_file(const std::string& path, const FeatureMapSet<float>& layers) {
  write_file(path, encode_features(layers));
}

inline FeatureMapSet<float> read_feature_file(const std::string& path) {
  const auto bytes = read_file(path);
  return with_source(path, [&] { return decode_features(bytes); });
}

}  // namespace bgrid::io
