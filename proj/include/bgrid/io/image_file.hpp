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

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <bit>
#include <cctype>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "bgrid/image.hpp"
#include "bgrid/io/binary.hpp"

namespace bgrid::io {

// Image files: PNG (8 or 16 bits per channel, decoded to [0, 1] without any
// transfer-curve conversion) and PFM (32-bit float RGB, stores values
// outside [0, 1] unchanged).

namespace detail {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using File = std::unique_ptr<std::FILE, FileCloser>;

inline File open(const std::string& path, const char* mode) {
  File f(std::fopen(path.c_str(), mode));
  if (!f) throw IoError("cannot open " + path);
  return f;
}

[[noreturn]] inline void png_error_fn(png_structp png, png_const_charp msg) {
  auto* what = static_cast<std::string*>(png_get_error_ptr(png));
  if (what) *what = msg;
  png_longjmp(png, 1);
}

inline void png_warning_fn(png_structp, png_const_charp) {}

inline bool ends_with(const std::string& s, const std::string& suffix) {
  if (s.size() < suffix.size()) return false;
  return std::equal(suffix.rbegin(), suffix.rend(), s.rbegin(), [](char a, char b) {
    return std::tolower(static_cast<unsigned char>(a)) == b;
  });
}

}  // namespace detail

inline ImagePlane<float> read_png(const std::string& path) {
  auto file = detail::open(path, "rb");
  std::uint8_t sig[8];
  if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw ParseError(path, ParseError(0, "not a PNG file"));
  }
  std::string err;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err,
                                           detail::png_error_fn, detail::png_warning_fn);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("libpng initialization failed");
  }
  // Everything with a destructor is declared before setjmp so a libpng error
  // never jumps over a constructor.
  std::vector<std::uint8_t> buffer;
  std::vector<png_bytep> rows;
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  int depth = 0;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError(path + ": " + err);
  }
  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  int color_type = 0;
  png_get_IHDR(png, info, &width, &height, &depth, &color_type, nullptr, nullptr, nullptr);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA) {
    png_set_gray_to_rgb(png);
  }
  if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) {
    png_set_tRNS_to_alpha(png);
    png_set_strip_alpha(png);
  }
  png_read_update_info(png, info);
  depth = png_get_bit_depth(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);
  buffer.resize(stride * height);
  rows.resize(height);
  for (png_uint_32 y = 0; y < height; ++y) rows[y] = buffer.data() + y * stride;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  ImagePlane<float> img(static_cast<int>(width), static_cast<int>(height));
  auto v = img.values();
  if (depth == 16) {
    for (std::size_t y = 0; y < height; ++y) {
      const std::uint8_t* row = rows[y];
      for (std::size_t i = 0; i < width * 3; ++i) {
        const unsigned s = (row[2 * i] << 8) | row[2 * i + 1];
        v[y * width * 3 + i] = static_cast<float>(s) / 65535.0f;
      }
    }
  } else {
    for (std::size_t y = 0; y < height; ++y) {
      const std::uint8_t* row = rows[y];
      for (std::size_t i = 0; i < width * 3; ++i) {
        v[y * width * 3 + i] = static_cast<float>(row[i]) / 255.0f;
      }
    }
  }
  return img;
}

/// Writes 8- or 16-bit RGB. Values are saturated to [0, 1] and rounded to the
/// nearest code.
inline void write_png(const std::string& path, const ImagePlane<float>& img, int bit_depth = 8) {
  if (bit_depth != 8 && bit_depth != 16) {
    throw std::invalid_argument("PNG bit depth must be 8 or 16");
  }
  const std::size_t w = static_cast<std::size_t>(img.width());
  const std::size_t h = static_cast<std::size_t>(img.height());
  const std::size_t bytes = bit_depth / 8;
  const float scale = bit_depth == 8 ? 255.0f : 65535.0f;
  std::vector<std::uint8_t> buffer(w * h * 3 * bytes);
  const auto v = img.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    const float c = std::isfinite(v[i]) ? std::clamp(v[i], 0.0f, 1.0f) : 0.0f;
    const auto q = static_cast<unsigned>(std::lround(c * scale));
    if (bytes == 1) {
      buffer[i] = static_cast<std::uint8_t>(q);
    } else {
      buffer[2 * i] = static_cast<std::uint8_t>(q >> 8);
      buffer[2 * i + 1] = static_cast<std::uint8_t>(q & 0xff);
    }
  }

  auto file = detail::open(path, "wb");
  std::string err;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &err,
                                            detail::png_error_fn, detail::png_warning_fn);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("libpng initialization failed");
  }
  std::vector<png_bytep> rows(h);
  for (std::size_t y = 0; y < h; ++y) rows[y] = buffer.data() + y * w * 3 * bytes;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError(path + ": " + err);
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), bit_depth,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

/// PFM ("PF", little-endian scale -1, rows stored bottom to top).
inline void write_pfm(const std::string& path, const ImagePlane<float>& img) {
  ByteWriter w;
  const std::string header =
      "PF\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n-1.0\n";
  w.bytes({reinterpret_cast<const std::uint8_t*>(header.data()), header.size()});
  for (int y = img.height() - 1; y >= 0; --y) {
    const float* row = img.row(y);
    for (int i = 0; i < img.width() * 3; ++i) w.f32(row[i]);
  }
  write_file(path, w.data());
}

inline ImagePlane<float> decode_pfm(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 0;
  auto token = [&](const char* what) {
    while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
    const std::size_t start = pos;
    while (pos < bytes.size() && !std::isspace(bytes[pos])) ++pos;
    if (start == pos) throw ParseError(start, std::string("missing PFM ") + what);
    return std::string(bytes.begin() + start, bytes.begin() + pos);
  };
  if (token("magic") != "PF") throw ParseError(0, "not an RGB PFM file");
  const std::size_t dims_at = pos;
  int width = 0;
  int height = 0;
  double scale = 0;
  try {
    width = std::stoi(token("width"));
    height = std::stoi(token("height"));
    scale = std::stod(token("scale"));
  } catch (const std::logic_error&) {
    throw ParseError(dims_at, "malformed PFM header");
  }
  if (width < 1 || height < 1) throw ParseError(dims_at, "bad PFM dimensions");
  ByteReader r(bytes);
  r.skip(pos + 1, "PFM header");  // one whitespace byte follows the scale
  ImagePlane<float> img(width, height);
  const bool little = scale < 0;
  for (int y = height - 1; y >= 0; --y) {
    float* row = img.row(y);
    for (int i = 0; i < width * 3; ++i) {
      std::uint32_t u = r.u32("PFM pixel");
      if (!little) u = __builtin_bswap32(u);
      row[i] = std::bit_cast<float>(u);
    }
  }
  return img;
}

inline ImagePlane<float> read_pfm(const std::string& path) {
  const auto bytes = read_file(path);
  return with_source(path, [&] { return decode_pfm(bytes); });
}

inline ImagePlane<float> read_image(const std::string& path) {
  if (detail::ends_with(path, ".pfm")) return read_pfm(path);
  return read_png(path);
}

/// Dispatches on extension: ".pfm" keeps floats, anything else is PNG.
inline void write_image(const std::string& path, const ImagePlane<float>& img,
                        int png_bit_depth = 8) {
  if (detail::ends_with(path, ".pfm")) {
    write_pfm(path, img);
  } else {
    write_png(path, img, png_bit_depth);
  }
}

}  // namespace bgrid::io
