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
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bgrid {

/// An H x W x 3 interleaved RGB image with real values, nominally in [0, 1].
template <class T = float>
class ImagePlane {
 public:
  using value_type = T;
  static constexpr int kChannels = 3;

  ImagePlane() = default;

  ImagePlane(int width, int height, T fill = T(0))
      : width_(width), height_(height) {
    if (width < 1 || height < 1) {
      throw std::invalid_argument("image dimensions must be >= 1, got " +
                                  std::to_string(width) + "x" +
                                  std::to_string(height));
    }
    data_.assign(static_cast<std::size_t>(width) * height * kChannels, fill);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width_) * height_;
  }
  bool empty() const { return data_.empty(); }

  T& at(int x, int y, int c) { return data_[index(x, y) + c]; }
  const T& at(int x, int y, int c) const { return data_[index(x, y) + c]; }

  T* row(int y) { return data_.data() + index(0, y); }
  const T* row(int y) const { return data_.data() + index(0, y); }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(),
                       [](T v) { return std::isfinite(v); });
  }

  bool same_size(const ImagePlane& o) const {
    return width_ == o.width_ && height_ == o.height_;
  }

  template <class U>
  ImagePlane<U> cast() const {
    ImagePlane<U> out(width_, height_);
    std::transform(data_.begin(), data_.end(), out.values().begin(),
                   [](T v) { return static_cast<U>(v); });
    return out;
  }

  friend bool operator==(const ImagePlane&, const ImagePlane&) = default;

 private:
  std::size_t index(int x, int y) const {
    return (static_cast<std::size_t>(y) * width_ + x) * kChannels;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

template <class T>
void clamp_unit(ImagePlane<T>& img) {
  for (auto& v : img.values()) v = std::clamp(v, T(0), T(1));
}

namespace detail {

/// Box (area-averaging) resampling of an interleaved H x W x C buffer. Each
/// output sample is the overlap-weighted mean of the source samples its
/// footprint covers.
template <class T>
void resize_area(const T* src, int src_w, int src_h, int channels, T* dst,
                 int dst_w, int dst_h) {
  struct Tap {
    int index;
    double weight;
  };
  auto taps_for = [](int src_n, int dst_n) {
    std::vector<std::vector<Tap>> taps(dst_n);
    const double scale = static_cast<double>(src_n) / dst_n;
    for (int i = 0; i < dst_n; ++i) {
      const double lo = i * scale;
      const double hi = (i + 1) * scale;
      double total = 0;
      for (int s = static_cast<int>(std::floor(lo));
           s < std::min(src_n, static_cast<int>(std::ceil(hi))); ++s) {
        const double w = std::min<double>(hi, s + 1) - std::max<double>(lo, s);
        if (w <= 0) continue;
        taps[i].push_back({s, w});
        total += w;
      }
      for (auto& t : taps[i]) t.weight /= total;
    }
    return taps;
  };
  const auto xt = taps_for(src_w, dst_w);
  const auto yt = taps_for(src_h, dst_h);
  const std::size_t src_stride = static_cast<std::size_t>(src_w) * channels;
  std::vector<double> acc(src_stride);
  std::vector<double> v(channels);
  for (int y = 0; y < dst_h; ++y) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (const auto& ty : yt[y]) {
      const T* row = src + ty.index * src_stride;
      for (std::size_t i = 0; i < src_stride; ++i) acc[i] += ty.weight * row[i];
    }
    T* out_row = dst + static_cast<std::size_t>(y) * dst_w * channels;
    for (int x = 0; x < dst_w; ++x) {
      std::fill(v.begin(), v.end(), 0.0);
      for (const auto& tx : xt[x]) {
        for (int c = 0; c < channels; ++c) {
          v[c] += tx.weight * acc[static_cast<std::size_t>(tx.index) * channels + c];
        }
      }
      for (int c = 0; c < channels; ++c) {
        out_row[static_cast<std::size_t>(x) * channels + c] = static_cast<T>(v[c]);
      }
    }
  }
}

}  // namespace detail

/// Area-averaging resize.
template <class T>
ImagePlane<T> resize_area(const ImagePlane<T>& src, int width, int height) {
  ImagePlane<T> out(width, height);
  detail::resize_area(src.values().data(), src.width(), src.height(), 3,
                      out.values().data(), width, height);
  return out;
}

/// Size of the fitting-resolution proxy: each axis is reduced to at most
/// `edge` pixels, never enlarged.
inline std::array<int, 2> lowres_size(int width, int height, int edge) {
  if (edge < 1) throw std::invalid_argument("lowres edge must be >= 1");
  return {std::min(width, edge), std::min(height, edge)};
}

template <class T, class U>
double mean_squared_error(const ImagePlane<T>& a, const ImagePlane<U>& b) {
  if (!a.same_size(b)) throw std::invalid_argument("image size mismatch");
  const auto va = a.values();
  const auto vb = b.values();
  double sum = 0;
  for (std::size_t i = 0; i < va.size(); ++i) {
    const double d = static_cast<double>(va[i]) - static_cast<double>(vb[i]);
    sum += d * d;
  }
  return sum / static_cast<double>(va.size());
}

/// PSNR in dB with unit peak. Identical images give +infinity.
template <class T, class U>
double psnr(const ImagePlane<T>& a, const ImagePlane<U>& b) {
  const double mse = mean_squared_error(a, b);
  if (mse == 0) return std::numeric_limits<double>::infinity();
  return -10.0 * std::log10(mse);
}

template <class T, class U>
double max_abs_difference(const ImagePlane<T>& a, const ImagePlane<U>& b) {
  if (!a.same_size(b)) throw std::invalid_argument("image size mismatch");
  const auto va = a.values();
  const auto vb = b.values();
  double m = 0;
  for (std::size_t i = 0; i < va.size(); ++i) {
    m = std::max(m, std::abs(static_cast<double>(va[i]) -
                             static_cast<double>(vb[i])));
  }
  return m;
}

}  // namespace bgrid
