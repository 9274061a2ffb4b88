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
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bgrid/grid.hpp"
#include "bgrid/image.hpp"
#include "bgrid/laplacian.hpp"

namespace bgrid {

/// Added to the variance before the square root so that the standard
/// deviation of a constant channel is sqrt(kStdEpsilon), not zero.
inline constexpr double kStdEpsilon = 1e-5;

/// An H x W x C feature map stored row-major in (y, x, c) order.
template <class T = float>
class FeatureMap {
 public:
  FeatureMap() = default;
  FeatureMap(int height, int width, int channels, T fill = T(0))
      : height_(height), width_(width), channels_(channels) {
    if (height < 1 || width < 1 || channels < 1) {
      throw std::invalid_argument("feature map dimensions must be >= 1");
    }
    data_.assign(static_cast<std::size_t>(height) * width * channels, fill);
  }

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }
  std::size_t positions() const {
    return static_cast<std::size_t>(height_) * width_;
  }
  std::size_t size() const { return data_.size(); }

  T& at(int y, int x, int c) {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  const T& at(int y, int x, int c) const {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  /// Channel c of spatial position p.
  T& at(std::size_t p, int c) { return data_[p * channels_ + c]; }
  const T& at(std::size_t p, int c) const { return data_[p * channels_ + c]; }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }

  bool same_shape(const FeatureMap& o) const {
    return height_ == o.height_ && width_ == o.width_ &&
           channels_ == o.channels_;
  }

  friend bool operator==(const FeatureMap&, const FeatureMap&) = default;

 private:
  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::vector<T> data_;
};

template <class T = float>
struct NamedFeatureMap {
  std::string name;
  FeatureMap<T> map;

  friend bool operator==(const NamedFeatureMap&,
                         const NamedFeatureMap&) = default;
};

/// Ordered list of named layers, e.g. the activations of several network
/// layers for one image.
template <class T = float>
using FeatureMapSet = std::vector<NamedFeatureMap<T>>;

template <class T>
FeatureMap<T> to_feature_map(const ImagePlane<T>& img) {
  FeatureMap<T> m(img.height(), img.width(), 3);
  std::copy(img.values().begin(), img.values().end(), m.values().begin());
  return m;
}

template <class T>
ImagePlane<T> to_image(const FeatureMap<T>& m) {
  if (m.channels() != 3) {
    throw std::invalid_argument("to_image: feature map must have 3 channels");
  }
  ImagePlane<T> img(m.width(), m.height());
  std::copy(m.values().begin(), m.values().end(), img.values().begin());
  return img;
}

struct ChannelStats {
  std::vector<double> mean;
  std::vector<double> stddev;
};

/// Population mean and sqrt(variance + kStdEpsilon) per channel, over all
/// spatial positions.
template <class T>
ChannelStats channel_stats(const FeatureMap<T>& m) {
  if (m.positions() < 2) {
    throw std::invalid_argument(
        "channel_stats: feature map needs at least 2 positions");
  }
  const int C = m.channels();
  ChannelStats s{std::vector<double>(C, 0.0), std::vector<double>(C, 0.0)};
  // Welford's update, one accumulator per channel.
  std::vector<double> m2(C, 0.0);
  for (std::size_t p = 0; p < m.positions(); ++p) {
    const double n = static_cast<double>(p + 1);
    for (int c = 0; c < C; ++c) {
      const double v = static_cast<double>(m.at(p, c));
      const double delta = v - s.mean[c];
      s.mean[c] += delta / n;
      m2[c] += delta * (v - s.mean[c]);
    }
  }
  const double n = static_cast<double>(m.positions());
  for (int c = 0; c < C; ++c) {
    s.stddev[c] = std::sqrt(std::max(0.0, m2[c] / n) + kStdEpsilon);
  }
  return s;
}

/// Adaptive instance normalization: renormalizes each content channel to the
/// style channel's mean and standard deviation.
template <class T>
FeatureMap<T> adain(const FeatureMap<T>& content, const FeatureMap<T>& style) {
  if (content.channels() != style.channels()) {
    throw std::invalid_argument("adain: channel count mismatch (" +
                                std::to_string(content.channels()) + " vs " +
                                std::to_string(style.channels()) + ")");
  }
  const auto cs = channel_stats(content);
  const auto ss = channel_stats(style);
  FeatureMap<T> out = content;
  const int C = content.channels();
  for (std::size_t p = 0; p < content.positions(); ++p) {
    for (int c = 0; c < C; ++c) {
      const double v = static_cast<double>(content.at(p, c));
      out.at(p, c) = static_cast<T>(ss.stddev[c] * ((v - cs.mean[c]) /
                                                    cs.stddev[c]) +
                                    ss.mean[c]);
    }
  }
  return out;
}

/// C x C Gram matrix F F^T / (H W), row-major.
template <class T>
std::vector<double> gram_matrix(const FeatureMap<T>& m) {
  const int C = m.channels();
  std::vector<double> g(static_cast<std::size_t>(C) * C, 0.0);
  for (std::size_t p = 0; p < m.positions(); ++p) {
    for (int i = 0; i < C; ++i) {
      const double a = static_cast<double>(m.at(p, i));
      for (int j = i; j < C; ++j) {
        g[i * C + j] += a * static_cast<double>(m.at(p, j));
      }
    }
  }
  const double n = static_cast<double>(m.positions());
  for (int i = 0; i < C; ++i) {
    for (int j = i; j < C; ++j) {
      g[i * C + j] /= n;
      g[j * C + i] = g[i * C + j];
    }
  }
  return g;
}

namespace detail {

template <class T>
void check_layers(const FeatureMapSet<T>& a, const FeatureMapSet<T>& b,
                  const char* what, bool same_spatial) {
  if (a.size() != b.size()) {
    throw std::invalid_argument(std::string(what) + ": layer count mismatch");
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& x = a[i].map;
    const auto& y = b[i].map;
    const bool ok = same_spatial ? x.same_shape(y)
                                 : x.channels() == y.channels();
    if (!ok) {
      throw std::invalid_argument(std::string(what) +
                                  ": shape mismatch at layer " +
                                  std::to_string(i));
    }
  }
}

}  // namespace detail

/// Sum over layers of ||F_i[out] - F_i[content]||^2 / (H_i W_i C_i).
template <class T>
double content_loss(const FeatureMapSet<T>& out,
                    const FeatureMapSet<T>& content) {
  detail::check_layers(out, content, "content_loss", true);
  double total = 0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto a = out[i].map.values();
    const auto b = content[i].map.values();
    double s = 0;
    for (std::size_t k = 0; k < a.size(); ++k) {
      const double d = static_cast<double>(a[k]) - static_cast<double>(b[k]);
      s += d * d;
    }
    total += s / static_cast<double>(a.size());
  }
  return total;
}

/// Sum over layers of ||G_i[out] - G_i[style]||_F^2 / C_i^2. Spatial sizes
/// may differ; channel counts must match.
template <class T>
double style_loss_gram(const FeatureMapSet<T>& out,
                       const FeatureMapSet<T>& style) {
  detail::check_layers(out, style, "style_loss_gram", false);
  double total = 0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto ga = gram_matrix(out[i].map);
    const auto gb = gram_matrix(style[i].map);
    double s = 0;
    for (std::size_t k = 0; k < ga.size(); ++k) {
      const double d = ga[k] - gb[k];
      s += d * d;
    }
    total += s / static_cast<double>(ga.size());
  }
  return total;
}

/// Sum over layers of (||mu_out - mu_style||^2 + ||sigma_out - sigma_style||^2)
/// / C_i.
template <class T>
double style_loss_adain(const FeatureMapSet<T>& out,
                        const FeatureMapSet<T>& style) {
  detail::check_layers(out, style, "style_loss_adain", false);
  double total = 0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto so = channel_stats(out[i].map);
    const auto ss = channel_stats(style[i].map);
    double s = 0;
    for (std::size_t c = 0; c < so.mean.size(); ++c) {
      const double dm = so.mean[c] - ss.mean[c];
      const double ds = so.stddev[c] - ss.stddev[c];
      s += dm * dm + ds * ds;
    }
    total += s / static_cast<double>(so.mean.size());
  }
  return total;
}

struct LossWeights {
  double lambda_c = 0.5;
  double lambda_sa = 1.0;
  double lambda_r = 0.15;
};

inline void check_weights(const LossWeights& w) {
  if (!(w.lambda_c >= 0 && w.lambda_sa >= 0 && w.lambda_r >= 0)) {
    throw std::invalid_argument("loss weights must be >= 0");
  }
}

struct LossTerms {
  double content = 0;
  double style_adain = 0;
  double laplacian = 0;
  double total = 0;
};

inline double combine_losses(const LossWeights& w, double content,
                             double style_adain, double laplacian) {
  check_weights(w);
  return w.lambda_c * content + w.lambda_sa * style_adain +
         w.lambda_r * laplacian;
}

/// lambda_c L_c + lambda_sa L_sa + lambda_r L_r.
template <class T, class G>
LossTerms total_loss(const FeatureMapSet<T>& out,
                     const FeatureMapSet<T>& content,
                     const FeatureMapSet<T>& style,
                     const AffineBilateralGrid<G>& grid,
                     const LossWeights& weights = {}) {
  LossTerms t;
  t.content = content_loss(out, content);
  t.style_adain = style_loss_adain(out, style);
  t.laplacian = laplacian_energy(grid);
  t.total = combine_losses(weights, t.content, t.style_adain, t.laplacian);
  return t;
}

/// alpha L_c + beta L_s with the Gram-matrix style loss.
template <class T>
double gram_style_transfer_loss(const FeatureMapSet<T>& out,
                                const FeatureMapSet<T>& content,
                                const FeatureMapSet<T>& style, double alpha,
                                double beta) {
  return alpha * content_loss(out, content) +
         beta * style_loss_gram(out, style);
}

}  // namespace bgrid
