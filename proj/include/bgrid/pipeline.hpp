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
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bgrid/fit.hpp"
#include "bgrid/grid.hpp"
#include "bgrid/guidance.hpp"
#include "bgrid/image.hpp"
#include "bgrid/slice.hpp"
#include "bgrid/stats.hpp"

namespace bgrid {

struct StylizeConfig {
  int lowres = 256;
  GridDims dims{16, 16, 8};
  double lambda_r = 0.15;
  int max_iters = 200;
  double tol = 1e-6;
  bool clamp_output = false;
  GuidanceCurve curve;
  /// Optional feature representations used for statistics matching instead
  /// of raw RGB. Only the layer named `feature_layer` (or the first layer
  /// when empty) is used; both sets must contain it.
  std::optional<FeatureMapSet<float>> content_features;
  std::optional<FeatureMapSet<float>> style_features;
  std::string feature_layer;
  unsigned workers = 0;
};

struct StylizeResult {
  ImagePlane<float> image;
  AffineBilateralGrid<float> grid;
  FitReport fit;
  ImagePlane<float> content_lowres;
  ImagePlane<float> target_lowres;
};

inline void check_config(const StylizeConfig& cfg) {
  if (cfg.lowres < 1) throw std::invalid_argument("lowres must be >= 1");
  check_dims(cfg.dims);
  if (!(cfg.lambda_r >= 0)) throw std::invalid_argument("lambda_r must be >= 0");
  if (cfg.content_features.has_value() != cfg.style_features.has_value()) {
    throw std::invalid_argument(
        "content and style features must be supplied together");
  }
}

inline ImagePlane<float> downsample_to_lowres(const ImagePlane<float>& img,
                                              int edge) {
  const auto [w, h] = lowres_size(img.width(), img.height(), edge);
  if (w == img.width() && h == img.height()) return img;
  return resize_area(img, w, h);
}

template <class T>
FeatureMap<T> resize_feature_map(const FeatureMap<T>& m, int height,
                                 int width) {
  if (m.height() == height && m.width() == width) return m;
  FeatureMap<T> out(height, width, m.channels());
  detail::resize_area(m.values().data(), m.width(), m.height(), m.channels(),
                      out.values().data(), width, height);
  return out;
}

namespace detail {

inline const FeatureMap<float>& pick_layer(const FeatureMapSet<float>& set,
                                           const std::string& name,
                                           const char* which) {
  if (set.empty()) {
    throw std::invalid_argument(std::string(which) + " features: no layers");
  }
  if (name.empty()) return set.front().map;
  for (const auto& l : set) {
    if (l.name == name) return l.map;
  }
  throw std::invalid_argument(std::string(which) + " features: no layer \"" +
                              name + "\"");
}

/// Solves the symmetric positive definite system a x = b in place
/// (Cholesky). `a` is n x n row-major.
inline std::vector<double> solve_spd(std::vector<double> a,
                                     std::vector<double> b, int n) {
  for (int j = 0; j < n; ++j) {
    double d = a[j * n + j];
    for (int k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
    if (!(d > 0)) throw std::runtime_error("decoder system is singular");
    d = std::sqrt(d);
    a[j * n + j] = d;
    for (int i = j + 1; i < n; ++i) {
      double s = a[i * n + j];
      for (int k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
      a[i * n + j] = s / d;
    }
  }
  for (int i = 0; i < n; ++i) {
    double s = b[i];
    for (int k = 0; k < i; ++k) s -= a[i * n + k] * b[k];
    b[i] = s / a[i * n + i];
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (int k = i + 1; k < n; ++k) s -= a[k * n + i] * b[k];
    b[i] = s / a[i * n + i];
  }
  return b;
}

/// Least-squares linear decoder from features (plus a bias) to RGB, fitted
/// on the content image, then applied to `stylized` features.
inline ImagePlane<float> decode_to_rgb(const FeatureMap<float>& content,
                                       const ImagePlane<float>& content_rgb,
                                       const FeatureMap<float>& stylized) {
  const int n = content.channels() + 1;
  std::vector<double> ata(static_cast<std::size_t>(n) * n, 0.0);
  std::vector<std::vector<double>> atb(3, std::vector<double>(n, 0.0));
  std::vector<double> f(n);
  const auto rgb = content_rgb.values();
  for (std::size_t p = 0; p < content.positions(); ++p) {
    for (int c = 0; c + 1 < n; ++c) f[c] = content.at(p, c);
    f[n - 1] = 1.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) ata[i * n + j] += f[i] * f[j];
      for (int k = 0; k < 3; ++k) atb[k][i] += f[i] * rgb[3 * p + k];
    }
  }
  // Tiny ridge keeps rank-deficient feature sets solvable.
  double trace = 0;
  for (int i = 0; i < n; ++i) trace += ata[i * n + i];
  for (int i = 0; i < n; ++i) ata[i * n + i] += 1e-9 * trace / n;
  std::vector<std::vector<double>> decoder;
  for (int k = 0; k < 3; ++k) decoder.push_back(solve_spd(ata, atb[k], n));

  ImagePlane<float> out(stylized.width(), stylized.height());
  auto o = out.values();
  for (std::size_t p = 0; p < stylized.positions(); ++p) {
    for (int k = 0; k < 3; ++k) {
      double s = decoder[k][n - 1];
      for (int c = 0; c + 1 < n; ++c) s += decoder[k][c] * stylized.at(p, c);
      o[3 * p + k] = static_cast<float>(s);
    }
  }
  return out;
}

}  // namespace detail

/// Statistics-matched low-resolution target for the content image.
inline ImagePlane<float> stylized_target(const ImagePlane<float>& content_lr,
                                         const ImagePlane<float>& style_lr,
                                         const StylizeConfig& cfg) {
  if (!cfg.content_features) {
    return to_image(adain(to_feature_map(content_lr), to_feature_map(style_lr)));
  }
  const auto& fc = detail::pick_layer(*cfg.content_features, cfg.feature_layer,
                                      "content");
  const auto& fs = detail::pick_layer(*cfg.style_features, cfg.feature_layer,
                                      "style");
  const auto fc_lr =
      resize_feature_map(fc, content_lr.height(), content_lr.width());
  return detail::decode_to_rgb(fc_lr, content_lr, adain(fc_lr, fs));
}

/// Photorealistic style transfer through a fitted affine bilateral grid:
/// downsample both images, match the content's statistics to the style's
/// at low resolution, fit a grid from the low-resolution content to that
/// target, and render the grid over the full-resolution content.
inline StylizeResult stylize(const ImagePlane<float>& content,
                             const ImagePlane<float>& style,
                             const StylizeConfig& cfg = {}) {
  check_config(cfg);
  if (content.empty() || style.empty()) {
    throw std::invalid_argument("stylize: empty image");
  }
  if (!content.all_finite() || !style.all_finite()) {
    throw std::invalid_argument("stylize: images contain non-finite values");
  }
  StylizeResult res;
  res.content_lowres = downsample_to_lowres(content, cfg.lowres);
  const auto style_lr = downsample_to_lowres(style, cfg.lowres);
  res.target_lowres = stylized_target(res.content_lowres, style_lr, cfg);

  FitProblem<float> pb;
  pb.input_lowres = res.content_lowres;
  pb.output_lowres = res.target_lowres;
  pb.curve = cfg.curve;
  pb.dims = cfg.dims;
  pb.lambda_r = cfg.lambda_r;
  pb.max_iters = cfg.max_iters;
  pb.tol = cfg.tol;
  pb.workers = cfg.workers;
  auto fit = fit_grid(pb);
  res.grid = std::move(fit.grid);
  res.fit = fit.report;

  res.image = slice_apply(res.grid, content, cfg.curve, cfg.workers);
  if (cfg.clamp_output) clamp_unit(res.image);
  return res;
}

}  // namespace bgrid
