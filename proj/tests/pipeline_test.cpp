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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "bgrid/pipeline.hpp"
#include "test_util.hpp"

namespace bgrid {
namespace {

using testing::scene_image;

ChannelStats rgb_stats(const ImagePlane<float>& img) {
  return channel_stats(to_feature_map(img));
}

StylizeConfig small_config() {
  StylizeConfig cfg;
  cfg.lowres = 64;
  cfg.dims = {8, 8, 4};
  return cfg;
}

TEST(Lowres, NeverEnlarges) {
  EXPECT_EQ(lowres_size(4000, 3000, 256), (std::array<int, 2>{256, 256}));
  EXPECT_EQ(lowres_size(100, 3000, 256), (std::array<int, 2>{100, 256}));
  EXPECT_EQ(lowres_size(10, 20, 256), (std::array<int, 2>{10, 20}));
  const auto img = scene_image(40, 30, 1);
  EXPECT_EQ(downsample_to_lowres(img, 256), img);
}

TEST(Lowres, AreaAveragePreservesMean) {
  const auto img = scene_image(300, 200, 2);
  const auto lr = downsample_to_lowres(img, 64);
  EXPECT_EQ(lr.width(), 64);
  EXPECT_EQ(lr.height(), 64);
  const auto a = rgb_stats(img), b = rgb_stats(lr);
  for (int c = 0; c < 3; ++c) EXPECT_NEAR(a.mean[c], b.mean[c], 1e-4);
}

TEST(Stylize, StyleEqualToContentIsNearIdentity) {
  const auto content = scene_image(320, 240, 3);
  const auto res = stylize(content, content, small_config());
  EXPECT_GE(psnr(res.image, content), 45.0);
}

TEST(Stylize, MatchesStyleStatistics) {
  const auto content = scene_image(256, 192, 4, 0.1, 0.6);
  const auto style = scene_image(200, 200, 5, 0.3, 0.95);
  const auto res = stylize(content, style, small_config());
  const auto so = rgb_stats(res.image);
  const auto ss = rgb_stats(style);
  for (int c = 0; c < 3; ++c) EXPECT_NEAR(so.mean[c], ss.mean[c], 0.05);
  EXPECT_TRUE(res.image.all_finite());
  EXPECT_EQ(res.image.width(), 256);
  EXPECT_EQ(res.grid.dims(), (GridDims{8, 8, 4}));
}

TEST(Stylize, MonochromeStyleCollapsesSpread) {
  const auto content = scene_image(256, 256, 6);
  const ImagePlane<float> gray(64, 64, 0.5f);
  const auto res = stylize(content, gray, small_config());
  ASSERT_TRUE(res.image.all_finite());
  const auto so = rgb_stats(res.image);
  const auto sc = rgb_stats(content);
  for (int c = 0; c < 3; ++c) {
    EXPECT_LE(so.stddev[c], 0.1 * sc.stddev[c]) << c;
    EXPECT_NEAR(so.mean[c], 0.5, 0.02);
  }
}

TEST(Stylize, SwappingInputsChangesOutput) {
  const auto a = scene_image(128, 128, 7, 0.0, 0.5);
  const auto b = scene_image(128, 128, 8, 0.5, 1.0);
  const auto ab = stylize(a, b, small_config());
  const auto ba = stylize(b, a, small_config());
  EXPECT_GT(max_abs_difference(ab.image, ba.image), 0.1);
}

TEST(Stylize, SecondPassBarelyMovesStatistics) {
  const auto content = scene_image(192, 160, 9);
  const auto style = scene_image(160, 160, 10, 0.2, 0.8);
  const auto once = stylize(content, style, small_config());
  const auto twice = stylize(once.image, style, small_config());
  const auto s1 = rgb_stats(once.image), s2 = rgb_stats(twice.image);
  for (int c = 0; c < 3; ++c) {
    EXPECT_LE(std::abs(s1.mean[c] - s2.mean[c]), 1e-2);
    EXPECT_LE(std::abs(s1.stddev[c] - s2.stddev[c]), 1e-2);
  }
}

TEST(Stylize, SingleCellGridIsGlobalAffine) {
  auto cfg = small_config();
  cfg.dims = {1, 1, 1};
  const auto content = scene_image(150, 100, 11);
  const auto style = scene_image(90, 90, 12);
  const auto res = stylize(content, style, cfg);
  std::array<float, 12> a{};
  std::copy(res.grid.coeffs().begin(), res.grid.coeffs().end(), a.begin());
  EXPECT_EQ(res.image, testing::apply_global_affine(content, a));
}

TEST(Stylize, ClampOption) {
  auto cfg = small_config();
  cfg.clamp_output = true;
  const auto content = scene_image(64, 64, 13, 0.0, 1.0);
  const auto style = scene_image(64, 64, 14, 0.0, 1.0);
  const auto res = stylize(content, style, cfg);
  for (float v : res.image.values()) {
    ASSERT_GE(v, 0.0f);
    ASSERT_LE(v, 1.0f);
  }
}

TEST(Stylize, RgbFeaturesMatchDefaultPath) {
  const auto content = scene_image(128, 96, 15);
  const auto style = scene_image(80, 80, 16);
  const auto plain = stylize(content, style, small_config());
  auto cfg = small_config();
  cfg.content_features =
      FeatureMapSet<float>{{"rgb", to_feature_map(content)}};
  // Style statistics are taken at whatever size the features come in; hand
  // over the same low-resolution style the default path sees.
  cfg.style_features = FeatureMapSet<float>{
      {"rgb", to_feature_map(downsample_to_lowres(style, cfg.lowres))}};
  cfg.feature_layer = "rgb";
  const auto feat = stylize(content, style, cfg);
  EXPECT_LE(max_abs_difference(feat.target_lowres, plain.target_lowres),
            1e-3);
  EXPECT_LE(max_abs_difference(feat.image, plain.image), 1e-2);
}

TEST(Stylize, FeaturePathUsesRicherFeatures) {
  // Six channels: RGB plus squared RGB. The decoder maps adain'd features
  // back to colors; output must be finite and follow the style mean.
  const auto content = scene_image(96, 96, 17);
  const auto style = scene_image(96, 96, 18, 0.4, 0.9);
  auto lift = [](const ImagePlane<float>& img) {
    FeatureMap<float> m(img.height(), img.width(), 6);
    for (int y = 0; y < img.height(); ++y)
      for (int x = 0; x < img.width(); ++x)
        for (int c = 0; c < 3; ++c) {
          m.at(y, x, c) = img.at(x, y, c);
          m.at(y, x, c + 3) = img.at(x, y, c) * img.at(x, y, c);
        }
    return m;
  };
  auto cfg = small_config();
  cfg.content_features = FeatureMapSet<float>{{"f", lift(content)}};
  cfg.style_features = FeatureMapSet<float>{{"f", lift(style)}};
  const auto res = stylize(content, style, cfg);
  ASSERT_TRUE(res.image.all_finite());
  const auto so = rgb_stats(res.image), ss = rgb_stats(style);
  for (int c = 0; c < 3; ++c) EXPECT_NEAR(so.mean[c], ss.mean[c], 0.05);
}

TEST(Stylize, RejectsBadConfigs) {
  const auto img = scene_image(16, 16, 19);
  auto cfg = small_config();
  cfg.content_features = FeatureMapSet<float>{{"a", to_feature_map(img)}};
  EXPECT_THROW(stylize(img, img, cfg), std::invalid_argument);
  cfg.style_features = FeatureMapSet<float>{{"a", to_feature_map(img)}};
  cfg.feature_layer = "missing";
  EXPECT_THROW(stylize(img, img, cfg), std::invalid_argument);
  cfg = small_config();
  cfg.dims = {16, 0, 8};
  EXPECT_THROW(stylize(img, img, cfg), std::invalid_argument);
  cfg = small_config();
  cfg.lowres = 0;
  EXPECT_THROW(stylize(img, img, cfg), std::invalid_argument);
  EXPECT_THROW(stylize(ImagePlane<float>{}, img), std::invalid_argument);
}

TEST(Stylize, ReportsFit) {
  const auto content = scene_image(64, 64, 20);
  auto cfg = small_config();
  cfg.max_iters = 2;
  const auto res = stylize(content, scene_image(64, 64, 21), cfg);
  EXPECT_FALSE(res.fit.converged);
  EXPECT_EQ(res.fit.iterations, 2);
  EXPECT_TRUE(res.image.all_finite());
}

}  // namespace
}  // namespace bgrid
