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

// bgrid: fit, apply, and benchmark affine bilateral grids from the shell.
//
// Exit status is 0 on success. On failure a single line
//   error: <kind>: <message>
// is written to stderr, with kind one of usage, parse, io, invalid, runtime.

#include <algorithm>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bgrid/bgrid.hpp"
#include "bgrid/io/feature_file.hpp"
#include "bgrid/io/grid_file.hpp"
#include "bgrid/io/image_file.hpp"

namespace fs = std::filesystem;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GridOptions {
  int gw = 16;
  int gh = 16;
  int gd = 8;

  void add(CLI::App* app) {
    app->add_option("--gw", gw, "Grid cells along x")->check(CLI::PositiveNumber);
    app->add_option("--gh", gh, "Grid cells along y")->check(CLI::PositiveNumber);
    app->add_option("--gd", gd, "Grid luma bins")->check(CLI::PositiveNumber);
  }
  bgrid::GridDims dims() const { return {gw, gh, gd}; }
};

void save_image(const std::string& path, bgrid::ImagePlane<float> img, bool clamp,
                int bit_depth) {
  if (clamp) bgrid::clamp_unit(img);
  bgrid::io::write_image(path, img, bit_depth);
}

std::vector<fs::path> list_frames(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw std::runtime_error("not a directory: " + dir.string());
  std::vector<fs::path> frames;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    auto ext = e.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
    if (ext == ".png" || ext == ".pfm") frames.push_back(e.path());
  }
  std::sort(frames.begin(), frames.end());
  return frames;
}

void print_fit_report(const bgrid::FitReport& r) {
  std::printf(
      "fit iterations=%d relative_residual=%.3e converged=%d data_term=%.6e "
      "laplacian_energy=%.6e seconds=%.3f\n",
      r.iterations, r.relative_residual, r.converged ? 1 : 0, r.data_term,
      r.laplacian_energy, r.seconds);
}

int run(int argc, char** argv) {
  CLI::App app{"Affine bilateral grid style transfer engine"};
  app.require_subcommand(1);
  unsigned threads = 0;
  app.add_option("--threads", threads, "Worker threads (0 = all hardware threads)");

  // stylize
  auto* stylize = app.add_subcommand("stylize", "Transfer the style image's color statistics");
  std::string content_path, style_path, out_path, save_grid, feat_content, feat_style,
      feat_layer;
  bgrid::StylizeConfig cfg;
  GridOptions st_grid;
  int bit_depth = 8;
  stylize->add_option("--content", content_path, "Content image")->required();
  stylize->add_option("--style", style_path, "Style image")->required();
  stylize->add_option("--out", out_path, "Output image (.png or .pfm)")->required();
  stylize->add_option("--lowres", cfg.lowres, "Fitting resolution edge length")
      ->check(CLI::PositiveNumber);
  st_grid.add(stylize);
  stylize->add_option("--lambda-r", cfg.lambda_r, "Laplacian regularizer weight")
      ->check(CLI::NonNegativeNumber);
  stylize->add_option("--max-iters", cfg.max_iters, "Solver iteration cap");
  stylize->add_option("--tol", cfg.tol, "Solver relative residual tolerance");
  stylize->add_flag("--clamp", cfg.clamp_output, "Clamp output to [0, 1]");
  auto* fc_opt = stylize->add_option("--features-content", feat_content,
                                     "Feature file for the content image");
  auto* fs_opt = stylize->add_option("--features-style", feat_style,
                                     "Feature file for the style image");
  fc_opt->needs(fs_opt);
  fs_opt->needs(fc_opt);
  stylize->add_option("--feature-layer", feat_layer, "Feature layer name (default: first)");
  stylize->add_option("--save-grid", save_grid, "Also write the fitted grid");
  stylize->add_option("--bit-depth", bit_depth, "PNG output bit depth")
      ->check(CLI::IsMember({8, 16}));

  // fit
  auto* fit = app.add_subcommand("fit", "Fit a grid mapping one image to another");
  std::string fit_in, fit_out, fit_grid_path;
  GridOptions fit_grid_opts;
  bgrid::FitProblem<float> pb;
  int fit_lowres = 256;
  fit->add_option("--input", fit_in, "Input image")->required();
  fit->add_option("--output", fit_out, "Output image")->required();
  fit->add_option("--grid", fit_grid_path, "Grid file to write")->required();
  fit_grid_opts.add(fit);
  fit->add_option("--lambda-r", pb.lambda_r, "Laplacian regularizer weight")
      ->check(CLI::NonNegativeNumber);
  fit->add_option("--max-iters", pb.max_iters, "Solver iteration cap")
      ->check(CLI::NonNegativeNumber);
  fit->add_option("--tol", pb.tol, "Solver relative residual tolerance")
      ->check(CLI::PositiveNumber);
  fit->add_option("--lowres", fit_lowres, "Images larger than this are area-downsampled")
      ->check(CLI::PositiveNumber);

  // apply
  auto* apply = app.add_subcommand("apply", "Render an image through a grid file");
  std::string apply_grid, apply_in, apply_out;
  bool apply_clamp = false;
  apply->add_option("--grid", apply_grid, "Grid file")->required();
  apply->add_option("--input", apply_in, "Input image")->required();
  apply->add_option("--out", apply_out, "Output image (.png or .pfm)")->required();
  apply->add_flag("--clamp", apply_clamp, "Clamp output to [0, 1]");
  apply->add_option("--bit-depth", bit_depth, "PNG output bit depth")
      ->check(CLI::IsMember({8, 16}));

  // bench
  auto* bench = app.add_subcommand("bench", "Time full-resolution rendering");
  int bench_w = 0, bench_h = 0, bench_iters = 9;
  GridOptions bench_grid;
  bench->add_option("--width", bench_w, "Image width")->required()->check(CLI::PositiveNumber);
  bench->add_option("--height", bench_h, "Image height")->required()->check(CLI::PositiveNumber);
  bench_grid.add(bench);
  bench->add_option("--iters", bench_iters, "Timed runs (median reported)")
      ->check(CLI::PositiveNumber);

  // gradcheck
  auto* gradcheck = app.add_subcommand("gradcheck", "Check gradients against finite differences");
  unsigned seed = 0;
  gradcheck->add_option("--seed", seed, "Random instance seed");

  // frames
  auto* frames = app.add_subcommand("frames", "Apply one grid or style to a frame sequence");
  std::string frames_grid, frames_style, in_dir, out_dir;
  bool refit = false;
  bool frames_clamp = false;
  auto* fg = frames->add_option("--grid", frames_grid, "Grid file applied to every frame");
  auto* fsty = frames->add_option("--style", frames_style,
                                  "Style image; the grid is fitted on the first frame");
  fg->excludes(fsty);
  frames->add_option("--in-dir", in_dir, "Directory of input frames")->required();
  frames->add_option("--out-dir", out_dir, "Directory for output frames")->required();
  frames->add_flag("--refit", refit, "With --style, fit a new grid for every frame");
  frames->add_flag("--clamp", frames_clamp, "Clamp output to [0, 1]");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  if (*stylize) {
    cfg.dims = st_grid.dims();
    cfg.workers = threads;
    cfg.feature_layer = feat_layer;
    if (!feat_content.empty()) {
      cfg.content_features = bgrid::io::read_feature_file(feat_content);
      cfg.style_features = bgrid::io::read_feature_file(feat_style);
    }
    const auto content = bgrid::io::read_image(content_path);
    const auto style = bgrid::io::read_image(style_path);
    const auto res = bgrid::stylize(content, style, cfg);
    print_fit_report(res.fit);
    bgrid::io::write_image(out_path, res.image, bit_depth);
    if (!save_grid.empty()) bgrid::io::write_grid_file(save_grid, res.grid, cfg.curve);
  } else if (*fit) {
    const auto in = bgrid::io::read_image(fit_in);
    const auto out = bgrid::io::read_image(fit_out);
    if (!in.same_size(out)) {
      throw std::invalid_argument("input and output images differ in size");
    }
    pb.input_lowres = bgrid::downsample_to_lowres(in, fit_lowres);
    pb.output_lowres = bgrid::downsample_to_lowres(out, fit_lowres);
    pb.dims = fit_grid_opts.dims();
    pb.workers = threads;
    const auto res = bgrid::fit_grid(pb);
    print_fit_report(res.report);
    bgrid::io::write_grid_file(fit_grid_path, res.grid, pb.curve);
  } else if (*apply) {
    const auto gf = bgrid::io::read_grid_file(apply_grid);
    const auto in = bgrid::io::read_image(apply_in);
    save_image(apply_out, bgrid::slice_apply(gf.grid, in, gf.curve, threads), apply_clamp,
               bit_depth);
  } else if (*bench) {
    const auto dims = bench_grid.dims();
    const auto r = bgrid::bench_slice(bench_w, bench_h, dims, bench_iters, threads);
    std::printf(
        "bench width=%d height=%d grid=%dx%dx%d iters=%d threads=%u median_ms=%.3f "
        "min_ms=%.3f median_mpix_per_s=%.2f peak_mpix_per_s=%.2f\n",
        r.width, r.height, dims.gw, dims.gh, dims.gd, r.iters, bgrid::resolve_workers(threads),
        r.median_seconds * 1e3, r.min_seconds * 1e3, r.median_mpix_per_second(),
        r.peak_mpix_per_second());
  } else if (*gradcheck) {
    const auto r = bgrid::gradcheck(seed);
    const bool ok = r.slice_max_rel_error <= 1e-3 && r.laplacian_max_rel_error <= 1e-3;
    std::printf(
        "gradcheck seed=%u grid=%dx%dx%d image=%dx%d slice_max_rel_error=%.3e "
        "laplacian_max_rel_error=%.3e status=%s\n",
        r.seed, r.dims.gw, r.dims.gh, r.dims.gd, r.width, r.height, r.slice_max_rel_error,
        r.laplacian_max_rel_error, ok ? "pass" : "fail");
    if (!ok) {
      std::fprintf(stderr, "error: runtime: gradient check exceeded 1e-3\n");
      return 1;
    }
  } else if (*frames) {
    if (frames_grid.empty() && frames_style.empty()) {
      throw UsageError("frames: one of --grid or --style is required");
    }
    if (refit && frames_style.empty()) throw UsageError("frames: --refit requires --style");
    const auto inputs = list_frames(in_dir);
    if (inputs.empty()) throw std::runtime_error("no .png or .pfm frames in " + in_dir);
    fs::create_directories(out_dir);
    std::optional<bgrid::io::GridFile> fixed;
    std::optional<bgrid::ImagePlane<float>> style;
    if (!frames_grid.empty()) fixed = bgrid::io::read_grid_file(frames_grid);
    if (!frames_style.empty()) style = bgrid::io::read_image(frames_style);
    bgrid::StylizeConfig fcfg;
    fcfg.workers = threads;
    for (const auto& path : inputs) {
      const auto frame = bgrid::io::read_image(path.string());
      bgrid::ImagePlane<float> out;
      if (!fixed || refit) {
        auto res = bgrid::stylize(frame, *style, fcfg);
        out = std::move(res.image);
        if (!refit) fixed = bgrid::io::GridFile{std::move(res.grid), fcfg.curve};
      } else {
        out = bgrid::slice_apply(fixed->grid, frame, fixed->curve, threads);
      }
      save_image((fs::path(out_dir) / path.filename()).string(), std::move(out), frames_clamp, 8);
    }
    std::printf("frames count=%zu\n", inputs.size());
  }
  return 0;
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  while (!s.empty() && s.back() == ' ') s.pop_back();
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: usage: %s\n", one_line(e.what()).c_str());
    return 2;
  } catch (const bgrid::io::ParseError& e) {
    std::fprintf(stderr, "error: parse: %s\n", one_line(e.what()).c_str());
    return 1;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: invalid: %s\n", one_line(e.what()).c_str());
    return 1;
  } catch (const bgrid::io::IoError& e) {
    std::fprintf(stderr, "error: io: %s\n", one_line(e.what()).c_str());
    return 1;
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "error: io: %s\n", one_line(e.what()).c_str());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: runtime: %s\n", one_line(e.what()).c_str());
    return 1;
  }
}
