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

// Stylizes one PNG with another and writes the result plus the fitted grid.
//
//   bgrid_sample content.png style.png out.png [grid.abgf]

#include <cstdio>
#include <exception>

#include "bgrid/bgrid.hpp"
#include "bgrid/io/grid_file.hpp"
#include "bgrid/io/image_file.hpp"

int main(int argc, char** argv) {
  if (argc < 4) {
    std::fprintf(stderr, "usage: %s content.png style.png out.png [grid]\n",
                 argv[0]);
    return 2;
  }
  try {
    const auto content = bgrid::io::read_png(argv[1]);
    const auto style = bgrid::io::read_png(argv[2]);

    bgrid::StylizeConfig cfg;
    cfg.clamp_output = true;
    const auto res = bgrid::stylize(content, style, cfg);
    std::printf("fit: %d iterations, residual %.3g%s\n", res.fit.iterations,
                res.fit.relative_residual,
                res.fit.converged ? "" : " (not converged)");

    bgrid::io::write_png(argv[3], res.image);
    if (argc > 4) bgrid::io::write_grid_file(argv[4], res.grid);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
