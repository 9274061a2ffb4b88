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

#include <chrono>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "bgrid/diff_slice.hpp"
#include "bgrid/grid.hpp"
#include "bgrid/guidance.hpp"
#include "bgrid/image.hpp"
#include "bgrid/laplacian.hpp"
#include "bgrid/slice.hpp"

namespace bgrid {

/// Starting point of the solver. Unsupported coefficients keep this value
/// when the regularizer is off.
enum class FitInit { Identity, Zero };

template <class T = float>
struct FitProblem {
  ImagePlane<T> input_lowres;
  ImagePlane<T> output_lowres;
  GuidanceCurve curve;
  GridDims dims{16, 16, 8};
  double lambda_r = 0.15;
  int max_iters = 200;
  double tol = 1e-6;
  FitInit init = FitInit::Identity;
  unsigned workers = 0;
};

struct FitReport {
  int iterations = 0;
  double relative_residual = 0;
  double data_term = 0;
  double laplacian_energy = 0;
  double seconds = 0;
  bool converged = false;

  double objective(double lambda_r) const {
    return data_term + lambda_r * laplacian_energy;
  }
};

template <class T = float>
struct FitResult {
  AffineBilateralGrid<T> grid;
  FitReport report;
};

/// Sum over pixels of ||slice_apply(grid)(p) - target(p)||^2.
template <class T>
double data_term(const AffineBilateralGrid<T>& grid, const ImagePlane<T>& input,
                 const ImagePlane<T>& target, const GuidanceCurve& curve,
                 unsigned workers = 0) {
  const auto out = slice_apply(grid, input, curve, workers);
  return mean_squared_error(out, target) *
         static_cast<double>(out.values().size());
}

template <class T>
double fit_objective(const AffineBilateralGrid<T>& grid,
                     const ImagePlane<T>& input, const ImagePlane<T>& target,
                     const GuidanceCurve& curve, double lambda_r) {
  return data_term(grid, input, target, curve) +
         lambda_r * laplacian_energy(grid);
}

namespace detail {

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// Normal-equation operator of the regularized fit:
/// M = S^T S + 2 lambda L, where S is slicing-and-applying on the input image
/// and L the six-connected graph Laplacian of the grid.
class NormalOperator {
 public:
  NormalOperator(const ImagePlane<double>& input, const GuidanceCurve& curve,
                 GridDims dims, double lambda_r, unsigned workers)
      : input_(input),
        curve_(curve),
        dims_(dims),
        lambda_r_(lambda_r),
        workers_(workers),
        lap_(dims) {}

  void apply(const AffineBilateralGrid<double>& p,
             AffineBilateralGrid<double>& out) {
    const auto fwd = slice_apply(p, input_, curve_, workers_);
    out = slice_backward(dims_, input_, curve_, fwd, workers_);
    if (lambda_r_ > 0) {
      graph_laplacian(p, lap_);
      auto o = out.coeffs();
      const auto l = lap_.coeffs();
      for (std::size_t i = 0; i < o.size(); ++i) o[i] += 2 * lambda_r_ * l[i];
    }
  }

  AffineBilateralGrid<double> rhs(const ImagePlane<double>& target) const {
    return slice_backward(dims_, input_, curve_, target, workers_);
  }

  /// diag(M); used as a Jacobi preconditioner.
  std::vector<double> diagonal() const {
    auto d = scatter(dims_, input_, curve_, workers_,
                     [](double* dst, double w, std::size_t, double r, double g,
                        double b) {
                       const double in[4] = {r, g, b, 1.0};
                       for (int row = 0; row < kAffineRows; ++row) {
                         for (int col = 0; col < kAffineCols; ++col) {
                           dst[row * kAffineCols + col] +=
                               w * w * in[col] * in[col];
                         }
                       }
                     });
    std::vector<double> diag(d.coeffs().begin(), d.coeffs().end());
    if (lambda_r_ > 0) {
      std::vector<int> degree(dims_.cell_count(), 0);
      for_each_grid_edge(dims_, [&](std::size_t a, std::size_t b) {
        ++degree[a];
        ++degree[b];
      });
      for (std::size_t c = 0; c < degree.size(); ++c) {
        for (int k = 0; k < kCellCoeffs; ++k) {
          diag[c * kCellCoeffs + k] += 2 * lambda_r_ * degree[c];
        }
      }
    }
    return diag;
  }

 private:
  const ImagePlane<double>& input_;
  GuidanceCurve curve_;
  GridDims dims_;
  double lambda_r_;
  unsigned workers_;
  AffineBilateralGrid<double> lap_;
};

template <class T>
void check_problem(const FitProblem<T>& pb) {
  if (pb.input_lowres.empty() || pb.output_lowres.empty()) {
    throw std::invalid_argument("fit: empty image");
  }
  if (!pb.input_lowres.same_size(pb.output_lowres)) {
    throw std::invalid_argument("fit: input and output sizes differ");
  }
  check_dims(pb.dims);
  if (!(pb.lambda_r >= 0) || !std::isfinite(pb.lambda_r)) {
    throw std::invalid_argument("fit: lambda_r must be finite and >= 0");
  }
  if (!(pb.tol > 0)) throw std::invalid_argument("fit: tol must be > 0");
  if (pb.max_iters < 0) {
    throw std::invalid_argument("fit: max_iters must be >= 0");
  }
  if (!pb.input_lowres.all_finite() || !pb.output_lowres.all_finite()) {
    throw std::invalid_argument("fit: images contain non-finite values");
  }
}

}  // namespace detail

/// Fits an affine bilateral grid so that slicing it on the low-resolution
/// input reproduces the low-resolution output, regularized by the bilateral
/// Laplacian:
///
///   min_G  sum_p ||slice_apply(G, input)(p) - output(p)||^2
///          + lambda_r * laplacian_energy(G)
///
/// Solved matrix-free with Jacobi-preconditioned conjugate gradient on the
/// normal equations, in double precision. Stops once ||b - M G|| / ||b|| is
/// at most tol, or after max_iters iterations; running out of iterations is
/// reported, not thrown.
template <class T>
FitResult<T> fit_grid(const FitProblem<T>& pb) {
  detail::check_problem(pb);
  const auto t0 = std::chrono::steady_clock::now();

  const auto input = pb.input_lowres.template cast<double>();
  const auto target = pb.output_lowres.template cast<double>();
  detail::NormalOperator op(input, pb.curve, pb.dims, pb.lambda_r,
                            pb.workers);

  AffineBilateralGrid<double> x =
      pb.init == FitInit::Identity
          ? make_identity_grid<double>(pb.dims.gw, pb.dims.gh, pb.dims.gd)
          : AffineBilateralGrid<double>(pb.dims);
  const auto b = op.rhs(target);
  const auto diag = op.diagonal();
  std::vector<double> inv_diag(diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) {
    inv_diag[i] = diag[i] > 0 ? 1.0 / diag[i] : 0.0;
  }

  AffineBilateralGrid<double> r(pb.dims);
  AffineBilateralGrid<double> q(pb.dims);
  op.apply(x, q);
  {
    auto rv = r.coeffs();
    const auto bv = b.coeffs();
    const auto qv = q.coeffs();
    for (std::size_t i = 0; i < rv.size(); ++i) rv[i] = bv[i] - qv[i];
  }
  const double b_norm = std::sqrt(detail::dot(b.coeffs(), b.coeffs()));
  const double scale = b_norm > 0 ? b_norm : 1.0;

  AffineBilateralGrid<double> z(pb.dims);
  auto precondition = [&] {
    auto zv = z.coeffs();
    const auto rv = r.coeffs();
    for (std::size_t i = 0; i < zv.size(); ++i) zv[i] = inv_diag[i] * rv[i];
  };
  precondition();
  AffineBilateralGrid<double> p = z;
  double rz = detail::dot(r.coeffs(), z.coeffs());
  double rel = std::sqrt(detail::dot(r.coeffs(), r.coeffs())) / scale;

  int it = 0;
  while (rel > pb.tol && it < pb.max_iters && rz > 0) {
    op.apply(p, q);
    const double pq = detail::dot(p.coeffs(), q.coeffs());
    if (!(pq > 0)) break;
    const double alpha = rz / pq;
    auto xv = x.coeffs();
    auto rv = r.coeffs();
    const auto pv = p.coeffs();
    const auto qv = q.coeffs();
    for (std::size_t i = 0; i < xv.size(); ++i) {
      xv[i] += alpha * pv[i];
      rv[i] -= alpha * qv[i];
    }
    precondition();
    const double rz_next = detail::dot(r.coeffs(), z.coeffs());
    const double beta = rz_next / rz;
    rz = rz_next;
    auto pm = p.coeffs();
    const auto zv = z.coeffs();
    for (std::size_t i = 0; i < pm.size(); ++i) pm[i] = zv[i] + beta * pm[i];
    ++it;
    rel = std::sqrt(detail::dot(r.coeffs(), r.coeffs())) / scale;
  }

  // Report the true residual rather than the recursively updated one.
  op.apply(x, q);
  double res2 = 0;
  for (std::size_t i = 0; i < q.coeffs().size(); ++i) {
    const double d = b.coeffs()[i] - q.coeffs()[i];
    res2 += d * d;
  }

  FitResult<T> result{x.template cast<T>(), {}};
  auto& rep = result.report;
  rep.iterations = it;
  rep.relative_residual = std::sqrt(res2) / scale;
  rep.converged = rel <= pb.tol;
  rep.data_term = data_term(x, input, target, pb.curve, pb.workers);
  rep.laplacian_energy = laplacian_energy(x);
  rep.seconds = std::chrono::duration<double>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
  return result;
}

}  // namespace bgrid
