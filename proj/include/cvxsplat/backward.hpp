// Copyright 2026 The cvxsplat Authors
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

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "cvxsplat/rasterizer.hpp"

namespace cvxsplat {

struct PrimitiveGrad {
  std::vector<Vec3d> d_points;
  double d_raw_delta{0};
  double d_raw_sigma{0};
  double d_raw_opacity{0};
  double d_raw_mask{0};
  std::array<Vec3d, kMaxShCoeffs> d_sh;

  explicit PrimitiveGrad(std::size_t k = 0) : d_points(k, Vec3d::Zero()) { d_sh.fill(Vec3d::Zero()); }

  PrimitiveGrad& operator+=(const PrimitiveGrad& o) {
    for (std::size_t i = 0; i < d_points.size(); ++i) d_points[i] += o.d_points[i];
    d_raw_delta += o.d_raw_delta;
    d_raw_sigma += o.d_raw_sigma;
    d_raw_opacity += o.d_raw_opacity;
    d_raw_mask += o.d_raw_mask;
    for (int i = 0; i < kMaxShCoeffs; ++i) d_sh[i] += o.d_sh[i];
    return *this;
  }

  bool finite() const {
    for (const auto& p : d_points)
      if (!p.allFinite()) return false;
    for (const auto& s : d_sh)
      if (!s.allFinite()) return false;
    return std::isfinite(d_raw_delta) && std::isfinite(d_raw_sigma) && std::isfinite(d_raw_opacity) &&
           std::isfinite(d_raw_mask);
  }
};

/// Gradients for every primitive of a scene, plus the running σ-gradient
/// statistics used by densification.
struct GradientBuffer {
  std::vector<PrimitiveGrad> prims;
  std::vector<double> sigma_grad_sum;  // Σ |∂L/∂raw_sigma| over the views where the primitive was visible
  std::vector<int> view_count;

  GradientBuffer() = default;
  GradientBuffer(std::size_t n, std::size_t k) : prims(n, PrimitiveGrad(k)), sigma_grad_sum(n, 0.0), view_count(n, 0) {}

  std::size_t size() const { return prims.size(); }

  void zero_gradients() {
    const std::size_t k = prims.empty() ? 0 : prims.front().d_points.size();
    for (auto& p : prims) p = PrimitiveGrad(k);
  }

  void reset_accumulators() {
    std::fill(sigma_grad_sum.begin(), sigma_grad_sum.end(), 0.0);
    std::fill(view_count.begin(), view_count.end(), 0);
  }

  /// Running mean of |∂L/∂raw_sigma| since the last reset.
  double sigma_signal(std::size_t i) const { return view_count[i] > 0 ? sigma_grad_sum[i] / view_count[i] : 0.0; }

  GradientBuffer& operator+=(const GradientBuffer& o) {
    if (o.size() != size()) throw std::invalid_argument("GradientBuffer: size mismatch");
    for (std::size_t i = 0; i < size(); ++i) {
      prims[i] += o.prims[i];
      sigma_grad_sum[i] += o.sigma_grad_sum[i];
      view_count[i] += o.view_count[i];
    }
    return *this;
  }

  /// Folds the σ statistics of one backward pass into this accumulator
  /// without touching the gradients.
  void accumulate_sigma_signal(const GradientBuffer& view) {
    for (std::size_t i = 0; i < size(); ++i) {
      sigma_grad_sum[i] += view.sigma_grad_sum[i];
      view_count[i] += view.view_count[i];
    }
  }

  bool finite() const {
    for (const auto& p : prims)
      if (!p.finite()) return false;
    return true;
  }
};

namespace detail {

// Per-slot screen-space gradient layout.
inline constexpr int kColor = 0;
inline constexpr int kAlphaScale = 3;
inline constexpr int kDeltaScaled = 4;
inline constexpr int kSigmaScaled = 5;
inline constexpr int kLines = 6;

inline int record_stride(int max_lines) { return kLines + 3 * max_lines; }

/// Chains screen-space gradients of one primitive back to its raw parameters.
template <typename T>
PrimitiveGrad chain_primitive(const PreparedPrimitive& p, const SmoothConvex<T>& c, const Camera& cam,
                              const RenderOptions& opts, int sh_degree, const double* rec) {
  const std::size_t K = c.k();
  PrimitiveGrad g(K);
  Vec3d d_center = Vec3d::Zero();

  // Colour: clamp at zero, SH basis, view direction.
  Vec3d d_color(rec[kColor], rec[kColor + 1], rec[kColor + 2]);
  for (int ch = 0; ch < 3; ++ch)
    if (p.color.unclamped[ch] < 0) d_color[ch] = 0;
  const auto basis = sh::basis(p.view_dir, sh_degree);
  const auto basis_grad = sh::basis_gradient(p.view_dir, sh_degree);
  Vec3d d_dir = Vec3d::Zero();
  for (int i = 0; i < sh_coeff_count(sh_degree); ++i) {
    g.d_sh[i] = d_color * basis[i];
    d_dir += d_color.dot(c.sh[i].template cast<double>()) * basis_grad[i];
  }
  if (cam.projection == Projection::Pinhole)
    d_center += (d_dir - p.view_dir * p.view_dir.dot(d_dir)) / p.view_distance;

  // Opacity and mask gate; the hard gate passes the sigmoid's gradient.
  const double d_alpha_scale = rec[kAlphaScale];
  g.d_raw_opacity = d_alpha_scale * p.gate * p.opacity * (1.0 - p.opacity);
  g.d_raw_mask = d_alpha_scale * p.opacity * p.mask * (1.0 - p.mask);

  // Smoothness, sharpness and their depth scaling.
  const double d_delta_s = rec[kDeltaScaled], d_sigma_s = rec[kSigmaScaled];
  g.d_raw_delta = d_delta_s * p.scale * p.delta;
  g.d_raw_sigma = d_sigma_s * p.scale * p.sigma;
  const double d_scale = d_delta_s * p.delta + d_sigma_s * p.sigma;
  const double d_depth = d_scale * scaling_factor_derivative(opts.mode, p.proj.depth);
  d_center += d_depth * cam.R.row(2).transpose();

  // Lines → hull vertices.
  std::vector<Vec2d> d_pix(K, Vec2d::Zero());
  const auto& hv = p.proj.hull_vertices;
  const std::size_t T_lines = hv.size();
  for (std::size_t j = 0; j < T_lines; ++j) {
    const Vec2d d_n(rec[kLines + 3 * j], rec[kLines + 3 * j + 1]);
    const double d_off = rec[kLines + 3 * j + 2];
    const Vec2d& a = hv[j];
    const Vec2d& b = hv[(j + 1) % T_lines];
    const Vec2d e = b - a;
    const double len = e.norm();
    const Vec2d& n = p.proj.lines[j].normal;
    const Vec2d d_n_total = d_n - d_off * a;
    const Vec2d d_u = (d_n_total - n * n.dot(d_n_total)) / len;
    const Vec2d d_e(-d_u.y(), d_u.x());
    d_pix[p.proj.hull_indices[j]] += -d_off * n - d_e;
    d_pix[p.proj.hull_indices[(j + 1) % T_lines]] += d_e;
  }

  // Pixels → camera frame → world.
  const Mat3d Rt = cam.R.transpose();
  for (std::size_t k = 0; k < K; ++k) {
    Vec3d d_xc = Vec3d::Zero();
    if (!d_pix[k].isZero(0.0)) {
      if (cam.projection == Projection::Pinhole) {
        const Vec3d xc = cam.R * c.points[k].template cast<double>() + cam.t;
        const double iz = 1.0 / xc.z();
        d_xc.x() = d_pix[k].x() * cam.fx * iz;
        d_xc.y() = d_pix[k].y() * cam.fy * iz;
        d_xc.z() = -(d_pix[k].x() * cam.fx * xc.x() + d_pix[k].y() * cam.fy * xc.y()) * iz * iz;
      } else {
        d_xc = Vec3d(d_pix[k].x() * cam.fx, d_pix[k].y() * cam.fy, 0.0);
      }
    }
    g.d_points[k] = Rt * d_xc + d_center / double(K);
  }
  return g;
}

}  // namespace detail

/// Reverse-mode gradient of a scalar image loss, given ∂loss/∂pixel, with
/// respect to every raw parameter. Sort order, hull membership, the
/// contribution cutoff and early termination are held fixed.
template <typename T>
GradientBuffer backward(const Scene<T>& scene, const Camera& cam, const RenderOptions& opts,
                        const Image<T>& d_image) {
  if (d_image.width() != cam.width || d_image.height() != cam.height || d_image.channels() != 3)
    throw std::invalid_argument("backward: upstream gradient shape does not match the camera");
  for (T v : d_image.values())
    if (!std::isfinite(double(v))) throw std::invalid_argument("backward: non-finite upstream gradient");

  const auto prepared = prepare_view(scene, cam, opts);
  const Vec3d bgd = opts.background.value_or(scene.background);
  const int W = cam.width, H = cam.height;
  const auto ks = detail::make_kernel_scene<T>(prepared);
  const auto grid = detail::make_grid(cam, opts.tile_size);
  const auto bins = detail::bin_tiles(ks, grid);
  const int stride = detail::record_stride(std::max(ks.max_lines, 1));
  const T cutoff = T(opts.alpha_cutoff);
  const T floor_t = T(opts.transmittance_floor);
  const T bg[3] = {T(bgd.x()), T(bgd.y()), T(bgd.z())};

  std::vector<std::vector<double>> scratch(grid.count());

#pragma omp parallel for schedule(dynamic, 1)
  for (int tile = 0; tile < grid.count(); ++tile) {
    const auto& list = bins[tile];
    auto& acc = scratch[tile];
    acc.assign(list.size() * stride, 0.0);
    if (list.empty()) continue;
    struct Contribution {
      int local;
      T alpha;
      T trans;
    };
    std::vector<Contribution> contribs;
    contribs.reserve(list.size());
    std::vector<T> dist(std::max(ks.max_lines, 1)), weights(std::max(ks.max_lines, 1));

    const int tx = tile % grid.tiles_x, ty = tile / grid.tiles_x;
    const int x0 = tx * grid.tile_size, y0 = ty * grid.tile_size;
    const int x1 = std::min(W, x0 + grid.tile_size), y1 = std::min(H, y0 + grid.tile_size);
    for (int y = y0; y < y1; ++y)
      for (int x = x0; x < x1; ++x) {
        const T qx = T(x) + T(0.5), qy = T(y) + T(0.5);
        // Forward replay, identical to render_prepared.
        contribs.clear();
        T trans = 1;
        T c[3] = {0, 0, 0};
        for (int li = 0; li < int(list.size()); ++li) {
          const auto& k = ks.prims[list[li]];
          if (!k.bbox.contains(x, y)) continue;
          T phi;
          const T alpha = k.alpha_scale * detail::eval_indicator(ks, k, qx, qy, dist.data(), phi);
          if (alpha < cutoff || alpha <= T(0)) continue;
          const T w = trans * alpha;
          for (int ch = 0; ch < 3; ++ch) c[ch] += w * k.color[ch];
          contribs.push_back({li, alpha, trans});
          trans -= w;
          if (trans < floor_t) break;
        }
        if (contribs.empty()) continue;

        double g[3];
        bool any = false;
        for (int ch = 0; ch < 3; ++ch) {
          const T pre = c[ch] + trans * bg[ch];
          g[ch] = (pre < T(0) || pre > T(1)) ? 0.0 : double(d_image(x, y, ch));
          any = any || g[ch] != 0.0;
        }
        if (!any) continue;

        // Back to front: S is the colour seen just behind the current primitive.
        double S[3] = {double(bg[0]), double(bg[1]), double(bg[2])};
        for (int n = int(contribs.size()) - 1; n >= 0; --n) {
          const auto& cb = contribs[n];
          const auto& k = ks.prims[list[cb.local]];
          double* rec = &acc[std::size_t(cb.local) * stride];
          const double a = double(cb.alpha), tr = double(cb.trans);
          double d_alpha = 0;
          for (int ch = 0; ch < 3; ++ch) {
            rec[detail::kColor + ch] += g[ch] * tr * a;
            d_alpha += g[ch] * tr * (double(k.color[ch]) - S[ch]);
            S[ch] = a * double(k.color[ch]) + (1.0 - a) * S[ch];
          }
          T phi;
          const double I = double(detail::eval_indicator(ks, k, qx, qy, dist.data(), phi));
          smooth_sdf_weights<T>(std::span<const T>(dist.data(), k.line_count), k.delta_scaled,
                                std::span<T>(weights.data(), k.line_count));
          rec[detail::kAlphaScale] += d_alpha * I;
          const double d_I = d_alpha * double(k.alpha_scale);
          const double dI_dz = I * (1.0 - I);
          const double d_phi = -d_I * double(k.sigma_scaled) * dI_dz;
          rec[detail::kSigmaScaled] += -d_I * double(phi) * dI_dz;
          double wl = 0;
          for (int j = 0; j < k.line_count; ++j) wl += double(weights[j]) * double(dist[j]);
          rec[detail::kDeltaScaled] += d_phi * wl;
          const double ds = d_phi * double(k.delta_scaled);
          for (int j = 0; j < k.line_count; ++j) {
            const double dl = ds * double(weights[j]);
            rec[detail::kLines + 3 * j] += dl * double(qx);
            rec[detail::kLines + 3 * j + 1] += dl * double(qy);
            rec[detail::kLines + 3 * j + 2] += dl;
          }
        }
      }
  }

  // Deterministic reduction in tile order.
  std::vector<double> records(prepared.size() * stride, 0.0);
  for (int tile = 0; tile < grid.count(); ++tile) {
    const auto& list = bins[tile];
    for (std::size_t li = 0; li < list.size(); ++li) {
      const double* src = &scratch[tile][li * stride];
      double* dst = &records[std::size_t(list[li]) * stride];
      for (int i = 0; i < stride; ++i) dst[i] += src[i];
    }
  }

  GradientBuffer out(scene.size(), scene.k());
  const int np = int(prepared.size());
#pragma omp parallel for schedule(static)
  for (int s = 0; s < np; ++s) {
    const auto& p = prepared[s];
    out.prims[p.index] = detail::chain_primitive(p, scene.primitives[p.index], cam, opts, scene.sh_degree,
                                                 &records[std::size_t(s) * stride]);
    out.sigma_grad_sum[p.index] = std::abs(out.prims[p.index].d_raw_sigma);
    out.view_count[p.index] = 1;
  }
  return out;
}

}  // namespace cvxsplat
