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

#include "cvxsplat/image.hpp"

namespace cvxsplat {

inline constexpr int kSsimRadius = 5;  // 11×11 window
inline constexpr double kSsimWindowSigma = 1.5;
inline constexpr double kSsimC1 = 0.01 * 0.01;
inline constexpr double kSsimC2 = 0.03 * 0.03;
inline constexpr double kPsnrCap = 100.0;

namespace detail {

inline std::array<double, 2 * kSsimRadius + 1> gaussian_window() {
  std::array<double, 2 * kSsimRadius + 1> g{};
  double sum = 0;
  for (int k = -kSsimRadius; k <= kSsimRadius; ++k) {
    g[k + kSsimRadius] = std::exp(-double(k * k) / (2 * kSsimWindowSigma * kSsimWindowSigma));
    sum += g[k + kSsimRadius];
  }
  for (auto& v : g) v /= sum;
  return g;
}

/// Separable Gaussian filter truncated at the image border. With
/// `normalize`, each output is divided by the window mass that fell inside
/// the image, so constant images stay constant.
class WindowFilter {
 public:
  WindowFilter(int width, int height) : w_(width), h_(height), g_(gaussian_window()), zx_(width), zy_(height) {
    for (int x = 0; x < w_; ++x) zx_[x] = mass(x, w_);
    for (int y = 0; y < h_; ++y) zy_[y] = mass(y, h_);
  }

  /// out(p) = Σ_q g(q - p) in(q) / Z(p)
  void apply(const std::vector<double>& in, std::vector<double>& out) const {
    std::vector<double> tmp(in.size());
    convolve(in, tmp, out);
    for (int y = 0; y < h_; ++y)
      for (int x = 0; x < w_; ++x) out[idx(x, y)] /= zx_[x] * zy_[y];
  }

  /// Adjoint of apply: out(q) = Σ_p g(q - p) in(p) / Z(p)
  void apply_transpose(const std::vector<double>& in, std::vector<double>& out) const {
    std::vector<double> scaled(in.size()), tmp(in.size());
    for (int y = 0; y < h_; ++y)
      for (int x = 0; x < w_; ++x) scaled[idx(x, y)] = in[idx(x, y)] / (zx_[x] * zy_[y]);
    convolve(scaled, tmp, out);
  }

 private:
  double mass(int p, int n) const {
    double s = 0;
    for (int k = -kSsimRadius; k <= kSsimRadius; ++k)
      if (p + k >= 0 && p + k < n) s += g_[k + kSsimRadius];
    return s;
  }

  std::size_t idx(int x, int y) const { return std::size_t(y) * w_ + x; }

  void convolve(const std::vector<double>& in, std::vector<double>& tmp, std::vector<double>& out) const {
    out.assign(in.size(), 0.0);
    for (int y = 0; y < h_; ++y)
      for (int x = 0; x < w_; ++x) {
        double s = 0;
        for (int k = -kSsimRadius; k <= kSsimRadius; ++k) {
          const int xx = x + k;
          if (xx >= 0 && xx < w_) s += g_[k + kSsimRadius] * in[idx(xx, y)];
        }
        tmp[idx(x, y)] = s;
      }
    for (int y = 0; y < h_; ++y)
      for (int x = 0; x < w_; ++x) {
        double s = 0;
        for (int k = -kSsimRadius; k <= kSsimRadius; ++k) {
          const int yy = y + k;
          if (yy >= 0 && yy < h_) s += g_[k + kSsimRadius] * tmp[idx(x, yy)];
        }
        out[idx(x, y)] = s;
      }
  }

  int w_, h_;
  std::array<double, 2 * kSsimRadius + 1> g_;
  std::vector<double> zx_, zy_;
};

template <typename T> void require_same_shape(const Image<T>& a, const Image<T>& b, const char* what) {
  if (!a.same_shape(b)) throw std::invalid_argument(std::string(what) + ": image shapes differ");
  if (a.empty()) throw std::invalid_argument(std::string(what) + ": empty image");
}

}  // namespace detail

template <typename T> struct SsimResult {
  double value{0};
  Image<T> grad;  // ∂ mean-SSIM / ∂a; empty unless requested
};

/// Mean SSIM over pixels and channels with an 11×11 σ=1.5 Gaussian window.
template <typename T> SsimResult<T> ssim_with_grad(const Image<T>& a, const Image<T>& b, bool want_grad) {
  detail::require_same_shape(a, b, "ssim");
  const int W = a.width(), H = a.height(), C = a.channels();
  const std::size_t n = std::size_t(W) * H;
  detail::WindowFilter filt(W, H);
  SsimResult<T> res;
  if (want_grad) res.grad = Image<T>(W, H, C);
  double total = 0;
  std::vector<double> x(n), y(n), xx(n), yy(n), xy(n);
  std::vector<double> mx, my, exx, eyy, exy;
  for (int c = 0; c < C; ++c) {
    for (int py = 0; py < H; ++py)
      for (int px = 0; px < W; ++px) {
        const std::size_t i = std::size_t(py) * W + px;
        x[i] = double(a(px, py, c));
        y[i] = double(b(px, py, c));
        xx[i] = x[i] * x[i];
        yy[i] = y[i] * y[i];
        xy[i] = x[i] * y[i];
      }
    filt.apply(x, mx);
    filt.apply(y, my);
    filt.apply(xx, exx);
    filt.apply(yy, eyy);
    filt.apply(xy, exy);
    std::vector<double> d_mu, d_xx, d_xy;
    if (want_grad) {
      d_mu.resize(n);
      d_xx.resize(n);
      d_xy.resize(n);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double sxx = exx[i] - mx[i] * mx[i];
      const double syy = eyy[i] - my[i] * my[i];
      const double sxy = exy[i] - mx[i] * my[i];
      const double a1 = 2 * mx[i] * my[i] + kSsimC1, a2 = 2 * sxy + kSsimC2;
      const double b1 = mx[i] * mx[i] + my[i] * my[i] + kSsimC1, b2 = sxx + syy + kSsimC2;
      const double s = a1 * a2 / (b1 * b2);
      total += s;
      if (want_grad) {
        const double ds_dsxy = 2 * a1 / (b1 * b2);
        const double ds_dsxx = -s / b2;
        const double ds_dmx = 2 * my[i] * a2 / (b1 * b2) - s * 2 * mx[i] / b1;
        d_mu[i] = ds_dmx - 2 * mx[i] * ds_dsxx - my[i] * ds_dsxy;
        d_xx[i] = ds_dsxx;
        d_xy[i] = ds_dsxy;
      }
    }
    if (want_grad) {
      std::vector<double> t_mu, t_xx, t_xy;
      filt.apply_transpose(d_mu, t_mu);
      filt.apply_transpose(d_xx, t_xx);
      filt.apply_transpose(d_xy, t_xy);
      const double inv = 1.0 / double(n * C);
      for (int py = 0; py < H; ++py)
        for (int px = 0; px < W; ++px) {
          const std::size_t i = std::size_t(py) * W + px;
          res.grad(px, py, c) = T((t_mu[i] + 2 * x[i] * t_xx[i] + y[i] * t_xy[i]) * inv);
        }
    }
  }
  res.value = total / double(n * C);
  return res;
}

template <typename T> double ssim(const Image<T>& a, const Image<T>& b) { return ssim_with_grad(a, b, false).value; }

template <typename T> double mse(const Image<T>& a, const Image<T>& b) {
  detail::require_same_shape(a, b, "mse");
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = double(a.values()[i]) - double(b.values()[i]);
    s += d * d;
  }
  return s / double(a.size());
}

/// PSNR for images in [0, 1], capped at 100 dB.
template <typename T> double psnr(const Image<T>& a, const Image<T>& b) {
  const double m = mse(a, b);
  if (m < 1e-10) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(1.0 / m));
}

}  // namespace cvxsplat
