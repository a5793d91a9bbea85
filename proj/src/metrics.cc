// Copyright 2026 The MSIC Authors
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

#include "msic/metrics.h"

#include <cmath>
#include <numeric>
#include <string>

#include "msic/errors.h"
#include "msic/log.h"

namespace msic {
namespace {

struct Plane {
  int h = 0;
  int w = 0;
  std::vector<double> v;

  Plane() = default;
  Plane(int height, int width) : h(height), w(width), v(static_cast<size_t>(height) * width, 0.0) {}
  double& at(int y, int x) { return v[static_cast<size_t>(y) * w + x]; }
  double at(int y, int x) const { return v[static_cast<size_t>(y) * w + x]; }
};

// Separable 'valid' correlation: rows first, then columns.
Plane filter_valid(const Plane& in, const std::vector<double>& g) {
  const int n = static_cast<int>(g.size());
  Plane rows(in.h, in.w - n + 1);
  for (int y = 0; y < rows.h; ++y) {
    for (int x = 0; x < rows.w; ++x) {
      double acc = 0;
      for (int k = 0; k < n; ++k) acc += g[k] * in.at(y, x + k);
      rows.at(y, x) = acc;
    }
  }
  Plane out(in.h - n + 1, rows.w);
  for (int y = 0; y < out.h; ++y) {
    for (int x = 0; x < out.w; ++x) {
      double acc = 0;
      for (int k = 0; k < n; ++k) acc += g[k] * rows.at(y + k, x);
      out.at(y, x) = acc;
    }
  }
  return out;
}

// Adjoint of filter_valid back onto an h x w plane.
Plane filter_valid_adjoint(const Plane& grad, const std::vector<double>& g, int h, int w) {
  const int n = static_cast<int>(g.size());
  Plane rows(h, grad.w);
  for (int y = 0; y < grad.h; ++y) {
    for (int x = 0; x < grad.w; ++x) {
      const double v = grad.at(y, x);
      for (int k = 0; k < n; ++k) rows.at(y + k, x) += g[k] * v;
    }
  }
  Plane out(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < rows.w; ++x) {
      const double v = rows.at(y, x);
      for (int k = 0; k < n; ++k) out.at(y, x + k) += g[k] * v;
    }
  }
  return out;
}

Plane pool2(const Plane& in) {
  Plane out(in.h / 2, in.w / 2);
  for (int y = 0; y < out.h; ++y) {
    for (int x = 0; x < out.w; ++x) {
      out.at(y, x) = 0.25 * (in.at(2 * y, 2 * x) + in.at(2 * y, 2 * x + 1) +
                             in.at(2 * y + 1, 2 * x) + in.at(2 * y + 1, 2 * x + 1));
    }
  }
  return out;
}

void pool2_adjoint_add(const Plane& grad, Plane& into) {
  for (int y = 0; y < grad.h; ++y) {
    for (int x = 0; x < grad.w; ++x) {
      const double v = 0.25 * grad.at(y, x);
      into.at(2 * y, 2 * x) += v;
      into.at(2 * y, 2 * x + 1) += v;
      into.at(2 * y + 1, 2 * x) += v;
      into.at(2 * y + 1, 2 * x + 1) += v;
    }
  }
}

Plane multiply(const Plane& a, const Plane& b) {
  Plane out(a.h, a.w);
  for (size_t i = 0; i < a.v.size(); ++i) out.v[i] = a.v[i] * b.v[i];
  return out;
}

struct ScaleStats {
  Plane x, y;
  Plane mu_x, mu_y, s_xx, s_yy, s_xy;  // filtered moments E[x], E[y], E[x^2], E[y^2], E[xy]
  double value = 0;                     // mean(cs) or mean(l * cs) at the last scale
};

}  // namespace

void MsSsimConfig::validate() const {
  if (scales < 1 || weights.size() < static_cast<size_t>(scales)) {
    throw ConfigError("ms-ssim: need one weight per scale");
  }
  double sum = 0;
  for (int i = 0; i < scales; ++i) {
    if (weights[i] < 0) throw ConfigError("ms-ssim: negative weight");
    sum += weights[i];
  }
  if (std::abs(sum - 1.0) > 1e-3) throw ConfigError("ms-ssim: weights must sum to 1");
  if (window < 1 || window % 2 == 0) throw ConfigError("ms-ssim: window size must be odd");
  if (!(sigma > 0)) throw ConfigError("ms-ssim: sigma must be positive");
}

int MsSsimConfig::usable_scales(int height, int width) const {
  const int m = std::min(height, width);
  int s = 0;
  while (s < scales && m >= window * (1 << s)) ++s;
  return s;
}

std::vector<double> gaussian_window(int size, double sigma) {
  std::vector<double> g(size);
  const int c = size / 2;
  double sum = 0;
  for (int i = 0; i < size; ++i) {
    const double d = i - c;
    g[i] = std::exp(-d * d / (2 * sigma * sigma));
    sum += g[i];
  }
  for (auto& v : g) v /= sum;
  return g;
}

double ms_ssim_plane(std::span<const double> a, std::span<const double> b, int height,
                     int width, const MsSsimConfig& cfg, std::span<double> grad_b) {
  cfg.validate();
  const size_t n = static_cast<size_t>(height) * width;
  if (a.size() != n || b.size() != n) throw ConfigError("ms-ssim: size mismatch");
  const int scales = cfg.usable_scales(height, width);
  if (scales == 0) {
    throw ConfigError("ms-ssim: image " + std::to_string(height) + "x" + std::to_string(width) +
                      " is smaller than the " + std::to_string(cfg.window) + "-pixel window");
  }
  std::vector<double> weights(cfg.weights.begin(), cfg.weights.begin() + scales);
  if (scales < cfg.scales) {
    warn_once("ms-ssim: " + std::to_string(height) + "x" + std::to_string(width) +
              " input supports only " + std::to_string(scales) + " of " +
              std::to_string(cfg.scales) + " scales; renormalizing weights");
    const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
    for (auto& w : weights) w /= sum;
  }

  const auto g = gaussian_window(cfg.window, cfg.sigma);
  const double c1 = (cfg.k1 * cfg.dynamic_range) * (cfg.k1 * cfg.dynamic_range);
  const double c2 = (cfg.k2 * cfg.dynamic_range) * (cfg.k2 * cfg.dynamic_range);

  std::vector<ScaleStats> st(scales);
  st[0].x = Plane(height, width);
  st[0].y = Plane(height, width);
  std::copy(a.begin(), a.end(), st[0].x.v.begin());
  std::copy(b.begin(), b.end(), st[0].y.v.begin());

  double result = 1.0;
  bool zero = false;
  for (int j = 0; j < scales; ++j) {
    auto& s = st[j];
    if (j > 0) {
      s.x = pool2(st[j - 1].x);
      s.y = pool2(st[j - 1].y);
    }
    s.mu_x = filter_valid(s.x, g);
    s.mu_y = filter_valid(s.y, g);
    s.s_xx = filter_valid(multiply(s.x, s.x), g);
    s.s_yy = filter_valid(multiply(s.y, s.y), g);
    s.s_xy = filter_valid(multiply(s.x, s.y), g);
    const bool last = j == scales - 1;
    double acc = 0;
    for (size_t i = 0; i < s.mu_x.v.size(); ++i) {
      const double mx = s.mu_x.v[i], my = s.mu_y.v[i];
      const double vx = s.s_xx.v[i] - mx * mx;
      const double vy = s.s_yy.v[i] - my * my;
      const double cov = s.s_xy.v[i] - mx * my;
      const double cs = (2 * cov + c2) / (vx + vy + c2);
      if (last) {
        const double l = (2 * mx * my + c1) / (mx * mx + my * my + c1);
        acc += l * cs;
      } else {
        acc += cs;
      }
    }
    s.value = acc / static_cast<double>(s.mu_x.v.size());
    // Non-positive terms cannot be raised to fractional powers; they clamp to 0.
    if (s.value <= 0) {
      zero = true;
    } else {
      result *= std::pow(s.value, weights[j]);
    }
  }
  if (zero) result = 0;

  if (grad_b.empty()) return result;
  if (grad_b.size() != n) throw ConfigError("ms-ssim: gradient size mismatch");
  std::fill(grad_b.begin(), grad_b.end(), 0.0);
  if (zero) return result;

  // Walk scales coarse to fine, pushing d result / d y_j down through pooling.
  Plane carry;
  for (int j = scales - 1; j >= 0; --j) {
    auto& s = st[j];
    const bool last = j == scales - 1;
    const double dvalue = result * weights[j] / s.value;
    const double dmap = dvalue / static_cast<double>(s.mu_x.v.size());
    Plane g_mu(s.mu_x.h, s.mu_x.w), g_yy(s.mu_x.h, s.mu_x.w), g_xy(s.mu_x.h, s.mu_x.w);
    for (size_t i = 0; i < s.mu_x.v.size(); ++i) {
      const double mx = s.mu_x.v[i], my = s.mu_y.v[i];
      const double vx = s.s_xx.v[i] - mx * mx;
      const double vy = s.s_yy.v[i] - my * my;
      const double cov = s.s_xy.v[i] - mx * my;
      const double num = 2 * cov + c2, den = vx + vy + c2;
      const double cs = num / den;
      double dcs_dcov = 2 / den;
      double dcs_dvy = -num / (den * den);
      double scale_cs = 1.0;
      double dmy_l = 0.0;
      if (last) {
        const double ln = 2 * mx * my + c1, ld = mx * mx + my * my + c1;
        const double l = ln / ld;
        scale_cs = l;
        dmy_l = cs * (2 * mx / ld - ln * 2 * my / (ld * ld));
      }
      dcs_dcov *= scale_cs;
      dcs_dvy *= scale_cs;
      // cov = E[xy] - mx*my, vy = E[y^2] - my^2.
      g_mu.v[i] = dmap * (dcs_dcov * (-mx) + dcs_dvy * (-2 * my) + dmy_l);
      g_yy.v[i] = dmap * dcs_dvy;
      g_xy.v[i] = dmap * dcs_dcov;
    }
    Plane dy = filter_valid_adjoint(g_mu, g, s.y.h, s.y.w);
    const Plane d_yy = filter_valid_adjoint(g_yy, g, s.y.h, s.y.w);
    const Plane d_xy = filter_valid_adjoint(g_xy, g, s.y.h, s.y.w);
    for (size_t i = 0; i < dy.v.size(); ++i) {
      dy.v[i] += 2 * s.y.v[i] * d_yy.v[i] + s.x.v[i] * d_xy.v[i];
    }
    if (!carry.v.empty()) pool2_adjoint_add(carry, dy);
    carry = std::move(dy);
  }
  std::copy(carry.v.begin(), carry.v.end(), grad_b.begin());
  return result;
}

template <typename T>
double ms_ssim(const BasicTensor<T>& a, const BasicTensor<T>& b, const MsSsimConfig& cfg,
               BasicTensor<T>* grad_b) {
  if (!a.same_shape(b)) throw ConfigError("ms-ssim: image dimensions differ");
  if (a.channels() == 0) throw ConfigError("ms-ssim: no channels");
  const size_t plane = a.plane_size();
  std::vector<double> pa(plane), pb(plane), pg;
  if (grad_b != nullptr) {
    *grad_b = BasicTensor<T>(b.channels(), b.height(), b.width());
    pg.resize(plane);
  }
  double total = 0;
  for (int c = 0; c < a.channels(); ++c) {
    for (size_t i = 0; i < plane; ++i) {
      pa[i] = a.plane(c)[i];
      pb[i] = b.plane(c)[i];
    }
    total += ms_ssim_plane(pa, pb, a.height(), a.width(), cfg, pg);
    if (grad_b != nullptr) {
      T* gp = grad_b->plane(c);
      for (size_t i = 0; i < plane; ++i) gp[i] = static_cast<T>(pg[i] / a.channels());
    }
  }
  return total / a.channels();
}

template <typename T>
double distortion_loss(const BasicTensor<T>& x, const BasicTensor<T>& x_hat,
                       BasicTensor<T>* grad_x_hat, const MsSsimConfig& cfg) {
  const double v = ms_ssim(x, x_hat, cfg, grad_x_hat);
  if (grad_x_hat != nullptr) {
    for (auto& g : grad_x_hat->storage()) g = -g;
  }
  return 1.0 - v;
}

double bpp(uint64_t file_bytes, int width, int height) {
  if (width <= 0 || height <= 0) throw ConfigError("bpp: non-positive image size");
  return 8.0 * static_cast<double>(file_bytes) / (static_cast<double>(width) * height);
}

template double ms_ssim<float>(const BasicTensor<float>&, const BasicTensor<float>&,
                               const MsSsimConfig&, BasicTensor<float>*);
template double ms_ssim<double>(const BasicTensor<double>&, const BasicTensor<double>&,
                                const MsSsimConfig&, BasicTensor<double>*);
template double distortion_loss<float>(const BasicTensor<float>&, const BasicTensor<float>&,
                                       BasicTensor<float>*, const MsSsimConfig&);
template double distortion_loss<double>(const BasicTensor<double>&, const BasicTensor<double>&,
                                        BasicTensor<double>*, const MsSsimConfig&);

}  // namespace msic
