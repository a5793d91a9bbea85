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

#ifndef MSIC_OPS_H_
#define MSIC_OPS_H_

// Forward and backward kernels for the small networks in this codec.
// Every reduction runs in a fixed order so results are bit-reproducible.

#include <cmath>
#include <span>
#include <vector>

#include "msic/errors.h"
#include "msic/tensor.h"

namespace msic {

struct ConvSpec {
  int in_channels = 0;
  int out_channels = 0;
  int size = 3;  // square kernel
  int stride = 1;
  int pad = 1;

  int out_dim(int in) const { return (in + 2 * pad - size) / stride + 1; }
  size_t weight_count() const {
    return static_cast<size_t>(out_channels) * in_channels * size * size;
  }
};

namespace detail {

// Output columns [lo, hi) whose input column ox*stride - pad + k lies in [0, n).
inline void valid_range(int k, int pad, int stride, int n, int out_n, int* lo,
                        int* hi) {
  int first = pad - k;
  int l = first <= 0 ? 0 : (first + stride - 1) / stride;
  int last = n - 1 + pad - k;
  int h = last < 0 ? 0 : last / stride + 1;
  *lo = std::min(l, out_n);
  *hi = std::min(h, out_n);
  if (*hi < *lo) *hi = *lo;
}

}  // namespace detail

// Cross-correlation with zero padding. Weight layout is
// [out][in][row][column]; an empty bias means zero bias. Each output element
// is accumulated bias first, then by input channel, kernel row, kernel column.
template <typename T>
BasicTensor<T> conv2d(const BasicTensor<T>& input, const ConvSpec& spec,
                      std::span<const T> weight, std::span<const T> bias = {}) {
  if (input.channels() != spec.in_channels) {
    throw ConfigError("conv2d: input has " + std::to_string(input.channels()) +
                      " channels, kernel expects " +
                      std::to_string(spec.in_channels));
  }
  if (spec.stride < 1 || spec.size < 1 || spec.pad < 0) {
    throw ConfigError("conv2d: invalid stride/size/pad");
  }
  if (weight.size() != spec.weight_count()) {
    throw ConfigError("conv2d: weight size mismatch");
  }
  if (!bias.empty() && bias.size() != static_cast<size_t>(spec.out_channels)) {
    throw ConfigError("conv2d: bias size mismatch");
  }
  const int h = input.height(), w = input.width();
  const int oh = spec.out_dim(h), ow = spec.out_dim(w);
  if (oh <= 0 || ow <= 0) throw ConfigError("conv2d: input smaller than kernel");
  const int k = spec.size, s = spec.stride, p = spec.pad;
  BasicTensor<T> out(spec.out_channels, oh, ow);

  std::vector<int> xlo(k), xhi(k), ylo(k), yhi(k);
  for (int t = 0; t < k; ++t) {
    detail::valid_range(t, p, s, w, ow, &xlo[t], &xhi[t]);
    detail::valid_range(t, p, s, h, oh, &ylo[t], &yhi[t]);
  }

  for (int o = 0; o < spec.out_channels; ++o) {
    T* op = out.plane(o);
    const T b = bias.empty() ? T(0) : bias[o];
    for (size_t i = 0; i < out.plane_size(); ++i) op[i] = b;
    for (int c = 0; c < spec.in_channels; ++c) {
      const T* ip = input.plane(c);
      const T* wk = weight.data() + (static_cast<size_t>(o) * spec.in_channels + c) * k * k;
      for (int ky = 0; ky < k; ++ky) {
        for (int kx = 0; kx < k; ++kx) {
          const T wv = wk[ky * k + kx];
          for (int oy = ylo[ky]; oy < yhi[ky]; ++oy) {
            const T* irow = ip + static_cast<size_t>(oy * s - p + ky) * w;
            T* orow = op + static_cast<size_t>(oy) * ow;
            const int off = kx - p;
            if (s == 1) {
              for (int ox = xlo[kx]; ox < xhi[kx]; ++ox) orow[ox] += wv * irow[ox + off];
            } else {
              for (int ox = xlo[kx]; ox < xhi[kx]; ++ox) orow[ox] += wv * irow[ox * s + off];
            }
          }
        }
      }
    }
  }
  return out;
}

// Accumulates parameter gradients into grad_weight / grad_bias and, when
// grad_input is non-null, overwrites it with the input gradient.
template <typename T>
void conv2d_backward(const BasicTensor<T>& input, const ConvSpec& spec,
                     std::span<const T> weight, const BasicTensor<T>& grad_out,
                     BasicTensor<T>* grad_input, std::span<T> grad_weight,
                     std::span<T> grad_bias) {
  const int h = input.height(), w = input.width();
  const int oh = grad_out.height(), ow = grad_out.width();
  const int k = spec.size, s = spec.stride, p = spec.pad;
  if (grad_input != nullptr) *grad_input = BasicTensor<T>(spec.in_channels, h, w);

  std::vector<int> xlo(k), xhi(k), ylo(k), yhi(k);
  for (int t = 0; t < k; ++t) {
    detail::valid_range(t, p, s, w, ow, &xlo[t], &xhi[t]);
    detail::valid_range(t, p, s, h, oh, &ylo[t], &yhi[t]);
  }

  for (int o = 0; o < spec.out_channels; ++o) {
    const T* gp = grad_out.plane(o);
    if (!grad_bias.empty()) {
      T acc = 0;
      for (size_t i = 0; i < grad_out.plane_size(); ++i) acc += gp[i];
      grad_bias[o] += acc;
    }
    for (int c = 0; c < spec.in_channels; ++c) {
      const T* ip = input.plane(c);
      T* gi = grad_input != nullptr ? grad_input->plane(c) : nullptr;
      const size_t base = (static_cast<size_t>(o) * spec.in_channels + c) * k * k;
      for (int ky = 0; ky < k; ++ky) {
        for (int kx = 0; kx < k; ++kx) {
          const T wv = weight[base + ky * k + kx];
          const int off = kx - p;
          T acc = 0;
          for (int oy = ylo[ky]; oy < yhi[ky]; ++oy) {
            const size_t irow = static_cast<size_t>(oy * s - p + ky) * w;
            const T* grow = gp + static_cast<size_t>(oy) * ow;
            for (int ox = xlo[kx]; ox < xhi[kx]; ++ox) {
              const size_t ii = irow + ox * s + off;
              acc += grow[ox] * ip[ii];
              if (gi != nullptr) gi[ii] += wv * grow[ox];
            }
          }
          grad_weight[base + ky * k + kx] += acc;
        }
      }
    }
  }
}

template <typename T>
BasicTensor<T> leaky_relu(const BasicTensor<T>& x, T slope) {
  BasicTensor<T> y = x;
  for (auto& v : y.storage()) v = v > 0 ? v : v * slope;
  return y;
}

// Gradient of leaky_relu given its input.
template <typename T>
void leaky_relu_backward(const BasicTensor<T>& input, T slope, BasicTensor<T>& grad) {
  for (size_t i = 0; i < grad.size(); ++i) {
    if (!(input[i] > 0)) grad[i] *= slope;
  }
}

// Nearest-neighbour upsampling: out[c, y, x] = in[c, y / f, x / f].
template <typename T>
BasicTensor<T> unpool_nearest(const BasicTensor<T>& input, int factor) {
  if (factor < 1) throw ConfigError("unpool factor must be >= 1");
  if (factor == 1) return input;
  BasicTensor<T> out(input.channels(), input.height() * factor, input.width() * factor);
  for (int c = 0; c < out.channels(); ++c) {
    for (int y = 0; y < out.height(); ++y) {
      for (int x = 0; x < out.width(); ++x) {
        out.at(c, y, x) = input.at(c, y / factor, x / factor);
      }
    }
  }
  return out;
}

// Adjoint of unpool_nearest: sums each factor x factor block.
template <typename T>
BasicTensor<T> unpool_nearest_backward(const BasicTensor<T>& grad_out, int factor) {
  if (factor == 1) return grad_out;
  BasicTensor<T> g(grad_out.channels(), grad_out.height() / factor,
                   grad_out.width() / factor);
  for (int c = 0; c < grad_out.channels(); ++c) {
    for (int y = 0; y < grad_out.height(); ++y) {
      for (int x = 0; x < grad_out.width(); ++x) {
        g.at(c, y / factor, x / factor) += grad_out.at(c, y, x);
      }
    }
  }
  return g;
}

template <typename T>
void add_inplace(BasicTensor<T>& a, const BasicTensor<T>& b) {
  if (!a.same_shape(b)) throw ConfigError("add: shape mismatch");
  for (size_t i = 0; i < a.size(); ++i) a[i] += b[i];
}

// ---------------------------------------------------------------------------
// Batch normalization over (batch, row, column) per channel.

enum class Mode { kTrain, kEval };

template <typename T>
struct BatchNormState {
  std::vector<T> running_mean;
  std::vector<T> running_var;

  explicit BatchNormState(int channels = 0)
      : running_mean(channels, T(0)), running_var(channels, T(1)) {}
  int channels() const { return static_cast<int>(running_mean.size()); }
};

inline constexpr double kBatchNormEpsilon = 1e-5;
inline constexpr double kBatchNormMomentum = 0.9;

template <typename T>
struct BatchNormCache {
  std::vector<BasicTensor<T>> normalized;
  std::vector<T> inv_std;
  Mode mode = Mode::kEval;
};

template <typename T>
std::vector<BasicTensor<T>> batchnorm(const std::vector<BasicTensor<T>>& batch,
                                      BatchNormState<T>& state,
                                      std::span<const T> gamma,
                                      std::span<const T> beta, Mode mode,
                                      BatchNormCache<T>* cache = nullptr) {
  if (batch.empty()) return {};
  const int channels = batch[0].channels();
  if (channels != state.channels() || gamma.size() != static_cast<size_t>(channels) ||
      beta.size() != static_cast<size_t>(channels)) {
    throw ConfigError("batchnorm: channel mismatch");
  }
  for (const auto& t : batch) {
    if (!t.same_shape(batch[0])) throw ConfigError("batchnorm: ragged batch");
  }
  const size_t plane = batch[0].plane_size();
  const double count = static_cast<double>(batch.size() * plane);
  if (mode == Mode::kTrain && count < 2) {
    throw ConfigError("batchnorm: training needs at least two values per channel");
  }

  std::vector<T> inv_std(channels);
  std::vector<BasicTensor<T>> normalized(batch.size(), BasicTensor<T>(channels, batch[0].height(), batch[0].width()));
  std::vector<BasicTensor<T>> out = normalized;
  for (int c = 0; c < channels; ++c) {
    double mean, var;
    if (mode == Mode::kTrain) {
      double sum = 0;
      for (const auto& t : batch) {
        const T* p = t.plane(c);
        for (size_t i = 0; i < plane; ++i) sum += p[i];
      }
      mean = sum / count;
      double sq = 0;
      for (const auto& t : batch) {
        const T* p = t.plane(c);
        for (size_t i = 0; i < plane; ++i) sq += (p[i] - mean) * (p[i] - mean);
      }
      var = sq / count;
      const double unbiased = sq / (count - 1);
      state.running_mean[c] = static_cast<T>(kBatchNormMomentum * state.running_mean[c] +
                                             (1 - kBatchNormMomentum) * mean);
      state.running_var[c] = static_cast<T>(kBatchNormMomentum * state.running_var[c] +
                                            (1 - kBatchNormMomentum) * unbiased);
    } else {
      mean = state.running_mean[c];
      var = state.running_var[c];
    }
    const double is = 1.0 / std::sqrt(var + kBatchNormEpsilon);
    inv_std[c] = static_cast<T>(is);
    for (size_t b = 0; b < batch.size(); ++b) {
      const T* p = batch[b].plane(c);
      T* n = normalized[b].plane(c);
      T* o = out[b].plane(c);
      for (size_t i = 0; i < plane; ++i) {
        n[i] = static_cast<T>((p[i] - mean) * is);
        o[i] = gamma[c] * n[i] + beta[c];
      }
    }
  }
  if (cache != nullptr) {
    cache->normalized = std::move(normalized);
    cache->inv_std = std::move(inv_std);
    cache->mode = mode;
  }
  return out;
}

template <typename T>
std::vector<BasicTensor<T>> batchnorm_backward(const BatchNormCache<T>& cache,
                                               const std::vector<BasicTensor<T>>& grad_out,
                                               std::span<const T> gamma,
                                               std::span<T> grad_gamma,
                                               std::span<T> grad_beta) {
  if (grad_out.empty()) return {};
  const int channels = grad_out[0].channels();
  const size_t plane = grad_out[0].plane_size();
  const double count = static_cast<double>(grad_out.size() * plane);
  std::vector<BasicTensor<T>> grad_in(grad_out.size(),
                                      BasicTensor<T>(channels, grad_out[0].height(), grad_out[0].width()));
  for (int c = 0; c < channels; ++c) {
    double sum_g = 0, sum_gx = 0;
    for (size_t b = 0; b < grad_out.size(); ++b) {
      const T* g = grad_out[b].plane(c);
      const T* n = cache.normalized[b].plane(c);
      for (size_t i = 0; i < plane; ++i) {
        sum_g += g[i];
        sum_gx += static_cast<double>(g[i]) * n[i];
      }
    }
    grad_gamma[c] += static_cast<T>(sum_gx);
    grad_beta[c] += static_cast<T>(sum_g);
    const double scale = static_cast<double>(gamma[c]) * cache.inv_std[c];
    for (size_t b = 0; b < grad_out.size(); ++b) {
      const T* g = grad_out[b].plane(c);
      const T* n = cache.normalized[b].plane(c);
      T* d = grad_in[b].plane(c);
      for (size_t i = 0; i < plane; ++i) {
        if (cache.mode == Mode::kTrain) {
          d[i] = static_cast<T>(scale * (g[i] - sum_g / count - n[i] * sum_gx / count));
        } else {
          d[i] = static_cast<T>(scale * g[i]);
        }
      }
    }
  }
  return grad_in;
}

}  // namespace msic

#endif  // MSIC_OPS_H_
