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

#ifndef MSIC_QUANTIZER_H_
#define MSIC_QUANTIZER_H_

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "msic/errors.h"
#include "msic/ops.h"
#include "msic/tensor.h"

namespace msic {

struct QuantizerConfig {
  double u = 4.0;     // clip bound
  int levels = 7;     // N
  double alpha = 0.5; // soft-round amplitude

  void validate() const {
    if (!(u > 0)) throw ConfigError("quantizer: u must be positive");
    if (levels < 2) throw ConfigError("quantizer: N must be >= 2");
    if (!(alpha >= 0 && alpha < 1)) throw ConfigError("quantizer: alpha must be in [0, 1)");
  }
};

// ceil(x - 1/2) in exact arithmetic; halves round down (2.5 -> 2). The
// subtraction is avoided because x - 0.5 can round onto an integer (for x
// just above -0.5); floor(x) + 0.5 is exact for |x| < 2^52.
inline int round_hard(double x) {
  const double f = std::floor(x);
  return static_cast<int>(x > f + 0.5 ? f + 1 : f);
}

inline double round_soft(double x, double alpha) {
  constexpr double two_pi = 2 * std::numbers::pi;
  return x - alpha * std::sin(two_pi * x) / two_pi;
}

inline double round_soft_derivative(double x, double alpha) {
  return 1.0 - alpha * std::cos(2 * std::numbers::pi * x);
}

// kHard: forward rounds, backward uses the soft surrogate's slope (training).
// kSoft: forward and backward both use the surrogate (gradient checking).
enum class QuantMode { kHard, kSoft };

// clip(x, 0, u) * (N - 1) / u, elementwise.
template <typename T>
BasicTensor<T> clip_and_scale(const BasicTensor<T>& x, const QuantizerConfig& cfg) {
  const double scale = (cfg.levels - 1) / cfg.u;
  BasicTensor<T> y = x;
  for (auto& v : y.storage()) {
    const double c = std::min(std::max(static_cast<double>(v), 0.0), cfg.u);
    v = static_cast<T>(c * scale);
  }
  return y;
}

// Straight-through inside (0, u), zero when saturated.
template <typename T>
void clip_and_scale_backward(const BasicTensor<T>& input, const QuantizerConfig& cfg,
                             BasicTensor<T>& grad) {
  const T scale = static_cast<T>((cfg.levels - 1) / cfg.u);
  for (size_t i = 0; i < grad.size(); ++i) {
    const double v = input[i];
    grad[i] = (v > 0 && v < cfg.u) ? grad[i] * scale : T(0);
  }
}

// BN -> clip -> scale. Output lies in [0, N - 1].
template <typename T>
std::vector<BasicTensor<T>> preprocess(const std::vector<BasicTensor<T>>& z,
                                       BatchNormState<T>& bn, std::span<const T> gamma,
                                       std::span<const T> beta, const QuantizerConfig& cfg,
                                       Mode mode) {
  auto normalized = batchnorm(z, bn, gamma, beta, mode);
  for (auto& t : normalized) t = clip_and_scale(t, cfg);
  return normalized;
}

template <typename T>
BasicTensor<T> quantize(const BasicTensor<T>& x, const QuantizerConfig& cfg,
                        QuantMode mode = QuantMode::kHard) {
  BasicTensor<T> y = x;
  for (auto& v : y.storage()) {
    if (mode == QuantMode::kHard) {
      int q = round_hard(v);
      q = std::min(std::max(q, 0), cfg.levels - 1);
      v = static_cast<T>(q);
    } else {
      v = static_cast<T>(round_soft(v, cfg.alpha));
    }
  }
  return y;
}

// Multiplies the upstream gradient by d/dx round_soft at the quantizer input.
template <typename T>
void quantize_backward(const BasicTensor<T>& input, const QuantizerConfig& cfg,
                       BasicTensor<T>& grad) {
  for (size_t i = 0; i < grad.size(); ++i) {
    grad[i] = static_cast<T>(grad[i] * round_soft_derivative(input[i], cfg.alpha));
  }
}

}  // namespace msic

#endif  // MSIC_QUANTIZER_H_
