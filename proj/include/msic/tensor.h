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

#ifndef MSIC_TENSOR_H_
#define MSIC_TENSOR_H_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "msic/errors.h"

namespace msic {

// Dense channels x height x width array, row-major by (channel, row, column).
template <typename T>
class BasicTensor {
 public:
  BasicTensor() = default;
  BasicTensor(int channels, int height, int width, T fill = T(0))
      : channels_(channels),
        height_(height),
        width_(width),
        data_(static_cast<size_t>(channels) * height * width, fill) {
    if (channels < 0 || height < 0 || width < 0) {
      throw ConfigError("negative tensor dimension");
    }
  }

  int channels() const { return channels_; }
  int height() const { return height_; }
  int width() const { return width_; }
  size_t size() const { return data_.size(); }
  size_t plane_size() const { return static_cast<size_t>(height_) * width_; }
  bool empty() const { return data_.empty(); }

  T& at(int c, int y, int x) { return data_[index(c, y, x)]; }
  T at(int c, int y, int x) const { return data_[index(c, y, x)]; }
  T& operator[](size_t i) { return data_[i]; }
  T operator[](size_t i) const { return data_[i]; }

  T* plane(int c) { return data_.data() + c * plane_size(); }
  const T* plane(int c) const { return data_.data() + c * plane_size(); }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }
  std::vector<T>& storage() { return data_; }
  const std::vector<T>& storage() const { return data_; }

  bool same_shape(const BasicTensor& o) const {
    return channels_ == o.channels_ && height_ == o.height_ &&
           width_ == o.width_;
  }

  bool all_finite() const {
    for (T v : data_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  template <typename U>
  BasicTensor<U> cast() const {
    BasicTensor<U> out(channels_, height_, width_);
    for (size_t i = 0; i < data_.size(); ++i) out[i] = static_cast<U>(data_[i]);
    return out;
  }

  bool operator==(const BasicTensor& o) const {
    return same_shape(o) && data_ == o.data_;
  }

 private:
  size_t index(int c, int y, int x) const {
    return (static_cast<size_t>(c) * height_ + y) * width_ + x;
  }

  int channels_ = 0;
  int height_ = 0;
  int width_ = 0;
  std::vector<T> data_;
};

using Tensor = BasicTensor<float>;

// A trainable array with a gradient of the same shape.
template <typename T>
struct Parameter {
  std::string name;
  std::vector<int> shape;
  std::vector<T> value;
  std::vector<T> grad;

  Parameter() = default;
  Parameter(std::string n, std::vector<int> s) : name(std::move(n)), shape(std::move(s)) {
    size_t count = 1;
    for (int d : shape) count *= static_cast<size_t>(d);
    value.assign(count, T(0));
    grad.assign(count, T(0));
  }

  size_t size() const { return value.size(); }
  void zero_grad() { std::fill(grad.begin(), grad.end(), T(0)); }
};

template <typename T>
using ParameterRefs = std::vector<Parameter<T>*>;

// Platform-independent uniform draws. std::uniform_real_distribution is not
// specified bit-exactly, so all randomness goes through these helpers.
using Rng = std::mt19937_64;

inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

inline int uniform_int(Rng& rng, int n) {
  return static_cast<int>(uniform01(rng) * n);
}

// Box-Muller; consumes two draws.
inline double normal(Rng& rng) {
  double u1 = uniform01(rng);
  double u2 = uniform01(rng);
  if (u1 < 1e-300) u1 = 1e-300;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

// Uniform in [-b, b] with b = sqrt(6 / fan_in).
template <typename T>
void he_uniform_init(Parameter<T>& p, int fan_in, Rng& rng) {
  const double bound = std::sqrt(6.0 / std::max(1, fan_in));
  for (auto& v : p.value) v = static_cast<T>(uniform(rng, -bound, bound));
}

// Copies values between parameter lists of different precision.
template <typename To, typename From>
void copy_values(const ParameterRefs<From>& src, const ParameterRefs<To>& dst) {
  if (src.size() != dst.size()) throw ConfigError("parameter list mismatch");
  for (size_t i = 0; i < src.size(); ++i) {
    if (src[i]->size() != dst[i]->size()) {
      throw ConfigError("parameter size mismatch: " + src[i]->name);
    }
    for (size_t j = 0; j < src[i]->size(); ++j) {
      dst[i]->value[j] = static_cast<To>(src[i]->value[j]);
    }
  }
}

template <typename T>
size_t total_size(const ParameterRefs<T>& params) {
  size_t n = 0;
  for (const auto* p : params) n += p->size();
  return n;
}

template <typename T>
void zero_grads(const ParameterRefs<T>& params) {
  for (auto* p : params) p->zero_grad();
}

}  // namespace msic

#endif  // MSIC_TENSOR_H_
