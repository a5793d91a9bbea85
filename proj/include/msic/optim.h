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

#ifndef MSIC_OPTIM_H_
#define MSIC_OPTIM_H_

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "msic/errors.h"
#include "msic/tensor.h"

namespace msic {

template <typename T>
struct AdamState {
  int64_t step = 0;
  double alpha = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::vector<std::vector<T>> m;
  std::vector<std::vector<T>> v;

  void init(const ParameterRefs<T>& params) {
    m.clear();
    v.clear();
    for (const auto* p : params) {
      m.emplace_back(p->size(), T(0));
      v.emplace_back(p->size(), T(0));
    }
    step = 0;
  }
};

// One bias-corrected Adam update with effective rate alpha * lr_scale.
// Gradients are cleared afterwards. A non-finite gradient aborts the update
// before any parameter is touched.
template <typename T>
void adam_step(const ParameterRefs<T>& params, AdamState<T>& state, double lr_scale) {
  if (state.m.size() != params.size()) state.init(params);
  for (const auto* p : params) {
    for (T g : p->grad) {
      if (!std::isfinite(g)) {
        throw NumericError("adam_step: non-finite gradient in '" + p->name +
                           "' at step " + std::to_string(state.step + 1));
      }
    }
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  const double rate = state.alpha * lr_scale;
  for (size_t i = 0; i < params.size(); ++i) {
    auto& p = *params[i];
    auto& m = state.m[i];
    auto& v = state.v[i];
    for (size_t j = 0; j < p.size(); ++j) {
      const double g = p.grad[j];
      const double mj = state.beta1 * m[j] + (1.0 - state.beta1) * g;
      const double vj = state.beta2 * v[j] + (1.0 - state.beta2) * g * g;
      m[j] = static_cast<T>(mj);
      v[j] = static_cast<T>(vj);
      const double mhat = mj / c1;
      const double vhat = vj / c2;
      p.value[j] = static_cast<T>(p.value[j] - rate * mhat / (std::sqrt(vhat) + state.epsilon));
    }
    p.zero_grad();
  }
}

// Learning-rate multiplier for 1-based update t of `total`: 1 up to the decay
// start, then linear down to exactly 0 at the final update.
inline double linear_decay_scale(int64_t t, int64_t total, double decay_start_fraction = 0.75) {
  if (total <= 0) return 1.0;
  const auto start = static_cast<int64_t>(std::floor(decay_start_fraction * static_cast<double>(total)));
  if (t <= start) return 1.0;
  if (start >= total) return 1.0;
  const double s = static_cast<double>(total - t) / static_cast<double>(total - start);
  return std::max(0.0, s);
}

struct GradCheckCoordinate {
  size_t parameter = 0;
  size_t index = 0;
};

// Max over coordinates of |analytic - central difference| / max(1, |cd|).
// `loss` evaluates the scalar at the current parameter values; `gradient`
// fills Parameter::grad at the current values. An empty `coordinates`
// checks every coordinate.
inline double grad_check(const std::function<double()>& loss,
                         const std::function<void()>& gradient,
                         const ParameterRefs<double>& params,
                         std::span<const GradCheckCoordinate> coordinates = {},
                         double step = 1e-4) {
  zero_grads(params);
  gradient();
  std::vector<GradCheckCoordinate> all;
  if (coordinates.empty()) {
    for (size_t p = 0; p < params.size(); ++p) {
      for (size_t i = 0; i < params[p]->size(); ++i) all.push_back({p, i});
    }
    coordinates = all;
  }
  double worst = 0;
  for (const auto& c : coordinates) {
    double& x = params[c.parameter]->value[c.index];
    const double saved = x;
    x = saved + step;
    const double up = loss();
    x = saved - step;
    const double down = loss();
    x = saved;
    const double numeric = (up - down) / (2 * step);
    const double analytic = params[c.parameter]->grad[c.index];
    worst = std::max(worst, std::abs(analytic - numeric) / std::max(1.0, std::abs(numeric)));
  }
  return worst;
}

// Convenience form over a flat point.
inline double grad_check(const std::function<double(std::span<const double>)>& f,
                         const std::function<std::vector<double>(std::span<const double>)>& grad,
                         std::vector<double> point, double step = 1e-4) {
  const std::vector<double> analytic = grad(point);
  double worst = 0;
  for (size_t i = 0; i < point.size(); ++i) {
    const double saved = point[i];
    point[i] = saved + step;
    const double up = f(point);
    point[i] = saved - step;
    const double down = f(point);
    point[i] = saved;
    const double numeric = (up - down) / (2 * step);
    worst = std::max(worst, std::abs(analytic[i] - numeric) / std::max(1.0, std::abs(numeric)));
  }
  return worst;
}

}  // namespace msic

#endif  // MSIC_OPTIM_H_
