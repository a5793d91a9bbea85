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

#ifndef MSIC_METRICS_H_
#define MSIC_METRICS_H_

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "msic/tensor.h"

namespace msic {

struct MsSsimConfig {
  int scales = 5;
  std::vector<double> weights = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 1.0;

  void validate() const;
  // Largest scale count <= `scales` with min(h, w) >= window * 2^(s-1).
  // Returns 0 when even one scale does not fit.
  int usable_scales(int height, int width) const;
};

// Normalized 1-D Gaussian taps (the 2-D window is their outer product).
std::vector<double> gaussian_window(int size, double sigma);

// MS-SSIM of one plane pair. `grad_b`, when non-empty, receives
// d MS-SSIM / d b (same layout as b). Scales are reduced, and the weights
// renormalized, when the plane is too small for the configured count.
double ms_ssim_plane(std::span<const double> a, std::span<const double> b, int height,
                     int width, const MsSsimConfig& cfg, std::span<double> grad_b = {});

// Mean over channels of per-channel MS-SSIM.
template <typename T>
double ms_ssim(const BasicTensor<T>& a, const BasicTensor<T>& b,
               const MsSsimConfig& cfg = {}, BasicTensor<T>* grad_b = nullptr);

// 1 - ms_ssim; `grad_b` receives d loss / d b.
template <typename T>
double distortion_loss(const BasicTensor<T>& x, const BasicTensor<T>& x_hat,
                       BasicTensor<T>* grad_x_hat = nullptr, const MsSsimConfig& cfg = {});

// Bits per pixel of a file of `file_bytes` bytes (header included).
double bpp(uint64_t file_bytes, int width, int height);

}  // namespace msic

#endif  // MSIC_METRICS_H_
