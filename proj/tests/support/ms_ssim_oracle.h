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

#ifndef MSIC_TESTS_SUPPORT_MS_SSIM_ORACLE_H_
#define MSIC_TESTS_SUPPORT_MS_SSIM_ORACLE_H_

#include <algorithm>
#include <cmath>
#include <vector>

#include "msic/tensor.h"

namespace msic::testing_oracle {

// Brute-force MS-SSIM: full 2-D Gaussian window summed directly per output
// pixel, 2x2 mean pooling, last scale uses luminance too.
inline double ms_ssim_plane(std::vector<double> x, std::vector<double> y, int h, int w) {
  const double weights[5] = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};
  const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
  double win[11][11];
  double total = 0;
  for (int i = 0; i < 11; ++i) {
    for (int j = 0; j < 11; ++j) {
      win[i][j] = std::exp(-((i - 5) * (i - 5) + (j - 5) * (j - 5)) / (2 * 1.5 * 1.5));
      total += win[i][j];
    }
  }
  int scales = 0;
  while (scales < 5 && std::min(h, w) >= 11 * (1 << scales)) ++scales;
  double wsum = 0;
  for (int s = 0; s < scales; ++s) wsum += weights[s];
  const double norm = scales == 5 ? 1.0 : wsum;
  double result = 1;
  for (int s = 0; s < scales; ++s) {
    if (s > 0) {
      const int nh = h / 2, nw = w / 2;
      std::vector<double> px(nh * nw), py(nh * nw);
      for (int i = 0; i < nh; ++i) {
        for (int j = 0; j < nw; ++j) {
          px[i * nw + j] = (x[2 * i * w + 2 * j] + x[2 * i * w + 2 * j + 1] +
                            x[(2 * i + 1) * w + 2 * j] + x[(2 * i + 1) * w + 2 * j + 1]) / 4;
          py[i * nw + j] = (y[2 * i * w + 2 * j] + y[2 * i * w + 2 * j + 1] +
                            y[(2 * i + 1) * w + 2 * j] + y[(2 * i + 1) * w + 2 * j + 1]) / 4;
        }
      }
      x = px;
      y = py;
      h = nh;
      w = nw;
    }
    double acc = 0;
    int count = 0;
    for (int i = 0; i + 11 <= h; ++i) {
      for (int j = 0; j + 11 <= w; ++j) {
        double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
        for (int a = 0; a < 11; ++a) {
          for (int b = 0; b < 11; ++b) {
            const double k = win[a][b] / total;
            const double xv = x[(i + a) * w + j + b], yv = y[(i + a) * w + j + b];
            mx += k * xv;
            my += k * yv;
            sxx += k * xv * xv;
            syy += k * yv * yv;
            sxy += k * xv * yv;
          }
        }
        const double vx = sxx - mx * mx, vy = syy - my * my, cov = sxy - mx * my;
        double term = (2 * cov + c2) / (vx + vy + c2);
        if (s == scales - 1) term *= (2 * mx * my + c1) / (mx * mx + my * my + c1);
        acc += term;
        ++count;
      }
    }
    const double v = acc / count;
    if (v <= 0) return 0;
    result *= std::pow(v, weights[s] / norm);
  }
  return result;
}

inline double ms_ssim(const BasicTensor<double>& a, const BasicTensor<double>& b) {
  double sum = 0;
  const size_t plane = a.plane_size();
  for (int c = 0; c < a.channels(); ++c) {
    sum += ms_ssim_plane(std::vector<double>(a.plane(c), a.plane(c) + plane),
                        std::vector<double>(b.plane(c), b.plane(c) + plane), a.height(), a.width());
  }
  return sum / a.channels();
}

}  // namespace msic::testing_oracle

#endif  // MSIC_TESTS_SUPPORT_MS_SSIM_ORACLE_H_
