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

#include <algorithm>
#include <cmath>
#include <vector>

#include "gtest/gtest.h"
#include "ms_ssim_oracle.h"
#include "msic/log.h"
#include "msic/metrics.h"
#include "msic/optim.h"

namespace msic {
namespace {

std::pair<BasicTensor<double>, BasicTensor<double>> random_pair(Rng& rng, int c, int h, int w,
                                                                double noise) {
  BasicTensor<double> a(c, h, w), b(c, h, w);
  for (int ch = 0; ch < c; ++ch) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double smooth = 0.5 + 0.3 * std::sin(0.1 * (x + 3 * ch)) * std::cos(0.07 * y);
        a.at(ch, y, x) = std::clamp(smooth + uniform(rng, -0.15, 0.15), 0.0, 1.0);
      }
    }
  }
  for (size_t i = 0; i < a.size(); ++i) b[i] = std::clamp(a[i] + uniform(rng, -noise, noise), 0.0, 1.0);
  return {a, b};
}

class MetricsTest : public ::testing::Test {
 protected:
  void SetUp() override { set_warnings_enabled(false); }
  void TearDown() override { set_warnings_enabled(true); }
};

TEST_F(MetricsTest, IdenticalIsOne) {
  Rng rng(1);
  auto [a, b] = random_pair(rng, 3, 176, 176, 0.1);
  EXPECT_NEAR(ms_ssim(a, a), 1.0, 1e-12);
  EXPECT_NEAR(ms_ssim(b, b), 1.0, 1e-12);
}

TEST_F(MetricsTest, Symmetric) {
  Rng rng(2);
  auto [a, b] = random_pair(rng, 3, 64, 80, 0.2);
  EXPECT_NEAR(ms_ssim(a, b), ms_ssim(b, a), 1e-12);
  EXPECT_LT(ms_ssim(a, b), 1.0);
}

TEST_F(MetricsTest, ChannelPermutationInvariant) {
  Rng rng(3);
  auto [a, b] = random_pair(rng, 3, 64, 64, 0.2);
  BasicTensor<double> pa(3, 64, 64), pb(3, 64, 64);
  const int perm[3] = {2, 0, 1};
  for (int c = 0; c < 3; ++c) {
    std::copy(a.plane(perm[c]), a.plane(perm[c]) + a.plane_size(), pa.plane(c));
    std::copy(b.plane(perm[c]), b.plane(perm[c]) + b.plane_size(), pb.plane(c));
  }
  EXPECT_NEAR(ms_ssim(a, b), ms_ssim(pa, pb), 1e-12);
}

TEST_F(MetricsTest, ConstantBlackVersusWhite) {
  // With three scales the luminance term dominates; see the decisions notes
  // for the five-scale value.
  BasicTensor<double> a(3, 64, 64, 0.0), b(3, 64, 64, 1.0);
  EXPECT_LT(ms_ssim(a, b), 0.05);
}

TEST_F(MetricsTest, MatchesCleanRoomOracle) {
  Rng rng(4);
  for (int i = 0; i < 3; ++i) {
    auto [a, b] = random_pair(rng, 3, 256, 256, 0.05 + 0.1 * i);
    EXPECT_NEAR(ms_ssim(a, b), testing_oracle::ms_ssim(a, b), 1e-6);
  }
  auto [a, b] = random_pair(rng, 1, 45, 70, 0.2);  // reduced scales, odd dims
  EXPECT_NEAR(ms_ssim(a, b), testing_oracle::ms_ssim(a, b), 1e-6);
}

TEST_F(MetricsTest, FloatAndDoubleAgree) {
  Rng rng(5);
  auto [a, b] = random_pair(rng, 3, 64, 64, 0.1);
  EXPECT_NEAR(ms_ssim(a.cast<float>(), b.cast<float>()), ms_ssim(a, b), 1e-5);
}

TEST_F(MetricsTest, GradientMatchesFiniteDifferences) {
  Rng rng(6);
  auto [a, b] = random_pair(rng, 3, 64, 64, 0.1);
  BasicTensor<double> grad;
  distortion_loss(a, b, &grad);
  double worst = 0;
  for (int k = 0; k < 200; ++k) {
    const size_t i = static_cast<size_t>(uniform_int(rng, static_cast<int>(b.size())));
    const double h = 1e-5;
    auto up = b, down = b;
    up[i] += h;
    down[i] -= h;
    const double fd = (distortion_loss(a, up) - distortion_loss(a, down)) / (2 * h);
    worst = std::max(worst, std::abs(fd - grad[i]) / std::max(1.0, std::abs(fd)));
  }
  EXPECT_LT(worst, 1e-6);
}

TEST_F(MetricsTest, GradientRelativeOnLargeEntries) {
  Rng rng(7);
  auto [a, b] = random_pair(rng, 1, 32, 32, 0.3);
  BasicTensor<double> grad;
  distortion_loss(a, b, &grad);
  size_t idx = 0;
  for (size_t i = 0; i < grad.size(); ++i) {
    if (std::abs(grad[i]) > std::abs(grad[idx])) idx = i;
  }
  auto up = b, down = b;
  up[idx] += 1e-6;
  down[idx] -= 1e-6;
  const double fd = (distortion_loss(a, up) - distortion_loss(a, down)) / 2e-6;
  EXPECT_NEAR(grad[idx], fd, 1e-3 * std::abs(fd));
}

TEST_F(MetricsTest, DistortionLossOfIdenticalIsZero) {
  Rng rng(8);
  auto [a, b] = random_pair(rng, 3, 48, 48, 0.1);
  EXPECT_NEAR(distortion_loss(a, a), 0.0, 1e-12);
  EXPECT_NEAR(distortion_loss(a, b), distortion_loss(b, a), 1e-12);
}

TEST_F(MetricsTest, TooSmallThrows) {
  BasicTensor<double> a(1, 8, 8, 0.5);
  EXPECT_THROW(ms_ssim(a, a), ConfigError);
}

TEST_F(MetricsTest, UsableScales) {
  MsSsimConfig cfg;
  EXPECT_EQ(cfg.usable_scales(256, 256), 5);
  EXPECT_EQ(cfg.usable_scales(176, 176), 5);
  EXPECT_EQ(cfg.usable_scales(175, 300), 4);
  EXPECT_EQ(cfg.usable_scales(64, 64), 3);
  EXPECT_EQ(cfg.usable_scales(10, 64), 0);
}

TEST(BppTest, Examples) {
  EXPECT_DOUBLE_EQ(bpp(4608, 768, 512), 0.09375);
  EXPECT_EQ(bpp(0, 10, 10), 0.0);
  EXPECT_DOUBLE_EQ(bpp(2 * 1234, 33, 17), 2 * bpp(1234, 33, 17));
}

}  // namespace
}  // namespace msic
