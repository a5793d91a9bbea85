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

#include "msic/corpus.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "msic/errors.h"
#include "msic/png_io.h"

namespace msic {
namespace {

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

Tensor make_toy_image(int height, int width, uint64_t seed) {
  if (height < 1 || width < 1) throw ConfigError("toy image needs positive dimensions");
  Rng rng(splitmix64(seed));
  Tensor img(3, height, width);
  float corner[4][3];
  for (auto& c : corner) {
    for (auto& v : c) v = static_cast<float>(uniform(rng, 0.1, 0.9));
  }
  for (int y = 0; y < height; ++y) {
    const float fy = height > 1 ? static_cast<float>(y) / (height - 1) : 0.0f;
    for (int x = 0; x < width; ++x) {
      const float fx = width > 1 ? static_cast<float>(x) / (width - 1) : 0.0f;
      for (int c = 0; c < 3; ++c) {
        img.at(c, y, x) = (1 - fy) * ((1 - fx) * corner[0][c] + fx * corner[1][c]) +
                          fy * ((1 - fx) * corner[2][c] + fx * corner[3][c]);
      }
    }
  }
  const int shapes = 2 + uniform_int(rng, 4);
  for (int s = 0; s < shapes; ++s) {
    const bool disc = uniform01(rng) < 0.5;
    const double cy = uniform(rng, 0, height), cx = uniform(rng, 0, width);
    const double ry = uniform(rng, 0.08, 0.3) * height, rx = uniform(rng, 0.08, 0.3) * width;
    float color[3];
    for (auto& v : color) v = static_cast<float>(uniform01(rng));
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const double dy = (y + 0.5 - cy) / ry, dx = (x + 0.5 - cx) / rx;
        const bool inside = disc ? dy * dy + dx * dx <= 1.0 : std::abs(dy) <= 1 && std::abs(dx) <= 1;
        if (!inside) continue;
        for (int c = 0; c < 3; ++c) img.at(c, y, x) = color[c];
      }
    }
  }
  for (auto& v : img.storage()) v += static_cast<float>(normal(rng) * 0.02);
  return quantize_to_8bit(img);
}

std::vector<CorpusImage> make_toy_corpus(int count, int height, int width, uint64_t seed) {
  std::vector<CorpusImage> out;
  for (int i = 0; i < count; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "toy_%04d.png", i);
    out.push_back({name, make_toy_image(height, width, splitmix64(seed) ^ splitmix64(i + 1))});
  }
  return out;
}

std::vector<CorpusImage> load_corpus(const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw FormatError("corpus directory not found: " + dir);
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::string ext = e.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png") names.push_back(e.path().filename().string());
  }
  std::sort(names.begin(), names.end());
  std::vector<CorpusImage> out;
  for (const auto& n : names) out.push_back({n, read_png((fs::path(dir) / n).string())});
  return out;
}

void write_corpus(const std::string& dir, const std::vector<CorpusImage>& images) {
  std::filesystem::create_directories(dir);
  for (const auto& im : images) {
    write_png((std::filesystem::path(dir) / im.name).string(), im.pixels);
  }
}

std::vector<Tensor> pixels_of(const std::vector<CorpusImage>& images) {
  std::vector<Tensor> out;
  for (const auto& im : images) out.push_back(im.pixels);
  return out;
}

}  // namespace msic
