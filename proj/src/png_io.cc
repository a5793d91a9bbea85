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

#include "msic/png_io.h"

#include <png.h>

#include <algorithm>
#include <cmath>

#include "msic/bytes.h"
#include "msic/errors.h"

namespace msic {
namespace {

uint8_t to_byte(float v) {
  const float c = std::min(std::max(v, 0.0f), 1.0f);
  return static_cast<uint8_t>(std::lround(c * 255.0f));
}

}  // namespace

Tensor decode_png(std::span<const uint8_t> bytes) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw FormatError(std::string("cannot parse PNG: ") + image.message);
  }
  if (image.format & PNG_FORMAT_FLAG_ALPHA) {
    png_image_free(&image);
    throw FormatError("PNG has an alpha channel; only 8-bit RGB is supported");
  }
  if (image.format & PNG_FORMAT_FLAG_LINEAR) {
    png_image_free(&image);
    throw FormatError("16-bit PNG is not supported; only 8-bit RGB");
  }
  if (image.width == 0 || image.height == 0 || image.width > 65535 || image.height > 65535) {
    png_image_free(&image);
    throw FormatError("PNG dimensions out of range");
  }
  image.format = PNG_FORMAT_RGB;
  std::vector<uint8_t> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    throw FormatError(std::string("cannot decode PNG: ") + image.message);
  }
  const int h = static_cast<int>(image.height), w = static_cast<int>(image.width);
  Tensor out(3, h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) {
        out.at(c, y, x) = buffer[(static_cast<size_t>(y) * w + x) * 3 + c] / 255.0f;
      }
    }
  }
  return out;
}

Tensor read_png(const std::string& path) {
  try {
    return decode_png(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

std::vector<uint8_t> encode_png(const Tensor& image) {
  if (image.channels() != 3) throw ConfigError("PNG output needs 3 channels");
  const int h = image.height(), w = image.width();
  std::vector<uint8_t> buffer(static_cast<size_t>(h) * w * 3);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) {
        buffer[(static_cast<size_t>(y) * w + x) * 3 + c] = to_byte(image.at(c, y, x));
      }
    }
  }
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(w);
  img.height = static_cast<png_uint_32>(h);
  img.format = PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&img, nullptr, &size, 0, buffer.data(), 0, nullptr)) {
    throw FormatError(std::string("cannot encode PNG: ") + img.message);
  }
  std::vector<uint8_t> out(size);
  if (!png_image_write_to_memory(&img, out.data(), &size, 0, buffer.data(), 0, nullptr)) {
    throw FormatError(std::string("cannot encode PNG: ") + img.message);
  }
  out.resize(size);
  return out;
}

void write_png(const std::string& path, const Tensor& image) {
  write_file(path, encode_png(image));
}

Tensor quantize_to_8bit(const Tensor& image) {
  Tensor out = image;
  for (auto& v : out.storage()) v = to_byte(v) / 255.0f;
  return out;
}

}  // namespace msic
