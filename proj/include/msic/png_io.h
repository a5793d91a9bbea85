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

#ifndef MSIC_PNG_IO_H_
#define MSIC_PNG_IO_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "msic/tensor.h"

namespace msic {

// 8-bit RGB PNG <-> (3, H, W) tensor in [0, 1]. Grayscale and palette
// images are expanded to RGB; alpha and 16-bit images are rejected with
// FormatError.
Tensor decode_png(std::span<const uint8_t> bytes);
Tensor read_png(const std::string& path);

// Values are clamped to [0, 1] and rounded to 8 bits. Output bytes depend
// only on the pixel values.
std::vector<uint8_t> encode_png(const Tensor& image);
void write_png(const std::string& path, const Tensor& image);

// Rounds to the nearest 8-bit level, as a PNG round trip would.
Tensor quantize_to_8bit(const Tensor& image);

}  // namespace msic

#endif  // MSIC_PNG_IO_H_
