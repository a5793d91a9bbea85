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

#ifndef MSIC_MODEL_IO_H_
#define MSIC_MODEL_IO_H_

// Flat parameter blob:
//   "MSICMDL" | version u16 | count u32 | count x f32 | fnv1a64(f32 payload) u64
// All integers and floats little-endian.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "msic/tensor.h"

namespace msic {

inline constexpr char kModelMagic[] = "MSICMDL";
inline constexpr uint16_t kModelVersion = 1;

std::vector<uint8_t> serialize_blob(std::span<const float> values);

// Parses a blob at the start of `bytes`; `consumed` receives its length.
std::vector<float> deserialize_blob(std::span<const uint8_t> bytes, size_t* consumed = nullptr);

// Flattens parameter values in declaration order.
std::vector<float> flatten_values(const ParameterRefs<float>& params);
void unflatten_values(std::span<const float> flat, const ParameterRefs<float>& params);

// "key=value" lines, one per entry, sorted by key. Parsing rejects lines
// without '=' and duplicate keys.
using KeyValues = std::map<std::string, std::string>;
std::string format_key_values(const KeyValues& kv);
KeyValues parse_key_values(std::string_view text);

}  // namespace msic

#endif  // MSIC_MODEL_IO_H_
