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

#ifndef MSIC_CONTAINER_H_
#define MSIC_CONTAINER_H_

// Compressed image file:
//   "MSIC" | version u8 | H0 u16 | W0 u16 | H u16 | W u16 | M u8 |
//   C(1)..C(M) u8 | N u8 | K u8 | dropped u8 | model digest 8 bytes |
//   payload length u32 | payload
// All integers little-endian. See docs/format.md.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace msic {

inline constexpr std::array<uint8_t, 4> kContainerMagic = {'M', 'S', 'I', 'C'};
inline constexpr uint8_t kContainerVersion = 1;

struct Header {
  uint8_t version = kContainerVersion;
  uint16_t original_height = 0;
  uint16_t original_width = 0;
  uint16_t padded_height = 0;
  uint16_t padded_width = 0;
  std::vector<uint8_t> channels;  // C(1)..C(M)
  uint8_t levels = 0;             // N
  uint8_t blocks = 0;             // K of the trained coder
  uint8_t dropped_blocks = 0;
  std::array<uint8_t, 8> model_digest{};
  uint32_t payload_length = 0;

  int scales() const { return static_cast<int>(channels.size()); }
  // Encoded header size: 29 + M.
  size_t size() const { return 29 + channels.size(); }
  // Throws FormatError when the fields are inconsistent.
  void validate() const;
  bool operator==(const Header&) const = default;
};

struct CompressedImage {
  Header header;
  std::vector<uint8_t> payload;
  bool operator==(const CompressedImage&) const = default;
};

// Refuses (FormatError) an invalid header or a payload whose size differs
// from header.payload_length.
std::vector<uint8_t> write_container(const Header& header, std::span<const uint8_t> payload);
// FormatError on bad magic/version/fields, CorruptionError on truncation or
// trailing bytes.
CompressedImage read_container(std::span<const uint8_t> bytes);

std::array<uint8_t, 8> digest_bytes(uint64_t digest);

}  // namespace msic

#endif  // MSIC_CONTAINER_H_
