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

#include "msic/container.h"

#include <string>

#include "msic/bytes.h"
#include "msic/errors.h"

namespace msic {

void Header::validate() const {
  if (version != kContainerVersion) {
    throw FormatError("unsupported container version " + std::to_string(version));
  }
  if (original_height == 0 || original_width == 0) throw FormatError("empty image dimensions");
  if (padded_height < original_height || padded_width < original_width) {
    throw FormatError("padded dimensions smaller than the original");
  }
  if (channels.empty()) throw FormatError("container declares no scales");
  if (channels.back() == 0) throw FormatError("coarsest scale has no channels");
  if (levels < 2) throw FormatError("quantization needs at least 2 levels");
  if (blocks % 2 != 0 || dropped_blocks % 2 != 0 || dropped_blocks > blocks) {
    throw FormatError("invalid coder block counts");
  }
  if (channels.size() > 12) throw FormatError("too many scales");
  const int multiple = 1 << (channels.size() + 1);
  if (padded_height % multiple != 0 || padded_width % multiple != 0) {
    throw FormatError("padded dimensions are not a multiple of " + std::to_string(multiple));
  }
}

std::vector<uint8_t> write_container(const Header& header, std::span<const uint8_t> payload) {
  header.validate();
  if (payload.size() != header.payload_length) {
    throw FormatError("payload length field " + std::to_string(header.payload_length) +
                      " does not match payload size " + std::to_string(payload.size()));
  }
  ByteWriter w;
  w.raw(kContainerMagic);
  w.u8(header.version);
  w.u16(header.original_height);
  w.u16(header.original_width);
  w.u16(header.padded_height);
  w.u16(header.padded_width);
  w.u8(static_cast<uint8_t>(header.channels.size()));
  for (uint8_t c : header.channels) w.u8(c);
  w.u8(header.levels);
  w.u8(header.blocks);
  w.u8(header.dropped_blocks);
  w.raw(header.model_digest);
  w.u32(header.payload_length);
  w.raw(payload);
  return w.take();
}

CompressedImage read_container(std::span<const uint8_t> bytes) {
  ByteReader r(bytes);
  if (bytes.size() < kContainerMagic.size()) throw FormatError("file too short for a container");
  const auto magic = r.raw(kContainerMagic.size());
  if (!std::equal(magic.begin(), magic.end(), kContainerMagic.begin())) {
    throw FormatError("not an MSIC container (bad magic)");
  }
  CompressedImage out;
  Header& h = out.header;
  h.version = r.u8();
  if (h.version != kContainerVersion) {
    throw FormatError("unsupported container version " + std::to_string(h.version));
  }
  h.original_height = r.u16();
  h.original_width = r.u16();
  h.padded_height = r.u16();
  h.padded_width = r.u16();
  const uint8_t m = r.u8();
  const auto ch = r.raw(m);
  h.channels.assign(ch.begin(), ch.end());
  h.levels = r.u8();
  h.blocks = r.u8();
  h.dropped_blocks = r.u8();
  const auto digest = r.raw(8);
  std::copy(digest.begin(), digest.end(), h.model_digest.begin());
  h.payload_length = r.u32();
  h.validate();
  if (r.remaining() < h.payload_length) {
    throw CorruptionError("truncated payload: header declares " +
                          std::to_string(h.payload_length) + " bytes, file has " +
                          std::to_string(r.remaining()));
  }
  if (r.remaining() > h.payload_length) throw CorruptionError("trailing bytes after payload");
  const auto payload = r.raw(h.payload_length);
  out.payload.assign(payload.begin(), payload.end());
  return out;
}

std::array<uint8_t, 8> digest_bytes(uint64_t digest) {
  std::array<uint8_t, 8> out{};
  for (int i = 0; i < 8; ++i) out[i] = static_cast<uint8_t>(digest >> (8 * i));
  return out;
}

}  // namespace msic
