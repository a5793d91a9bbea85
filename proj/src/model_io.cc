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

#include "msic/model_io.h"

#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "msic/bytes.h"
#include "msic/errors.h"

namespace msic {

std::vector<uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path + "'");
  return std::vector<uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_file(const std::string& path, std::span<const uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write '" + path + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("write failed for '" + path + "'");
}

std::vector<uint8_t> serialize_blob(std::span<const float> values) {
  ByteWriter payload;
  for (float v : values) payload.f32(v);
  ByteWriter w;
  w.raw(std::string_view(kModelMagic, 7));
  w.u16(kModelVersion);
  w.u32(static_cast<uint32_t>(values.size()));
  w.raw(payload.bytes());
  w.u64(fnv1a64(payload.bytes()));
  return w.take();
}

std::vector<float> deserialize_blob(std::span<const uint8_t> bytes, size_t* consumed) {
  ByteReader r(bytes);
  auto magic = r.raw(7);
  if (std::memcmp(magic.data(), kModelMagic, 7) != 0) throw FormatError("bad model blob magic");
  const uint16_t version = r.u16();
  if (version != kModelVersion) {
    throw FormatError("unsupported model blob version " + std::to_string(version));
  }
  const uint32_t count = r.u32();
  if (static_cast<uint64_t>(count) * 4 > r.remaining()) {
    throw CorruptionError("model blob truncated");
  }
  auto payload = r.raw(static_cast<size_t>(count) * 4);
  const uint64_t checksum = r.u64();
  if (checksum != fnv1a64(payload)) throw CorruptionError("model blob checksum mismatch");
  ByteReader pr(payload);
  std::vector<float> values(count);
  for (auto& v : values) v = pr.f32();
  if (consumed != nullptr) *consumed = r.position();
  return values;
}

std::vector<float> flatten_values(const ParameterRefs<float>& params) {
  std::vector<float> flat;
  flat.reserve(total_size(params));
  for (const auto* p : params) flat.insert(flat.end(), p->value.begin(), p->value.end());
  return flat;
}

void unflatten_values(std::span<const float> flat, const ParameterRefs<float>& params) {
  if (flat.size() != total_size(params)) {
    throw ConfigError("parameter count mismatch: blob has " + std::to_string(flat.size()) +
                      ", model expects " + std::to_string(total_size(params)));
  }
  size_t off = 0;
  for (auto* p : params) {
    std::copy(flat.begin() + off, flat.begin() + off + p->size(), p->value.begin());
    off += p->size();
  }
}

std::string format_key_values(const KeyValues& kv) {
  std::string out;
  for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
  return out;
}

KeyValues parse_key_values(std::string_view text) {
  KeyValues kv;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw FormatError("line " + std::to_string(lineno) + ": expected key=value");
    }
    std::string key = line.substr(0, eq);
    if (kv.count(key) != 0) throw FormatError("duplicate key '" + key + "'");
    kv[key] = line.substr(eq + 1);
  }
  return kv;
}

}  // namespace msic
