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

#ifndef MSIC_RANGE_CODER_H_
#define MSIC_RANGE_CODER_H_

// Integer-only range coder over 16-bit fixed-point CDFs.
//
// The encoder keeps a 32-bit-window interval [low, low + range) with
// range in [2^24, 2^32]. A symbol with cumulative bounds [c0, c1) narrows it
// to [low + (range*c0 >> 16), low + (range*c1 >> 16)); byte-wise
// renormalization keeps range >= 2^24 and carries propagate through a
// pending-byte counter. Termination writes the single byte needed to pin a
// value whose low 24 bits are zero, so the decoder reads exactly three
// implicit zero bytes past the end of a valid stream.

#include <cstdint>
#include <span>
#include <vector>

namespace msic {

inline constexpr int kProbBits = 16;
inline constexpr uint32_t kProbTotal = 1u << kProbBits;

// cdf has N + 1 entries, strictly increasing from 0 to 2^16.
struct ProbTable {
  std::vector<uint32_t> cdf;

  int symbols() const { return static_cast<int>(cdf.size()) - 1; }
  uint32_t frequency(int s) const { return cdf[s + 1] - cdf[s]; }
  // Throws ConfigError when the invariants do not hold.
  void validate() const;
  // -log2 of the fixed-point probability of `s`.
  double cost_bits(int s) const;

  bool operator==(const ProbTable&) const = default;
};

ProbTable uniform_table(int symbols);

// Largest-remainder apportionment of 2^16 with a floor of one unit per
// symbol. `p` must be nonnegative and sum to 1 within 1e-6.
ProbTable quantize_probs(std::span<const double> p);

class RangeEncoder {
 public:
  void encode(int symbol, const ProbTable& table);
  // Finishes the stream; the encoder must not be used afterwards.
  std::vector<uint8_t> finish();

  uint64_t symbols_encoded() const { return count_; }

 private:
  void shift_low();

  uint64_t low_ = 0;
  uint64_t range_ = uint64_t{1} << 32;
  uint8_t cache_ = 0;
  uint64_t pending_ = 1;  // cache byte plus deferred 0xFF bytes
  bool first_ = true;     // the very first cache byte is always 0 and is dropped
  uint64_t count_ = 0;
  std::vector<uint8_t> out_;
};

class RangeDecoder {
 public:
  explicit RangeDecoder(std::span<const uint8_t> bytes);

  // Throws CorruptionError on impossible code values or over-reads.
  int decode(const ProbTable& table);
  // Verifies the whole stream was consumed exactly.
  void finish() const;

 private:
  uint8_t next_byte();

  std::span<const uint8_t> bytes_;
  size_t pos_ = 0;
  uint64_t range_ = uint64_t{1} << 32;
  uint64_t code_ = 0;
};

std::vector<uint8_t> encode_symbols(std::span<const int> symbols,
                                    std::span<const ProbTable> tables);
std::vector<int> decode_symbols(std::span<const uint8_t> bytes,
                                std::span<const ProbTable> tables);

}  // namespace msic

#endif  // MSIC_RANGE_CODER_H_
