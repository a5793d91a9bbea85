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

#include "msic/range_coder.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "msic/errors.h"

namespace msic {
namespace {

constexpr uint64_t kTop = uint64_t{1} << 24;

}  // namespace

void ProbTable::validate() const {
  if (cdf.size() < 2) throw ConfigError("prob table needs at least one symbol");
  if (cdf.front() != 0 || cdf.back() != kProbTotal) {
    throw ConfigError("prob table must span [0, 2^16]");
  }
  for (size_t i = 1; i < cdf.size(); ++i) {
    if (cdf[i] <= cdf[i - 1]) throw ConfigError("prob table must be strictly increasing");
  }
}

double ProbTable::cost_bits(int s) const {
  return static_cast<double>(kProbBits) - std::log2(static_cast<double>(frequency(s)));
}

ProbTable uniform_table(int symbols) {
  std::vector<double> p(symbols, 1.0 / symbols);
  return quantize_probs(p);
}

ProbTable quantize_probs(std::span<const double> p) {
  const int n = static_cast<int>(p.size());
  if (n < 1 || static_cast<uint32_t>(n) > kProbTotal) {
    throw ConfigError("quantize_probs: symbol count out of range");
  }
  double sum = 0;
  for (double v : p) {
    if (!(v >= 0) || !std::isfinite(v)) throw ConfigError("quantize_probs: invalid probability");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-6) {
    throw ConfigError("quantize_probs: probabilities sum to " + std::to_string(sum));
  }
  const uint32_t spare = kProbTotal - static_cast<uint32_t>(n);
  std::vector<uint32_t> freq(n, 1);
  std::vector<double> remainder(n);
  uint64_t assigned = 0;
  for (int i = 0; i < n; ++i) {
    const double ideal = p[i] / sum * spare;
    const double base = std::floor(ideal);
    freq[i] += static_cast<uint32_t>(base);
    assigned += static_cast<uint64_t>(base);
    remainder[i] = ideal - base;
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return remainder[a] > remainder[b]; });
  int64_t deficit = static_cast<int64_t>(spare) - static_cast<int64_t>(assigned);
  for (int i = 0; deficit > 0; i = (i + 1) % n, --deficit) ++freq[order[i]];
  // Rounding can only overshoot by a unit or so; take it back from the largest.
  while (deficit < 0) {
    auto it = std::max_element(freq.begin(), freq.end());
    --*it;
    ++deficit;
  }
  ProbTable t;
  t.cdf.resize(n + 1);
  t.cdf[0] = 0;
  for (int i = 0; i < n; ++i) t.cdf[i + 1] = t.cdf[i] + freq[i];
  return t;
}

void RangeEncoder::shift_low() {
  if (static_cast<uint32_t>(low_) < 0xFF000000u || (low_ >> 32) != 0) {
    const auto carry = static_cast<uint8_t>(low_ >> 32);
    uint8_t byte = cache_;
    do {
      if (first_) {
        first_ = false;  // always zero: the interval never reaches 2^32 at top level
      } else {
        out_.push_back(static_cast<uint8_t>(byte + carry));
      }
      byte = 0xFF;
    } while (--pending_ != 0);
    cache_ = static_cast<uint8_t>(low_ >> 24);
  }
  ++pending_;
  low_ = (low_ & 0x00FFFFFFu) << 8;
}

void RangeEncoder::encode(int symbol, const ProbTable& table) {
  if (symbol < 0 || symbol >= table.symbols()) {
    throw ConfigError("symbol " + std::to_string(symbol) + " outside a table of " +
                      std::to_string(table.symbols()));
  }
  const uint64_t lo = (range_ * table.cdf[symbol]) >> kProbBits;
  const uint64_t hi = (range_ * table.cdf[symbol + 1]) >> kProbBits;
  low_ += lo;
  range_ = hi - lo;
  while (range_ < kTop) {
    range_ <<= 8;
    shift_low();
  }
  ++count_;
}

std::vector<uint8_t> RangeEncoder::finish() {
  // Smallest value in [low, low + range) whose low 24 bits are zero.
  low_ = (low_ + (kTop - 1)) & ~(kTop - 1);
  shift_low();
  shift_low();
  return std::move(out_);
}

RangeDecoder::RangeDecoder(std::span<const uint8_t> bytes) : bytes_(bytes) {
  for (int i = 0; i < 4; ++i) code_ = (code_ << 8) | next_byte();
}

uint8_t RangeDecoder::next_byte() {
  if (pos_ < bytes_.size()) return bytes_[pos_++];
  if (pos_ < bytes_.size() + 3) {
    ++pos_;
    return 0;
  }
  throw CorruptionError("range decoder: stream exhausted");
}

int RangeDecoder::decode(const ProbTable& table) {
  if (code_ >= range_) throw CorruptionError("range decoder: code outside interval");
  // Largest s with bound(s) <= code.
  int lo = 0, hi = table.symbols();
  while (hi - lo > 1) {
    const int mid = (lo + hi) / 2;
    if (((range_ * table.cdf[mid]) >> kProbBits) <= code_) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const uint64_t b0 = (range_ * table.cdf[lo]) >> kProbBits;
  const uint64_t b1 = (range_ * table.cdf[lo + 1]) >> kProbBits;
  code_ -= b0;
  range_ = b1 - b0;
  while (range_ < kTop) {
    range_ <<= 8;
    code_ = (code_ << 8) | next_byte();
  }
  return lo;
}

void RangeDecoder::finish() const {
  if (pos_ != bytes_.size() + 3) {
    throw CorruptionError("range decoder: " + std::to_string(bytes_.size() + 3 - pos_) +
                          " unread bytes at end of stream");
  }
}

std::vector<uint8_t> encode_symbols(std::span<const int> symbols,
                                    std::span<const ProbTable> tables) {
  if (symbols.size() != tables.size()) throw ConfigError("encode_symbols: size mismatch");
  RangeEncoder enc;
  for (size_t i = 0; i < symbols.size(); ++i) {
    if (symbols[i] < 0 || symbols[i] >= tables[i].symbols()) {
      throw ConfigError("encode_symbols: symbol out of range");
    }
    enc.encode(symbols[i], tables[i]);
  }
  return enc.finish();
}

std::vector<int> decode_symbols(std::span<const uint8_t> bytes,
                                std::span<const ProbTable> tables) {
  RangeDecoder dec(bytes);
  std::vector<int> out;
  out.reserve(tables.size());
  for (const auto& t : tables) out.push_back(dec.decode(t));
  dec.finish();
  return out;
}

}  // namespace msic
