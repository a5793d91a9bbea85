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

#include <vector>

#include "gtest/gtest.h"
#include "msic/container.h"
#include "msic/errors.h"
#include "msic/tensor.h"

namespace msic {
namespace {

Header example_header() {
  Header h;
  h.original_height = 100;
  h.original_width = 61;
  h.padded_height = 128;
  h.padded_width = 64;
  h.channels = {1, 2, 4, 32};
  h.levels = 7;
  h.blocks = 4;
  h.dropped_blocks = 2;
  h.model_digest = digest_bytes(0x0123456789abcdefULL);
  h.payload_length = 3;
  return h;
}

TEST(ContainerTest, GoldenBytes) {
  const std::vector<uint8_t> payload = {0xaa, 0xbb, 0xcc};
  const std::vector<uint8_t> expected = {
      'M', 'S', 'I', 'C', 1,                           // magic, version
      100, 0, 61, 0, 128, 0, 64, 0,                    // H0, W0, H, W
      4, 1, 2, 4, 32,                                  // M, C(1..M)
      7, 4, 2,                                         // N, K, dropped
      0xef, 0xcd, 0xab, 0x89, 0x67, 0x45, 0x23, 0x01,  // digest
      3, 0, 0, 0,                                      // payload length
      0xaa, 0xbb, 0xcc};
  const auto bytes = write_container(example_header(), payload);
  EXPECT_EQ(bytes, expected);
  EXPECT_EQ(example_header().size(), 33u);
  const auto back = read_container(bytes);
  EXPECT_EQ(back.header, example_header());
  EXPECT_EQ(back.payload, payload);
}

TEST(ContainerTest, EmptyPayloadRoundTrip) {
  Header h = example_header();
  h.payload_length = 0;
  const auto bytes = write_container(h, {});
  EXPECT_EQ(bytes.size(), h.size());
  EXPECT_EQ(read_container(bytes).header, h);
}

TEST(ContainerTest, WrongMagicOrVersion) {
  const std::vector<uint8_t> payload = {1, 2, 3};
  auto bytes = write_container(example_header(), payload);
  auto bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(read_container(bad), FormatError);
  bad = bytes;
  bad[4] = 2;
  EXPECT_THROW(read_container(bad), FormatError);
  EXPECT_THROW(read_container(std::vector<uint8_t>{'M', 'S'}), FormatError);
}

TEST(ContainerTest, TruncationAndTrailingBytes) {
  const std::vector<uint8_t> payload = {1, 2, 3};
  const auto bytes = write_container(example_header(), payload);
  for (size_t n = 4; n < bytes.size(); ++n) {
    std::vector<uint8_t> t(bytes.begin(), bytes.begin() + n);
    EXPECT_THROW(read_container(t), CorruptionError) << "length " << n;
  }
  auto longer = bytes;
  longer.push_back(0);
  EXPECT_THROW(read_container(longer), CorruptionError);
}

TEST(ContainerTest, WriterRefusesInconsistentInput) {
  const std::vector<uint8_t> payload = {1, 2};
  EXPECT_THROW(write_container(example_header(), payload), FormatError);
  Header h = example_header();
  h.padded_height = 120;  // not a multiple of 32
  EXPECT_THROW(write_container(h, std::vector<uint8_t>{1, 2, 3}), FormatError);
  h = example_header();
  h.dropped_blocks = 6;
  EXPECT_THROW(write_container(h, std::vector<uint8_t>{1, 2, 3}), FormatError);
  h = example_header();
  h.original_width = 0;
  EXPECT_THROW(write_container(h, std::vector<uint8_t>{1, 2, 3}), FormatError);
  h = example_header();
  h.levels = 1;
  EXPECT_THROW(write_container(h, std::vector<uint8_t>{1, 2, 3}), FormatError);
}

TEST(ContainerTest, RandomHeadersRoundTrip) {
  Rng rng(1);
  for (int i = 0; i < 2000; ++i) {
    Header h;
    const int m = 1 + uniform_int(rng, 5);
    for (int s = 0; s < m; ++s) h.channels.push_back(static_cast<uint8_t>(uniform_int(rng, 256)));
    h.channels.back() = static_cast<uint8_t>(1 + uniform_int(rng, 255));
    const int mult = 1 << (m + 1);
    h.padded_height = static_cast<uint16_t>(mult * (1 + uniform_int(rng, 65535 / mult)));
    h.padded_width = static_cast<uint16_t>(mult * (1 + uniform_int(rng, 65535 / mult)));
    h.original_height = static_cast<uint16_t>(1 + uniform_int(rng, h.padded_height));
    h.original_width = static_cast<uint16_t>(1 + uniform_int(rng, h.padded_width));
    h.levels = static_cast<uint8_t>(2 + uniform_int(rng, 254));
    h.blocks = static_cast<uint8_t>(2 * uniform_int(rng, 10));
    h.dropped_blocks = static_cast<uint8_t>(2 * uniform_int(rng, h.blocks / 2 + 1));
    h.model_digest = digest_bytes(rng());
    std::vector<uint8_t> payload(uniform_int(rng, 64));
    for (auto& b : payload) b = static_cast<uint8_t>(rng());
    h.payload_length = static_cast<uint32_t>(payload.size());
    const auto back = read_container(write_container(h, payload));
    ASSERT_EQ(back.header, h);
    ASSERT_EQ(back.payload, payload);
  }
}

TEST(ContainerTest, FuzzNeverCrashes) {
  Rng rng(2);
  const std::vector<uint8_t> payload = {9, 8, 7};
  const auto good = write_container(example_header(), payload);
  int accepted = 0;
  for (int i = 0; i < 100000; ++i) {
    std::vector<uint8_t> bytes;
    if (i % 2 == 0) {
      bytes = good;
      const int flips = 1 + uniform_int(rng, 4);
      for (int f = 0; f < flips; ++f) {
        bytes[uniform_int(rng, static_cast<int>(bytes.size()))] = static_cast<uint8_t>(rng());
      }
      if (uniform01(rng) < 0.3) bytes.resize(uniform_int(rng, static_cast<int>(bytes.size()) + 1));
    } else {
      bytes.resize(uniform_int(rng, 64));
      for (auto& b : bytes) b = static_cast<uint8_t>(rng());
      if (bytes.size() >= 4 && uniform01(rng) < 0.5) std::copy(good.begin(), good.begin() + 5, bytes.begin());
    }
    try {
      const auto c = read_container(bytes);
      ASSERT_EQ(c.payload.size(), c.header.payload_length);
      ASSERT_EQ(c.header.size() + c.payload.size(), bytes.size());
      ++accepted;
    } catch (const FormatError&) {
    }
  }
  EXPECT_GT(accepted, 0);
}

}  // namespace
}  // namespace msic
