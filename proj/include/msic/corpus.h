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

#ifndef MSIC_CORPUS_H_
#define MSIC_CORPUS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "msic/tensor.h"

namespace msic {

struct CorpusImage {
  std::string name;  // file name, or a generated label
  Tensor pixels;
};

// Synthetic scene: smooth color gradient, a few flat rectangles and discs,
// light noise; already rounded to 8 bits. Depends only on (seed, h, w).
Tensor make_toy_image(int height, int width, uint64_t seed);
// Images named "toy_0000.png", ... with seeds derived from `seed`.
std::vector<CorpusImage> make_toy_corpus(int count, int height, int width, uint64_t seed);

// Every *.png in `dir`, sorted by file name. Throws FormatError for a
// missing directory or an unreadable PNG.
std::vector<CorpusImage> load_corpus(const std::string& dir);
void write_corpus(const std::string& dir, const std::vector<CorpusImage>& images);

std::vector<Tensor> pixels_of(const std::vector<CorpusImage>& images);

}  // namespace msic

#endif  // MSIC_CORPUS_H_
