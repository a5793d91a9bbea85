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

#ifndef MSIC_CODEC_H_
#define MSIC_CODEC_H_

// End-to-end image codec: model files, compression to containers and
// decompression back to images.
//
// Model file: text header then a parameter blob.
//   MSIC-MODEL
//   key=value lines (stage, autoencoder and coder configuration)
//   end
//   blob: autoencoder parameters, batch-norm statistics, and for a full
//         model the context-model parameters and histogram counts.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "msic/autoencoder.h"
#include "msic/container.h"
#include "msic/lossless_coder.h"

namespace msic {

struct Model {
  Autoencoder<float> ae;
  std::optional<CoderConfig> coder;
  std::optional<ContextModel<float>> context;
  BaseHistogram histogram;

  explicit Model(const CodecConfig& config) : ae(config) {}
  const CodecConfig& config() const { return ae.config(); }
  bool has_coder() const { return context.has_value(); }
  // Attaches a coder (replacing any previous one).
  void set_coder(const CoderConfig& cfg, ContextModel<float> model, BaseHistogram hist);
};

std::vector<uint8_t> serialize_model(const Model& model);
Model deserialize_model(std::span<const uint8_t> bytes);
Model load_model(const std::string& path);
void save_model(const std::string& path, const Model& model);
// FNV-1a64 of the serialized model; stored in every container.
uint64_t model_digest(const Model& model);

// Optimizer state for resuming training of one stage.
struct TrainState {
  std::string stage;  // "ae" or "coder"
  int64_t completed = 0;
  AdamState<float> adam;
};
std::vector<uint8_t> serialize_train_state(const TrainState& state);
TrainState deserialize_train_state(std::span<const uint8_t> bytes);

struct CompressOptions {
  int drop_blocks = 0;
};

struct CompressResult {
  std::vector<uint8_t> bytes;  // whole container
  QuantizedFeatures features;
  CodingStats stats;
};

// Image dims are padded to a multiple of this before analysis.
int padding_multiple(const Model& model);

// Needs a model with a coder. Image dims must be at most 65535.
CompressResult compress(const Model& model, const Tensor& image, const CompressOptions& options = {});

struct DecompressResult {
  Tensor image;  // cropped to the original dims
  QuantizedFeatures features;
  CodingStats stats;
};

// ModelMismatchError when the container was made with another model,
// FormatError/CorruptionError for malformed data.
DecompressResult decompress(const Model& model, std::span<const uint8_t> bytes);

// In-process synthesize(quantize(analyze(x))) with the same padding/crop.
Tensor reconstruct_direct(const Model& model, const Tensor& image);
QuantizedFeatures analyze_and_quantize(const Model& model, const Tensor& image);

}  // namespace msic

#endif  // MSIC_CODEC_H_
