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

#ifndef MSIC_AUTOENCODER_H_
#define MSIC_AUTOENCODER_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "msic/metrics.h"
#include "msic/model_io.h"
#include "msic/ops.h"
#include "msic/optim.h"
#include "msic/quantizer.h"
#include "msic/tensor.h"

namespace msic {

// Shape of the multi-scale autoencoder.
struct CodecConfig {
  int scales = 4;                          // M
  std::vector<int> channels = {1, 2, 4, 8};  // C(1)..C(M); zeros allowed below M
  int levels = 7;                          // N
  double u = 4.0;
  double alpha = 0.5;
  int hidden_width = 16;
  int depth = 6;  // trunk conv layers; the first M + 1 downsample by 2

  void validate() const;
  QuantizerConfig quantizer() const { return {u, levels, alpha}; }
  // Spatial reduction of scale i (0-based) relative to the image: 2^(i + 2).
  static int scale_factor(int i) { return 1 << (i + 2); }
  // Image dims must be multiples of this (2^(M + 1)).
  int padding_multiple() const { return 1 << (scales + 1); }
  int total_channels() const;

  // depth 6, M 4, C(4) = 32.
  static CodecConfig full_scale_preset(int levels, std::vector<int> channels);

  void to_key_values(KeyValues& kv) const;
  static CodecConfig from_key_values(const KeyValues& kv);
};

// An RGB image in [0, 1], possibly padded; original dims are kept for cropping.
struct Image {
  Tensor pixels;
  int original_height = 0;
  int original_width = 0;
};

// Reflect-pads bottom/right so both dims are multiples of `multiple`.
Image pad_image(const Tensor& pixels, int multiple);
Tensor crop(const Tensor& pixels, int height, int width);

// Integer levels per scale; scale i has shape (C(i), H / 2^(i+2), W / 2^(i+2)).
struct QuantizedFeatures {
  std::vector<BasicTensor<int>> maps;
  bool operator==(const QuantizedFeatures&) const = default;
};

template <typename T>
using MultiScaleFeatures = std::vector<BasicTensor<T>>;

template <typename T>
struct ConvLayer {
  ConvSpec spec;
  Parameter<T> weight;
  Parameter<T> bias;

  ConvLayer() = default;
  ConvLayer(const std::string& name, ConvSpec s);
  BasicTensor<T> forward(const BasicTensor<T>& in) const {
    return conv2d<T>(in, spec, weight.value, bias.value);
  }
  void backward(const BasicTensor<T>& in, const BasicTensor<T>& grad_out,
                BasicTensor<T>* grad_in) {
    conv2d_backward<T>(in, spec, weight.value, grad_out, grad_in, weight.grad, bias.grad);
  }
  void init(Rng& rng) {
    he_uniform_init(weight, spec.in_channels * spec.size * spec.size, rng);
    std::fill(bias.value.begin(), bias.value.end(), T(0));
  }
};

inline constexpr double kLeakySlope = 0.2;
inline constexpr double kOutputInitScale = 0.1;

// Analyzer F, quantizer taps Q and synthesizer G.
template <typename T>
class Autoencoder {
 public:
  explicit Autoencoder(const CodecConfig& config);

  const CodecConfig& config() const { return config_; }

  void init(uint64_t seed);

  // Trainable parameters in declaration order.
  ParameterRefs<T> parameters();
  // Frozen batch-norm statistics (running mean then variance per tap).
  std::vector<T> bn_statistics() const;
  void set_bn_statistics(std::span<const T> stats);

  // F: pre-normalization tap outputs z(i).
  MultiScaleFeatures<T> analyze(const BasicTensor<T>& image) const;
  // BN (frozen) -> clip -> scale -> round.
  QuantizedFeatures quantize_features(const MultiScaleFeatures<T>& z) const;
  // G, clamped to [0, 1].
  BasicTensor<T> synthesize(const QuantizedFeatures& q) const;
  // synthesize(quantize_features(analyze(x))).
  BasicTensor<T> reconstruct(const BasicTensor<T>& image) const;

  // Mean distortion over the batch. With `backward`, parameter gradients
  // are accumulated for the mean loss. Train mode updates BN statistics.
  double batch_loss(const std::vector<BasicTensor<T>>& batch, Mode bn_mode,
                    QuantMode quant_mode, bool backward,
                    const MsSsimConfig& metric = {});

  template <typename U>
  Autoencoder<U> converted() const;

 private:
  template <typename U>
  friend class Autoencoder;

  struct Stage {
    bool upsample = false;
    int side_scale = -1;  // scale whose quantized map feeds a side conv
    bool activate = true;
    ConvLayer<T> main;
    std::optional<ConvLayer<T>> side;
  };

  int tap_layer(int scale) const;
  BasicTensor<T> synthesize_real(const std::vector<BasicTensor<T>>& q) const;

  CodecConfig config_;
  std::vector<ConvLayer<T>> trunk_;
  std::vector<std::optional<ConvLayer<T>>> heads_;
  std::vector<Parameter<T>> bn_gamma_;
  std::vector<Parameter<T>> bn_beta_;
  std::vector<BatchNormState<T>> bn_;
  std::vector<Stage> stages_;
};

struct TrainSchedule {
  int64_t updates = 2000;
  int batch_size = 8;
  int crop = 32;
  double learning_rate = 1e-3;
  double decay_start = 0.75;
  uint64_t seed = 0;
  int64_t stop_at = 0;  // stop after this update (0: run to the end)
};

struct TrainLogRow {
  int64_t update = 0;
  double loss = 0;
  double lr_scale = 0;
};

// Random crop batch for 1-based update `t`; depends only on (seed, t).
std::vector<Tensor> sample_crops(const std::vector<Tensor>& corpus, int batch, int crop,
                                 uint64_t seed, int64_t t);

// Resumable autoencoder optimization state.
struct AutoencoderTrainer {
  Autoencoder<float> model;
  AdamState<float> adam;
  int64_t completed = 0;

  explicit AutoencoderTrainer(const CodecConfig& cfg) : model(cfg) {}
};

// Runs updates completed+1 .. schedule.updates. Throws NumericError on a
// non-finite loss; the trainer then still holds the last good state.
void train_autoencoder(AutoencoderTrainer& trainer, const std::vector<Tensor>& corpus,
                       const TrainSchedule& schedule,
                       const std::function<void(const TrainLogRow&)>& log = {});

// Mean 1 - MS-SSIM of hard-quantized reconstructions (eval-mode BN).
double evaluate_distortion(const Autoencoder<float>& model, const std::vector<Tensor>& images);

}  // namespace msic

#endif  // MSIC_AUTOENCODER_H_
