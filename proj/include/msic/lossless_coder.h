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

#ifndef MSIC_LOSSLESS_CODER_H_
#define MSIC_LOSSLESS_CODER_H_

// Parallel coarse-to-fine conditional coding of quantized multi-scale
// features.
//
// All scales are unpooled to the finest quantized resolution and stacked
// into one integrated map. A channel that came from scale i is constant over
// 2^i x 2^i blocks and is coded once, at the block's top-left "owner".
// Positions are coded in K + 1 groups: a seed grid of stride 2^(K/2) under a
// per-channel histogram, then K steps in pairs (diagonal centers, then axis
// midpoints), each pair halving the stride. All targets of one step are
// conditionally independent given earlier groups, so each step needs one
// context-model evaluation over the whole map.

#include <atomic>
#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "msic/autoencoder.h"
#include "msic/optim.h"
#include "msic/range_coder.h"
#include "msic/tensor.h"

namespace msic {

struct Position {
  int y = 0;
  int x = 0;
  bool operator==(const Position&) const = default;
};

struct IntegratedFeatureMap {
  BasicTensor<int> grid;              // (C_total, H1, W1)
  std::vector<int> channel_scale;     // origin scale of each channel
  std::vector<int> ownership_stride;  // 2^scale

  int channels() const { return grid.channels(); }
  int height() const { return grid.height(); }
  int width() const { return grid.width(); }
  Position owner(int c, Position p) const {
    const int s = ownership_stride[c];
    return {p.y - p.y % s, p.x - p.x % s};
  }
  bool owns(int c, Position p) const {
    const int s = ownership_stride[c];
    return p.y % s == 0 && p.x % s == 0;
  }
};

// Unpools every scale to the finest resolution and concatenates channels.
IntegratedFeatureMap integrate(const QuantizedFeatures& features);
// Owner-position layout for the given per-scale channel counts and dims.
IntegratedFeatureMap empty_integrated_map(const std::vector<int>& channels, int height, int width);
// Inverse of integrate: reads each channel at its owner positions.
QuantizedFeatures separate(const IntegratedFeatureMap& map, const std::vector<int>& channels);

enum class StepKind { kDiagonalCenters, kAxisMidpoints };

struct ScheduleStep {
  StepKind kind = StepKind::kDiagonalCenters;
  int stride = 2;                 // grid pitch before this step's pair completes
  std::vector<Position> targets;  // raster order
};

struct GridSchedule {
  int height = 0;
  int width = 0;
  int base_stride = 1;          // 2^(K/2)
  std::vector<Position> seed;   // v(1), raster order
  std::vector<ScheduleStep> steps;
  std::vector<int> order;       // per position: 0 for seed, k + 1 for step k

  int blocks() const { return static_cast<int>(steps.size()); }
  int order_at(Position p) const { return order[static_cast<size_t>(p.y) * width + p.x]; }
  // Neighbors a target of `step` is conditioned on in the grid pattern
  // (diagonal corners or axis neighbors at half the step stride), clipped to
  // the map. All of them precede the step.
  std::vector<Position> conditioning(int step, Position target) const;
};

// K must be even; H and W must be multiples of 2^(K/2).
GridSchedule build_schedule(int height, int width, int blocks);

struct CoderConfig {
  int blocks = 4;  // K
  int width = 16;  // hidden channels of each step network

  void validate() const;
  void to_key_values(KeyValues& kv) const;
  static CoderConfig from_key_values(const KeyValues& kv);
};

// One 4-layer CNN per step. Input: one value channel per feature channel,
// (level + 1) / N where known and 0 elsewhere, plus a mask channel marking
// positions decoded so far. Output: N logits per feature channel.
template <typename T>
class ContextModel {
 public:
  ContextModel(int channels, int levels, int blocks, int width);
  ContextModel(const ContextModel& o);
  ContextModel& operator=(const ContextModel& o);

  int channels() const { return channels_; }
  int levels() const { return levels_; }
  int blocks() const { return static_cast<int>(steps_.size()); }
  int width() const { return width_; }

  void init(uint64_t seed);
  ParameterRefs<T> parameters();
  // Zeroes every step's output layer (all tables become uniform).
  void zero_output_layers();
  // Zeroes output weights and sets output biases to log prior(c, k), so
  // every step starts out predicting the prior.
  void init_output_prior(const std::vector<std::vector<double>>& prior);

  // Logits (C * N, H, W) for `step`; increments the evaluation counter.
  BasicTensor<T> forward(int step, const BasicTensor<T>& input) const;

  // Copy with the first n step networks removed.
  ContextModel without_first_steps(int n) const;

  uint64_t evaluations() const { return evaluations_.load(); }
  void reset_evaluations() { evaluations_.store(0); }

  template <typename U>
  ContextModel<U> converted() const;

  // Cross-entropy in bits summed over every (target, owned channel) of
  // `step`; with `backward`, accumulates gradients of weight * loss.
  double step_loss(int step, const IntegratedFeatureMap& map, const GridSchedule& schedule,
                   bool backward, double weight = 1.0);

 private:
  template <typename U>
  friend class ContextModel;

  struct Layers {
    std::vector<ConvLayer<T>> convs;
  };

  int channels_;
  int levels_;
  int width_;
  std::vector<Layers> steps_;
  mutable std::atomic<uint64_t> evaluations_{0};
};

// Masked network input for `step` (0-based) of `schedule`.
template <typename T>
BasicTensor<T> step_input(const IntegratedFeatureMap& map, const GridSchedule& schedule,
                          int step, int levels);

// Per-channel histogram with +1 smoothing; position independent.
class BaseHistogram {
 public:
  BaseHistogram() = default;
  BaseHistogram(int channels, int levels);

  void add(const IntegratedFeatureMap& map);
  void add_counts(int channel, std::span<const double> counts);
  std::vector<double> probabilities(int channel) const;
  const ProbTable& table(int channel) const;
  // -sum p log2 p averaged over channels weighted by their counts.
  double entropy_bits() const;

  int channels() const { return channels_; }
  int levels() const { return levels_; }
  const std::vector<double>& counts() const { return counts_; }
  void set_counts(std::vector<double> counts);

 private:
  void rebuild();

  int channels_ = 0;
  int levels_ = 0;
  std::vector<double> counts_;  // channels x levels
  std::vector<ProbTable> tables_;
};

struct CodingStats {
  uint64_t model_evaluations = 0;
  uint64_t symbols = 0;
  double logprob_bits = 0;  // sum of -log2 p over coded symbols
  // Every table used, in coding order (only filled when requested).
  std::vector<ProbTable>* tables = nullptr;
};

// Tables for every (target, owned channel) of `step`, in coding order.
std::vector<ProbTable> step_probabilities(const ContextModel<float>& model,
                                          const IntegratedFeatureMap& known,
                                          const GridSchedule& schedule, int step);

std::vector<uint8_t> encode_features(const QuantizedFeatures& features,
                                     const ContextModel<float>& model,
                                     const BaseHistogram& histogram,
                                     const GridSchedule& schedule,
                                     CodingStats* stats = nullptr);

QuantizedFeatures decode_features(std::span<const uint8_t> stream,
                                  const ContextModel<float>& model,
                                  const BaseHistogram& histogram,
                                  const GridSchedule& schedule,
                                  const std::vector<int>& channels,
                                  CodingStats* stats = nullptr);

// Sum of -log2 p over all coded symbols, without producing a stream.
double factorized_logprob(const QuantizedFeatures& features, const ContextModel<float>& model,
                          const BaseHistogram& histogram, const GridSchedule& schedule);

// Drops the n coarsest steps: the seed grid becomes 2^((K - n)/2) and is
// coded by the histogram; the remaining step networks are kept as they are.
std::pair<GridSchedule, ContextModel<float>> drop_last_blocks(const GridSchedule& schedule,
                                                              const ContextModel<float>& model,
                                                              int n = 2);

struct CoderTrainSchedule {
  int64_t updates = 2000;
  int batch_size = 6;
  double learning_rate = 1e-3;
  double decay_start = 0.75;
  uint64_t seed = 0;
  int64_t stop_at = 0;  // stop after this update (0: run to the end)
};

struct CoderTrainLogRow {
  int64_t update = 0;
  double loss_bits = 0;  // mean bits per coded step symbol in the batch
  double lr_scale = 0;
};

struct CoderTrainer {
  ContextModel<float> model;
  AdamState<float> adam;
  int64_t completed = 0;

  CoderTrainer(int channels, int levels, const CoderConfig& cfg)
      : model(channels, levels, cfg.blocks, cfg.width) {}
};

// Histogram over every owned element of the corpus.
BaseHistogram fit_histogram(const std::vector<QuantizedFeatures>& corpus, int levels);

// Minimizes per-step cross-entropy on integrated maps of one common size.
void train_context_model(CoderTrainer& trainer, const std::vector<QuantizedFeatures>& corpus,
                         const CoderTrainSchedule& schedule,
                         const std::function<void(const CoderTrainLogRow&)>& log = {});

// Held-out cross-entropy in bits per coded feature element (seed symbols
// under the histogram, step symbols under the model).
double cross_entropy_bits(const std::vector<QuantizedFeatures>& data,
                          const ContextModel<float>& model, const BaseHistogram& histogram);

}  // namespace msic

#endif  // MSIC_LOSSLESS_CODER_H_
