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

#include "msic/lossless_coder.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "msic/errors.h"

namespace msic {
namespace {

uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Softmax over the N logits of channel c at (y, x), in double precision.
template <typename T>
void softmax_at(const BasicTensor<T>& logits, int c, int levels, int y, int x,
                std::vector<double>& p) {
  p.resize(levels);
  double mx = -1e300;
  for (int k = 0; k < levels; ++k) mx = std::max(mx, static_cast<double>(logits.at(c * levels + k, y, x)));
  double sum = 0;
  for (int k = 0; k < levels; ++k) {
    p[k] = std::exp(static_cast<double>(logits.at(c * levels + k, y, x)) - mx);
    sum += p[k];
  }
  for (auto& v : p) v /= sum;
}

void check_compatible(const IntegratedFeatureMap& map, const ContextModel<float>& model,
                      const BaseHistogram& hist, const GridSchedule& schedule) {
  if (map.height() != schedule.height || map.width() != schedule.width) {
    throw ConfigError("feature map " + std::to_string(map.height()) + "x" +
                      std::to_string(map.width()) + " does not match the schedule " +
                      std::to_string(schedule.height) + "x" + std::to_string(schedule.width));
  }
  if (model.channels() != map.channels() || hist.channels() != map.channels()) {
    throw ConfigError("coder channel count does not match the features");
  }
  if (model.levels() != hist.levels()) throw ConfigError("model/histogram level mismatch");
  if (model.blocks() != schedule.blocks()) {
    throw ConfigError("context model has " + std::to_string(model.blocks()) +
                      " step networks, schedule has " + std::to_string(schedule.blocks()) + " steps");
  }
}

// Walks every coded symbol in the global (group, row, column, channel) order.
// `table_for_step` is called once per step before its symbols; `visit`
// receives (channel, position, table).
template <typename StepFn, typename VisitFn>
void walk(IntegratedFeatureMap& map, const ContextModel<float>& model, const BaseHistogram& hist,
          const GridSchedule& schedule, CodingStats* stats, StepFn&& on_step, VisitFn&& visit) {
  const int levels = model.levels();
  for (const Position& p : schedule.seed) {
    for (int c = 0; c < map.channels(); ++c) {
      if (map.owns(c, p)) visit(c, p, hist.table(c));
    }
  }
  std::vector<double> probs;
  for (int k = 0; k < schedule.blocks(); ++k) {
    on_step(k);
    const auto input = step_input<float>(map, schedule, k, levels);
    const auto logits = model.forward(k, input);
    if (stats != nullptr) ++stats->model_evaluations;
    for (const Position& p : schedule.steps[k].targets) {
      for (int c = 0; c < map.channels(); ++c) {
        if (!map.owns(c, p)) continue;
        softmax_at(logits, c, levels, p.y, p.x, probs);
        visit(c, p, quantize_probs(probs));
      }
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Integration

IntegratedFeatureMap empty_integrated_map(const std::vector<int>& channels, int height, int width) {
  IntegratedFeatureMap m;
  int total = 0;
  for (size_t i = 0; i < channels.size(); ++i) {
    for (int c = 0; c < channels[i]; ++c) {
      m.channel_scale.push_back(static_cast<int>(i));
      m.ownership_stride.push_back(1 << i);
    }
    total += channels[i];
  }
  m.grid = BasicTensor<int>(total, height, width);
  return m;
}

IntegratedFeatureMap integrate(const QuantizedFeatures& features) {
  if (features.maps.empty()) throw ConfigError("integrate: no scales");
  const int h = features.maps[0].height(), w = features.maps[0].width();
  std::vector<int> channels;
  for (size_t i = 0; i < features.maps.size(); ++i) {
    const auto& m = features.maps[i];
    if (m.height() * (1 << i) != h || m.width() * (1 << i) != w) {
      throw ConfigError("integrate: scale " + std::to_string(i) + " does not halve the previous one");
    }
    channels.push_back(m.channels());
  }
  IntegratedFeatureMap out = empty_integrated_map(channels, h, w);
  int base = 0;
  for (size_t i = 0; i < features.maps.size(); ++i) {
    const auto up = unpool_nearest(features.maps[i], 1 << i);
    std::copy(up.storage().begin(), up.storage().end(),
              out.grid.storage().begin() + static_cast<ptrdiff_t>(base * out.grid.plane_size()));
    base += channels[i];
  }
  return out;
}

QuantizedFeatures separate(const IntegratedFeatureMap& map, const std::vector<int>& channels) {
  QuantizedFeatures q;
  int base = 0;
  for (size_t i = 0; i < channels.size(); ++i) {
    const int f = 1 << i;
    BasicTensor<int> t(channels[i], map.height() / f, map.width() / f);
    for (int c = 0; c < channels[i]; ++c) {
      for (int y = 0; y < t.height(); ++y) {
        for (int x = 0; x < t.width(); ++x) t.at(c, y, x) = map.grid.at(base + c, y * f, x * f);
      }
    }
    base += channels[i];
    q.maps.push_back(std::move(t));
  }
  return q;
}

// ---------------------------------------------------------------------------
// Schedule

GridSchedule build_schedule(int height, int width, int blocks) {
  if (blocks < 0 || blocks % 2 != 0) throw ConfigError("K must be a nonnegative even number");
  if (blocks > 28) throw ConfigError("K too large");
  if (height < 1 || width < 1) throw ConfigError("schedule needs a non-empty grid");
  const int s0 = 1 << (blocks / 2);
  if (height % s0 != 0 || width % s0 != 0) {
    throw ConfigError("feature grid " + std::to_string(height) + "x" + std::to_string(width) +
                      " must be padded to a multiple of " + std::to_string(s0) + " for K=" +
                      std::to_string(blocks));
  }
  GridSchedule g;
  g.height = height;
  g.width = width;
  g.base_stride = s0;
  g.order.assign(static_cast<size_t>(height) * width, -1);
  for (int y = 0; y < height; y += s0) {
    for (int x = 0; x < width; x += s0) {
      g.seed.push_back({y, x});
      g.order[static_cast<size_t>(y) * width + x] = 0;
    }
  }
  for (int s = s0; s > 1; s /= 2) {
    const int h = s / 2;
    for (StepKind kind : {StepKind::kDiagonalCenters, StepKind::kAxisMidpoints}) {
      ScheduleStep step;
      step.kind = kind;
      step.stride = s;
      for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
          const int ry = y % s, rx = x % s;
          const bool hit = kind == StepKind::kDiagonalCenters
                               ? (ry == h && rx == h)
                               : ((ry == 0 && rx == h) || (ry == h && rx == 0));
          if (!hit) continue;
          step.targets.push_back({y, x});
          g.order[static_cast<size_t>(y) * width + x] = static_cast<int>(g.steps.size()) + 1;
        }
      }
      g.steps.push_back(std::move(step));
    }
  }
  return g;
}

std::vector<Position> GridSchedule::conditioning(int step, Position t) const {
  const auto& st = steps.at(step);
  const int h = st.stride / 2;
  std::vector<Position> cand;
  if (st.kind == StepKind::kDiagonalCenters) {
    cand = {{t.y - h, t.x - h}, {t.y - h, t.x + h}, {t.y + h, t.x - h}, {t.y + h, t.x + h}};
  } else {
    cand = {{t.y - h, t.x}, {t.y, t.x - h}, {t.y, t.x + h}, {t.y + h, t.x}};
  }
  std::vector<Position> out;
  for (const auto& p : cand) {
    if (p.y >= 0 && p.y < height && p.x >= 0 && p.x < width) out.push_back(p);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Context model

void CoderConfig::validate() const {
  if (blocks < 0 || blocks % 2 != 0) throw ConfigError("K must be a nonnegative even number");
  if (width < 1) throw ConfigError("coder width must be >= 1");
}

void CoderConfig::to_key_values(KeyValues& kv) const {
  kv["K"] = std::to_string(blocks);
  kv["coder_width"] = std::to_string(width);
}

CoderConfig CoderConfig::from_key_values(const KeyValues& kv) {
  CoderConfig c;
  try {
    if (auto it = kv.find("K"); it != kv.end()) c.blocks = std::stoi(it->second);
    if (auto it = kv.find("coder_width"); it != kv.end()) c.width = std::stoi(it->second);
  } catch (const std::exception&) {
    throw FormatError("bad coder configuration value");
  }
  c.validate();
  return c;
}

template <typename T>
ContextModel<T>::ContextModel(int channels, int levels, int blocks, int width)
    : channels_(channels), levels_(levels), width_(width) {
  if (channels < 1) throw ConfigError("context model needs at least one channel");
  if (levels < 2) throw ConfigError("context model needs N >= 2");
  if (blocks < 0) throw ConfigError("negative block count");
  for (int k = 0; k < blocks; ++k) {
    Layers l;
    const std::string p = "coder.step" + std::to_string(k) + ".conv";
    l.convs.emplace_back(p + "0", ConvSpec{channels + 1, width, 3, 1, 1});
    l.convs.emplace_back(p + "1", ConvSpec{width, width, 3, 1, 1});
    l.convs.emplace_back(p + "2", ConvSpec{width, width, 3, 1, 1});
    l.convs.emplace_back(p + "3", ConvSpec{width, channels * levels, 3, 1, 1});
    steps_.push_back(std::move(l));
  }
}

template <typename T>
ContextModel<T>::ContextModel(const ContextModel& o)
    : channels_(o.channels_), levels_(o.levels_), width_(o.width_), steps_(o.steps_) {}

template <typename T>
ContextModel<T>& ContextModel<T>::operator=(const ContextModel& o) {
  channels_ = o.channels_;
  levels_ = o.levels_;
  width_ = o.width_;
  steps_ = o.steps_;
  evaluations_.store(0);
  return *this;
}

template <typename T>
void ContextModel<T>::init(uint64_t seed) {
  Rng rng(seed);
  for (auto& s : steps_) {
    for (auto& c : s.convs) c.init(rng);
  }
}

template <typename T>
ParameterRefs<T> ContextModel<T>::parameters() {
  ParameterRefs<T> p;
  for (auto& s : steps_) {
    for (auto& c : s.convs) {
      p.push_back(&c.weight);
      p.push_back(&c.bias);
    }
  }
  return p;
}

template <typename T>
void ContextModel<T>::zero_output_layers() {
  for (auto& s : steps_) {
    auto& last = s.convs.back();
    std::fill(last.weight.value.begin(), last.weight.value.end(), T(0));
    std::fill(last.bias.value.begin(), last.bias.value.end(), T(0));
  }
}

template <typename T>
void ContextModel<T>::init_output_prior(const std::vector<std::vector<double>>& prior) {
  if (prior.size() != static_cast<size_t>(channels_)) throw ConfigError("prior channel mismatch");
  zero_output_layers();
  for (auto& s : steps_) {
    auto& bias = s.convs.back().bias.value;
    for (int c = 0; c < channels_; ++c) {
      if (prior[c].size() != static_cast<size_t>(levels_)) throw ConfigError("prior level mismatch");
      for (int k = 0; k < levels_; ++k) {
        bias[c * levels_ + k] = static_cast<T>(std::log(std::max(prior[c][k], 1e-12)));
      }
    }
  }
}

template <typename T>
BasicTensor<T> ContextModel<T>::forward(int step, const BasicTensor<T>& input) const {
  if (step < 0 || step >= blocks()) throw ConfigError("context model: step out of range");
  evaluations_.fetch_add(1);
  const auto& convs = steps_[step].convs;
  BasicTensor<T> a = input;
  for (size_t l = 0; l < convs.size(); ++l) {
    a = convs[l].forward(a);
    if (l + 1 < convs.size()) a = leaky_relu(a, T(kLeakySlope));
  }
  return a;
}

template <typename T>
ContextModel<T> ContextModel<T>::without_first_steps(int n) const {
  if (n < 0 || n > blocks()) throw ConfigError("cannot drop " + std::to_string(n) + " blocks");
  ContextModel out(channels_, levels_, 0, width_);
  out.steps_.assign(steps_.begin() + n, steps_.end());
  return out;
}

template <typename T>
template <typename U>
ContextModel<U> ContextModel<T>::converted() const {
  ContextModel<U> out(channels_, levels_, blocks(), width_);
  auto src = const_cast<ContextModel<T>*>(this)->parameters();
  copy_values<U, T>(src, out.parameters());
  return out;
}

template <typename T>
double ContextModel<T>::step_loss(int step, const IntegratedFeatureMap& map,
                                  const GridSchedule& schedule, bool backward, double weight) {
  auto& convs = steps_.at(step).convs;
  const size_t hidden = convs.size() - 1;
  const T slope = T(kLeakySlope);
  std::vector<BasicTensor<T>> ins(hidden), pres(hidden);
  BasicTensor<T> a = step_input<T>(map, schedule, step, levels_);
  for (size_t l = 0; l < hidden; ++l) {
    ins[l] = std::move(a);
    pres[l] = convs[l].forward(ins[l]);
    a = leaky_relu(pres[l], slope);
  }
  // The output layer is only evaluated (and differentiated) at the logits
  // that carry a loss: owned channels of this step's targets.
  auto& out = convs.back();
  const int in_c = out.spec.in_channels, h = a.height(), w = a.width();
  BasicTensor<T> g_a;
  if (backward) g_a = BasicTensor<T>(in_c, h, w);
  std::vector<T> patch(static_cast<size_t>(in_c) * 9), g_patch(patch.size());
  std::vector<double> logits(levels_), p;
  const double inv_ln2 = 1.0 / std::numbers::ln2;
  double bits = 0;
  for (const Position& t : schedule.steps[step].targets) {
    for (int ci = 0; ci < in_c; ++ci) {
      for (int ky = 0; ky < 3; ++ky) {
        for (int kx = 0; kx < 3; ++kx) {
          const int y = t.y + ky - 1, x = t.x + kx - 1;
          patch[ci * 9 + ky * 3 + kx] = (y >= 0 && y < h && x >= 0 && x < w) ? a.at(ci, y, x) : T(0);
        }
      }
    }
    if (backward) std::fill(g_patch.begin(), g_patch.end(), T(0));
    for (int c = 0; c < channels_; ++c) {
      if (!map.owns(c, t)) continue;
      for (int k = 0; k < levels_; ++k) {
        const int o = c * levels_ + k;
        const T* wrow = out.weight.value.data() + static_cast<size_t>(o) * patch.size();
        T acc = out.bias.value[o];
        for (size_t j = 0; j < patch.size(); ++j) acc += wrow[j] * patch[j];
        logits[k] = acc;
      }
      const double mx = *std::max_element(logits.begin(), logits.end());
      double sum = 0;
      p.resize(levels_);
      for (int k = 0; k < levels_; ++k) sum += (p[k] = std::exp(logits[k] - mx));
      for (auto& v : p) v /= sum;
      const int label = map.grid.at(c, t.y, t.x);
      bits -= std::log2(std::max(p[label], 1e-300));
      if (!backward) continue;
      for (int k = 0; k < levels_; ++k) {
        const int o = c * levels_ + k;
        const T g = static_cast<T>(weight * inv_ln2 * (p[k] - (k == label ? 1.0 : 0.0)));
        out.bias.grad[o] += g;
        T* grow = out.weight.grad.data() + static_cast<size_t>(o) * patch.size();
        const T* wrow = out.weight.value.data() + static_cast<size_t>(o) * patch.size();
        for (size_t j = 0; j < patch.size(); ++j) {
          grow[j] += g * patch[j];
          g_patch[j] += g * wrow[j];
        }
      }
    }
    if (!backward) continue;
    for (int ci = 0; ci < in_c; ++ci) {
      for (int ky = 0; ky < 3; ++ky) {
        for (int kx = 0; kx < 3; ++kx) {
          const int y = t.y + ky - 1, x = t.x + kx - 1;
          if (y >= 0 && y < h && x >= 0 && x < w) g_a.at(ci, y, x) += g_patch[ci * 9 + ky * 3 + kx];
        }
      }
    }
  }
  if (!backward) return bits;
  BasicTensor<T> g = std::move(g_a);
  for (size_t l = hidden; l-- > 0;) {
    leaky_relu_backward(pres[l], slope, g);
    BasicTensor<T> g_in;
    convs[l].backward(ins[l], g, l > 0 ? &g_in : nullptr);
    g = std::move(g_in);
  }
  return bits;
}

template <typename T>
BasicTensor<T> step_input(const IntegratedFeatureMap& map, const GridSchedule& schedule,
                          int step, int levels) {
  const int c_total = map.channels();
  BasicTensor<T> in(c_total + 1, map.height(), map.width());
  const T inv = T(1.0 / levels);
  for (int c = 0; c < c_total; ++c) {
    for (int y = 0; y < map.height(); ++y) {
      for (int x = 0; x < map.width(); ++x) {
        const Position o = map.owner(c, {y, x});
        if (schedule.order_at(o) <= step) {
          in.at(c, y, x) = T(map.grid.at(c, o.y, o.x) + 1) * inv;
        }
      }
    }
  }
  for (int y = 0; y < map.height(); ++y) {
    for (int x = 0; x < map.width(); ++x) {
      if (schedule.order_at({y, x}) <= step) in.at(c_total, y, x) = T(1);
    }
  }
  return in;
}

template class ContextModel<float>;
template class ContextModel<double>;
template ContextModel<double> ContextModel<float>::converted<double>() const;
template ContextModel<float> ContextModel<double>::converted<float>() const;
template BasicTensor<float> step_input<float>(const IntegratedFeatureMap&, const GridSchedule&, int, int);
template BasicTensor<double> step_input<double>(const IntegratedFeatureMap&, const GridSchedule&, int, int);

// ---------------------------------------------------------------------------
// Histogram

BaseHistogram::BaseHistogram(int channels, int levels)
    : channels_(channels), levels_(levels), counts_(static_cast<size_t>(channels) * levels, 0.0) {
  rebuild();
}

void BaseHistogram::add(const IntegratedFeatureMap& map) {
  if (map.channels() != channels_) throw ConfigError("histogram channel mismatch");
  for (int c = 0; c < channels_; ++c) {
    const int s = map.ownership_stride[c];
    for (int y = 0; y < map.height(); y += s) {
      for (int x = 0; x < map.width(); x += s) {
        const int v = map.grid.at(c, y, x);
        if (v < 0 || v >= levels_) throw ConfigError("feature level out of range");
        counts_[static_cast<size_t>(c) * levels_ + v] += 1;
      }
    }
  }
  rebuild();
}

void BaseHistogram::add_counts(int channel, std::span<const double> counts) {
  if (channel < 0 || channel >= channels_ || counts.size() != static_cast<size_t>(levels_)) {
    throw ConfigError("histogram counts mismatch");
  }
  for (int k = 0; k < levels_; ++k) counts_[static_cast<size_t>(channel) * levels_ + k] += counts[k];
  rebuild();
}

void BaseHistogram::set_counts(std::vector<double> counts) {
  if (counts.size() != counts_.size()) throw ConfigError("histogram size mismatch");
  for (double v : counts) {
    if (!(v >= 0) || !std::isfinite(v)) throw FormatError("invalid histogram count");
  }
  counts_ = std::move(counts);
  rebuild();
}

std::vector<double> BaseHistogram::probabilities(int channel) const {
  std::vector<double> p(levels_);
  double total = 0;
  for (int k = 0; k < levels_; ++k) {
    p[k] = counts_[static_cast<size_t>(channel) * levels_ + k] + 1.0;
    total += p[k];
  }
  for (auto& v : p) v /= total;
  return p;
}

const ProbTable& BaseHistogram::table(int channel) const { return tables_.at(channel); }

double BaseHistogram::entropy_bits() const {
  double bits = 0, n = 0;
  for (int c = 0; c < channels_; ++c) {
    const auto p = probabilities(c);
    double count = 0;
    for (int k = 0; k < levels_; ++k) count += counts_[static_cast<size_t>(c) * levels_ + k];
    double h = 0;
    for (double v : p) h -= v * std::log2(v);
    bits += h * count;
    n += count;
  }
  return n > 0 ? bits / n : 0.0;
}

void BaseHistogram::rebuild() {
  tables_.clear();
  for (int c = 0; c < channels_; ++c) tables_.push_back(quantize_probs(probabilities(c)));
}

// ---------------------------------------------------------------------------
// Coding

std::vector<ProbTable> step_probabilities(const ContextModel<float>& model,
                                          const IntegratedFeatureMap& known,
                                          const GridSchedule& schedule, int step) {
  const auto input = step_input<float>(known, schedule, step, model.levels());
  const auto logits = model.forward(step, input);
  std::vector<ProbTable> out;
  std::vector<double> probs;
  for (const Position& p : schedule.steps.at(step).targets) {
    for (int c = 0; c < known.channels(); ++c) {
      if (!known.owns(c, p)) continue;
      softmax_at(logits, c, model.levels(), p.y, p.x, probs);
      out.push_back(quantize_probs(probs));
    }
  }
  return out;
}

std::vector<uint8_t> encode_features(const QuantizedFeatures& features,
                                     const ContextModel<float>& model,
                                     const BaseHistogram& histogram,
                                     const GridSchedule& schedule, CodingStats* stats) {
  IntegratedFeatureMap map = integrate(features);
  check_compatible(map, model, histogram, schedule);
  RangeEncoder enc;
  walk(map, model, histogram, schedule, stats, [](int) {},
       [&](int c, Position p, const ProbTable& t) {
         const int v = map.grid.at(c, p.y, p.x);
         if (v < 0 || v >= t.symbols()) throw ConfigError("feature level out of range");
         enc.encode(v, t);
         if (stats != nullptr) {
           ++stats->symbols;
           stats->logprob_bits += t.cost_bits(v);
           if (stats->tables != nullptr) stats->tables->push_back(t);
         }
       });
  return enc.finish();
}

QuantizedFeatures decode_features(std::span<const uint8_t> stream,
                                  const ContextModel<float>& model,
                                  const BaseHistogram& histogram,
                                  const GridSchedule& schedule,
                                  const std::vector<int>& channels, CodingStats* stats) {
  IntegratedFeatureMap map = empty_integrated_map(channels, schedule.height, schedule.width);
  check_compatible(map, model, histogram, schedule);
  RangeDecoder dec(stream);
  walk(map, model, histogram, schedule, stats, [](int) {},
       [&](int c, Position p, const ProbTable& t) {
         const int v = dec.decode(t);
         map.grid.at(c, p.y, p.x) = v;
         if (stats != nullptr) {
           ++stats->symbols;
           stats->logprob_bits += t.cost_bits(v);
           if (stats->tables != nullptr) stats->tables->push_back(t);
         }
       });
  dec.finish();
  return separate(map, channels);
}

double factorized_logprob(const QuantizedFeatures& features, const ContextModel<float>& model,
                          const BaseHistogram& histogram, const GridSchedule& schedule) {
  IntegratedFeatureMap map = integrate(features);
  check_compatible(map, model, histogram, schedule);
  double bits = 0;
  walk(map, model, histogram, schedule, nullptr, [](int) {},
       [&](int c, Position p, const ProbTable& t) { bits += t.cost_bits(map.grid.at(c, p.y, p.x)); });
  return bits;
}

std::pair<GridSchedule, ContextModel<float>> drop_last_blocks(const GridSchedule& schedule,
                                                              const ContextModel<float>& model,
                                                              int n) {
  if (n < 0 || n % 2 != 0) throw ConfigError("dropped block count must be even and nonnegative");
  if (n > schedule.blocks()) throw ConfigError("cannot drop more blocks than the schedule has");
  return {build_schedule(schedule.height, schedule.width, schedule.blocks() - n),
          model.without_first_steps(n)};
}

// ---------------------------------------------------------------------------
// Training

BaseHistogram fit_histogram(const std::vector<QuantizedFeatures>& corpus, int levels) {
  if (corpus.empty()) throw ConfigError("empty feature corpus");
  const IntegratedFeatureMap first = integrate(corpus[0]);
  BaseHistogram h(first.channels(), levels);
  for (const auto& f : corpus) h.add(integrate(f));
  return h;
}

void train_context_model(CoderTrainer& trainer, const std::vector<QuantizedFeatures>& corpus,
                         const CoderTrainSchedule& schedule,
                         const std::function<void(const CoderTrainLogRow&)>& log) {
  if (corpus.empty()) throw ConfigError("empty feature corpus");
  std::vector<IntegratedFeatureMap> maps;
  for (const auto& f : corpus) maps.push_back(integrate(f));
  for (const auto& m : maps) {
    if (m.height() != maps[0].height() || m.width() != maps[0].width()) {
      throw ConfigError("coder training maps must share one size");
    }
  }
  auto& model = trainer.model;
  if (maps[0].channels() != model.channels()) throw ConfigError("coder channel mismatch");
  const GridSchedule grid = build_schedule(maps[0].height(), maps[0].width(), model.blocks());
  std::vector<double> symbols_per_step(model.blocks(), 0);
  for (int k = 0; k < model.blocks(); ++k) {
    for (const auto& t : grid.steps[k].targets) {
      for (int c = 0; c < maps[0].channels(); ++c) symbols_per_step[k] += maps[0].owns(c, t) ? 1 : 0;
    }
  }
  auto params = model.parameters();
  if (trainer.adam.m.size() != params.size()) trainer.adam.init(params);
  trainer.adam.alpha = schedule.learning_rate;
  const int64_t last = schedule.stop_at > 0 ? std::min(schedule.stop_at, schedule.updates)
                                            : schedule.updates;
  for (int64_t t = trainer.completed + 1; t <= last; ++t) {
    Rng rng(mix64(schedule.seed ^ mix64(static_cast<uint64_t>(t) + 0x5151)));
    zero_grads(params);
    double bits = 0, symbols = 0;
    for (int b = 0; b < schedule.batch_size; ++b) {
      const auto& m = maps[uniform_int(rng, static_cast<int>(maps.size()))];
      for (int k = 0; k < model.blocks(); ++k) {
        if (symbols_per_step[k] == 0) continue;
        const double w = 1.0 / (schedule.batch_size * symbols_per_step[k]);
        bits += model.step_loss(k, m, grid, true, w);
        symbols += symbols_per_step[k];
      }
    }
    if (!std::isfinite(bits)) throw NumericError("non-finite context-model loss");
    const double scale = linear_decay_scale(t, schedule.updates, schedule.decay_start);
    adam_step(params, trainer.adam, scale);
    trainer.completed = t;
    if (log) log({t, symbols > 0 ? bits / symbols : 0.0, scale});
  }
}

double cross_entropy_bits(const std::vector<QuantizedFeatures>& data,
                          const ContextModel<float>& model, const BaseHistogram& histogram) {
  double bits = 0, symbols = 0;
  for (const auto& f : data) {
    const IntegratedFeatureMap map = integrate(f);
    const GridSchedule schedule = build_schedule(map.height(), map.width(), model.blocks());
    bits += factorized_logprob(f, model, histogram, schedule);
    for (int c = 0; c < map.channels(); ++c) {
      const int s = map.ownership_stride[c];
      symbols += static_cast<double>(((map.height() + s - 1) / s) * ((map.width() + s - 1) / s));
    }
  }
  return symbols > 0 ? bits / symbols : 0.0;
}

}  // namespace msic
