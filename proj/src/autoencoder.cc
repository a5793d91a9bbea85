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

#include "msic/autoencoder.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "msic/errors.h"

namespace msic {
namespace {

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw FormatError("bad integer list '" + s + "'");
    }
  }
  return out;
}

template <typename V>
V get_number(const KeyValues& kv, const std::string& key, V fallback) {
  auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  try {
    size_t used = 0;
    V v;
    if constexpr (std::is_floating_point_v<V>) {
      v = static_cast<V>(std::stod(it->second, &used));
    } else {
      v = static_cast<V>(std::stoll(it->second, &used));
    }
    if (used != it->second.size()) throw std::invalid_argument(it->second);
    return v;
  } catch (const std::exception&) {
    throw FormatError("bad value for '" + key + "': '" + it->second + "'");
  }
}

int mirror(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

template <typename T>
BasicTensor<T> clamp01(const BasicTensor<T>& x) {
  BasicTensor<T> y = x;
  for (auto& v : y.storage()) v = std::min(std::max(v, T(0)), T(1));
  return y;
}

}  // namespace

// ---------------------------------------------------------------------------
// CodecConfig

void CodecConfig::validate() const {
  if (scales < 1) throw ConfigError("M must be >= 1");
  if (static_cast<int>(channels.size()) != scales) {
    throw ConfigError("channels list must have M entries");
  }
  for (int c : channels) {
    if (c < 0 || c > 255) throw ConfigError("channel counts must be in [0, 255]");
  }
  if (channels.back() < 1) throw ConfigError("the deepest scale needs at least one channel");
  if (levels < 2 || levels > 255) throw ConfigError("N must be in [2, 255]");
  quantizer().validate();
  if (hidden_width < 1) throw ConfigError("hidden_width must be >= 1");
  if (depth < scales + 1) throw ConfigError("depth must be >= M + 1");
}

int CodecConfig::total_channels() const {
  int n = 0;
  for (int c : channels) n += c;
  return n;
}

CodecConfig CodecConfig::full_scale_preset(int levels, std::vector<int> channels) {
  CodecConfig c;
  c.scales = 4;
  c.depth = 6;
  c.levels = levels;
  c.channels = std::move(channels);
  c.hidden_width = 64;
  if (c.channels.size() != 4 || c.channels[3] != 32) {
    throw ConfigError("full-scale preset needs four scales with 32 channels at the deepest");
  }
  if (levels != 7 && levels != 13) throw ConfigError("full-scale preset uses N = 7 or 13");
  c.validate();
  return c;
}

void CodecConfig::to_key_values(KeyValues& kv) const {
  kv["M"] = std::to_string(scales);
  std::string ch;
  for (size_t i = 0; i < channels.size(); ++i) {
    ch += (i ? "," : "") + std::to_string(channels[i]);
  }
  kv["channels"] = ch;
  kv["N"] = std::to_string(levels);
  std::ostringstream us, as;
  us.precision(17);
  as.precision(17);
  us << u;
  as << alpha;
  kv["u"] = us.str();
  kv["alpha"] = as.str();
  kv["hidden_width"] = std::to_string(hidden_width);
  kv["depth"] = std::to_string(depth);
}

CodecConfig CodecConfig::from_key_values(const KeyValues& kv) {
  CodecConfig c;
  c.scales = get_number<int>(kv, "M", c.scales);
  if (auto it = kv.find("channels"); it != kv.end()) {
    c.channels = parse_int_list(it->second);
  } else if (c.scales != static_cast<int>(c.channels.size())) {
    throw FormatError("config sets M but not channels");
  }
  c.levels = get_number<int>(kv, "N", c.levels);
  c.u = get_number<double>(kv, "u", c.u);
  c.alpha = get_number<double>(kv, "alpha", c.alpha);
  c.hidden_width = get_number<int>(kv, "hidden_width", c.hidden_width);
  c.depth = get_number<int>(kv, "depth", c.depth);
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// Images

Image pad_image(const Tensor& pixels, int multiple) {
  Image img;
  img.original_height = pixels.height();
  img.original_width = pixels.width();
  if (pixels.height() < 1 || pixels.width() < 1) throw ConfigError("empty image");
  const int h = (pixels.height() + multiple - 1) / multiple * multiple;
  const int w = (pixels.width() + multiple - 1) / multiple * multiple;
  img.pixels = Tensor(pixels.channels(), h, w);
  for (int c = 0; c < pixels.channels(); ++c) {
    for (int y = 0; y < h; ++y) {
      const int sy = mirror(y, pixels.height());
      for (int x = 0; x < w; ++x) {
        img.pixels.at(c, y, x) = pixels.at(c, sy, mirror(x, pixels.width()));
      }
    }
  }
  return img;
}

Tensor crop(const Tensor& pixels, int height, int width) {
  if (height > pixels.height() || width > pixels.width()) throw ConfigError("crop larger than image");
  Tensor out(pixels.channels(), height, width);
  for (int c = 0; c < pixels.channels(); ++c) {
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) out.at(c, y, x) = pixels.at(c, y, x);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Autoencoder

template <typename T>
ConvLayer<T>::ConvLayer(const std::string& name, ConvSpec s)
    : spec(s),
      weight(name + ".weight", {s.out_channels, s.in_channels, s.size, s.size}),
      bias(name + ".bias", {s.out_channels}) {}

template <typename T>
Autoencoder<T>::Autoencoder(const CodecConfig& config) : config_(config) {
  config_.validate();
  const int m = config_.scales;
  const int w = config_.hidden_width;
  for (int t = 0; t < config_.depth; ++t) {
    ConvSpec s;
    s.in_channels = t == 0 ? 3 : w;
    s.out_channels = w;
    s.size = t == 0 ? 5 : 3;
    s.pad = s.size / 2;
    s.stride = t <= m ? 2 : 1;
    trunk_.emplace_back("analyzer.conv" + std::to_string(t), s);
  }
  for (int i = 0; i < m; ++i) {
    const int c = config_.channels[i];
    if (c > 0) {
      heads_.emplace_back(ConvLayer<T>("analyzer.tap" + std::to_string(i), {w, c, 3, 1, 1}));
    } else {
      heads_.emplace_back(std::nullopt);
    }
    bn_gamma_.emplace_back("tap" + std::to_string(i) + ".bn_scale", std::vector<int>{c});
    bn_beta_.emplace_back("tap" + std::to_string(i) + ".bn_shift", std::vector<int>{c});
    std::fill(bn_gamma_.back().value.begin(), bn_gamma_.back().value.end(), T(1));
    bn_.emplace_back(c);
  }

  auto add_stage = [&](bool up, int in_ch, int out_ch, int k, int side, bool act) {
    Stage st;
    st.upsample = up;
    st.activate = act;
    st.side_scale = side;
    const std::string name = "synthesizer.stage" + std::to_string(stages_.size());
    st.main = ConvLayer<T>(name, {in_ch, out_ch, k, 1, k / 2});
    if (side >= 0) {
      st.side = ConvLayer<T>(name + ".side", {config_.channels[side], out_ch, 3, 1, 1});
    }
    stages_.push_back(std::move(st));
  };
  add_stage(false, config_.channels[m - 1], w, 3, -1, true);
  for (int e = 0; e < config_.depth - m - 1; ++e) add_stage(false, w, w, 3, -1, true);
  for (int i = m - 2; i >= 0; --i) {
    add_stage(true, w, w, 3, config_.channels[i] > 0 ? i : -1, true);
  }
  add_stage(true, w, w, 3, -1, true);
  add_stage(true, w, 3, 5, -1, false);
}

template <typename T>
void Autoencoder<T>::init(uint64_t seed) {
  Rng rng(seed);
  for (auto& l : trunk_) l.init(rng);
  for (auto& h : heads_) {
    if (h) h->init(rng);
  }
  for (auto& s : stages_) {
    s.main.init(rng);
    if (s.side) {
      s.side->init(rng);
      // The side input is summed with the main path; drop its bias.
      std::fill(s.side->bias.value.begin(), s.side->bias.value.end(), T(0));
    }
  }
  // Start from mid-gray output with a small spread, so few pixels start clamped.
  for (auto& v : stages_.back().main.weight.value) v *= T(kOutputInitScale);
  auto& out_bias = stages_.back().main.bias.value;
  std::fill(out_bias.begin(), out_bias.end(), T(0.5));
  for (size_t i = 0; i < bn_.size(); ++i) {
    bn_[i] = BatchNormState<T>(bn_[i].channels());
    std::fill(bn_gamma_[i].value.begin(), bn_gamma_[i].value.end(), T(1));
    std::fill(bn_beta_[i].value.begin(), bn_beta_[i].value.end(), T(0));
  }
}

template <typename T>
ParameterRefs<T> Autoencoder<T>::parameters() {
  ParameterRefs<T> p;
  for (auto& l : trunk_) {
    p.push_back(&l.weight);
    p.push_back(&l.bias);
  }
  for (size_t i = 0; i < heads_.size(); ++i) {
    if (!heads_[i]) continue;
    p.push_back(&heads_[i]->weight);
    p.push_back(&heads_[i]->bias);
    p.push_back(&bn_gamma_[i]);
    p.push_back(&bn_beta_[i]);
  }
  for (auto& s : stages_) {
    p.push_back(&s.main.weight);
    p.push_back(&s.main.bias);
    if (s.side) p.push_back(&s.side->weight);
  }
  return p;
}

template <typename T>
std::vector<T> Autoencoder<T>::bn_statistics() const {
  std::vector<T> out;
  for (const auto& b : bn_) {
    out.insert(out.end(), b.running_mean.begin(), b.running_mean.end());
    out.insert(out.end(), b.running_var.begin(), b.running_var.end());
  }
  return out;
}

template <typename T>
void Autoencoder<T>::set_bn_statistics(std::span<const T> stats) {
  size_t need = 0;
  for (const auto& b : bn_) need += 2 * b.running_mean.size();
  if (stats.size() != need) throw ConfigError("batch-norm statistics size mismatch");
  size_t off = 0;
  for (auto& b : bn_) {
    for (auto& v : b.running_mean) v = stats[off++];
    for (auto& v : b.running_var) v = stats[off++];
  }
}

template <typename T>
int Autoencoder<T>::tap_layer(int scale) const {
  return scale < config_.scales - 1 ? scale + 1 : config_.depth - 1;
}

template <typename T>
MultiScaleFeatures<T> Autoencoder<T>::analyze(const BasicTensor<T>& image) const {
  if (image.channels() != 3) throw ConfigError("analyze: expected an RGB image");
  const int mult = config_.padding_multiple();
  if (image.height() % mult != 0 || image.width() % mult != 0) {
    throw ConfigError("analyze: image dims must be multiples of " + std::to_string(mult));
  }
  MultiScaleFeatures<T> z(config_.scales);
  BasicTensor<T> a = image;
  for (int t = 0; t < config_.depth; ++t) {
    a = leaky_relu(trunk_[t].forward(a), T(kLeakySlope));
    for (int i = 0; i < config_.scales; ++i) {
      if (tap_layer(i) != t) continue;
      z[i] = heads_[i] ? heads_[i]->forward(a) : BasicTensor<T>(0, a.height(), a.width());
    }
  }
  return z;
}

template <typename T>
QuantizedFeatures Autoencoder<T>::quantize_features(const MultiScaleFeatures<T>& z) const {
  if (static_cast<int>(z.size()) != config_.scales) throw ConfigError("feature scale count mismatch");
  const auto qc = config_.quantizer();
  QuantizedFeatures out;
  for (int i = 0; i < config_.scales; ++i) {
    if (z[i].channels() != config_.channels[i]) throw ConfigError("feature channel mismatch");
    BasicTensor<int> q(z[i].channels(), z[i].height(), z[i].width());
    if (z[i].channels() > 0) {
      BatchNormState<T> frozen = bn_[i];
      auto pre = preprocess<T>({z[i]}, frozen, bn_gamma_[i].value, bn_beta_[i].value, qc, Mode::kEval);
      const auto r = quantize(pre[0], qc, QuantMode::kHard);
      for (size_t k = 0; k < r.size(); ++k) q[k] = static_cast<int>(r[k]);
    }
    out.maps.push_back(std::move(q));
  }
  return out;
}

template <typename T>
BasicTensor<T> Autoencoder<T>::synthesize_real(const std::vector<BasicTensor<T>>& q) const {
  BasicTensor<T> h;
  for (size_t s = 0; s < stages_.size(); ++s) {
    const auto& st = stages_[s];
    BasicTensor<T> in = s == 0 ? q[config_.scales - 1] : (st.upsample ? unpool_nearest(h, 2) : h);
    BasicTensor<T> pre = st.main.forward(in);
    if (st.side) add_inplace(pre, st.side->forward(q[st.side_scale]));
    h = st.activate ? leaky_relu(pre, T(kLeakySlope)) : std::move(pre);
  }
  return clamp01(h);
}

template <typename T>
BasicTensor<T> Autoencoder<T>::synthesize(const QuantizedFeatures& q) const {
  if (static_cast<int>(q.maps.size()) != config_.scales) throw ConfigError("synthesize: scale count mismatch");
  std::vector<BasicTensor<T>> real;
  const auto& deepest = q.maps.back();
  for (int i = 0; i < config_.scales; ++i) {
    const auto& m = q.maps[i];
    const int f = 1 << (config_.scales - 1 - i);
    if (m.channels() != config_.channels[i] || m.height() != deepest.height() * f ||
        m.width() != deepest.width() * f) {
      throw ConfigError("synthesize: feature shape mismatch at scale " + std::to_string(i));
    }
    real.push_back(m.template cast<T>());
  }
  return synthesize_real(real);
}

template <typename T>
BasicTensor<T> Autoencoder<T>::reconstruct(const BasicTensor<T>& image) const {
  return synthesize(quantize_features(analyze(image)));
}

template <typename T>
double Autoencoder<T>::batch_loss(const std::vector<BasicTensor<T>>& batch, Mode bn_mode,
                                  QuantMode quant_mode, bool backward,
                                  const MsSsimConfig& metric) {
  using Batch = std::vector<BasicTensor<T>>;
  const size_t nb = batch.size();
  const int m = config_.scales;
  const int depth = config_.depth;
  const auto qc = config_.quantizer();
  const T slope = T(kLeakySlope);
  if (nb == 0) throw ConfigError("empty batch");

  // Analyzer.
  std::vector<Batch> pre(depth, Batch(nb)), act(depth, Batch(nb));
  for (int t = 0; t < depth; ++t) {
    for (size_t b = 0; b < nb; ++b) {
      const auto& in = t == 0 ? batch[b] : act[t - 1][b];
      if (t == 0) {
        if (in.channels() != 3 || in.height() % config_.padding_multiple() != 0 ||
            in.width() % config_.padding_multiple() != 0) {
          throw ConfigError("batch_loss: bad input shape");
        }
      }
      pre[t][b] = trunk_[t].forward(in);
      act[t][b] = leaky_relu(pre[t][b], slope);
    }
  }

  // Taps.
  std::vector<Batch> z(m), bn_out(m), scaled(m), q(m, Batch(nb));
  std::vector<BatchNormCache<T>> bn_cache(m);
  for (int i = 0; i < m; ++i) {
    const auto& src = act[tap_layer(i)];
    if (!heads_[i]) {
      for (size_t b = 0; b < nb; ++b) q[i][b] = BasicTensor<T>(0, src[b].height(), src[b].width());
      continue;
    }
    z[i].resize(nb);
    for (size_t b = 0; b < nb; ++b) z[i][b] = heads_[i]->forward(src[b]);
    bn_out[i] = batchnorm<T>(z[i], bn_[i], bn_gamma_[i].value, bn_beta_[i].value, bn_mode, &bn_cache[i]);
    scaled[i].resize(nb);
    for (size_t b = 0; b < nb; ++b) {
      scaled[i][b] = clip_and_scale(bn_out[i][b], qc);
      q[i][b] = quantize(scaled[i][b], qc, quant_mode);
    }
  }

  // Synthesizer and loss, one image at a time.
  const size_t ns = stages_.size();
  std::vector<Batch> g_q(m, Batch(nb));
  double total = 0;
  for (size_t b = 0; b < nb; ++b) {
    std::vector<BasicTensor<T>> s_in(ns), s_pre(ns);
    BasicTensor<T> h;
    for (size_t s = 0; s < ns; ++s) {
      const auto& st = stages_[s];
      s_in[s] = s == 0 ? q[m - 1][b] : (st.upsample ? unpool_nearest(h, 2) : h);
      s_pre[s] = st.main.forward(s_in[s]);
      if (st.side) add_inplace(s_pre[s], st.side->forward(q[st.side_scale][b]));
      h = st.activate ? leaky_relu(s_pre[s], slope) : s_pre[s];
    }
    const BasicTensor<T> out = clamp01(h);
    BasicTensor<T> g_out;
    const double loss = distortion_loss(batch[b], out, backward ? &g_out : nullptr, metric);
    if (!std::isfinite(loss)) throw NumericError("non-finite distortion loss");
    total += loss / static_cast<double>(nb);
    if (!backward) continue;

    const T inv = T(1.0 / static_cast<double>(nb));
    BasicTensor<T> g_h = g_out;
    for (size_t k = 0; k < g_h.size(); ++k) {
      const T v = s_pre[ns - 1][k];
      g_h[k] = (v > 0 && v < 1) ? g_h[k] * inv : T(0);
    }
    for (size_t s = ns; s-- > 0;) {
      auto& st = stages_[s];
      if (st.activate) leaky_relu_backward(s_pre[s], slope, g_h);
      BasicTensor<T> g_in;
      st.main.backward(s_in[s], g_h, &g_in);
      if (st.side) {
        BasicTensor<T> g_side;
        st.side->backward(q[st.side_scale][b], g_h, &g_side);
        auto& acc = g_q[st.side_scale][b];
        if (acc.empty()) acc = std::move(g_side); else add_inplace(acc, g_side);
      }
      if (s == 0) {
        auto& acc = g_q[m - 1][b];
        if (acc.empty()) acc = std::move(g_in); else add_inplace(acc, g_in);
      } else {
        g_h = st.upsample ? unpool_nearest_backward(g_in, 2) : std::move(g_in);
      }
    }
  }
  if (!backward) return total;

  // Quantizer and taps.
  std::vector<Batch> g_act(depth, Batch(nb));
  for (int t = 0; t < depth; ++t) {
    for (size_t b = 0; b < nb; ++b) {
      g_act[t][b] = BasicTensor<T>(act[t][b].channels(), act[t][b].height(), act[t][b].width());
    }
  }
  for (int i = 0; i < m; ++i) {
    if (!heads_[i]) continue;
    Batch g_bn(nb);
    for (size_t b = 0; b < nb; ++b) {
      BasicTensor<T> g = g_q[i][b];
      quantize_backward(scaled[i][b], qc, g);
      clip_and_scale_backward(bn_out[i][b], qc, g);
      g_bn[b] = std::move(g);
    }
    Batch g_z = batchnorm_backward<T>(bn_cache[i], g_bn, bn_gamma_[i].value, bn_gamma_[i].grad,
                                      bn_beta_[i].grad);
    const int t = tap_layer(i);
    for (size_t b = 0; b < nb; ++b) {
      BasicTensor<T> g_a;
      heads_[i]->backward(act[t][b], g_z[b], &g_a);
      add_inplace(g_act[t][b], g_a);
    }
  }

  // Trunk.
  for (int t = depth; t-- > 0;) {
    for (size_t b = 0; b < nb; ++b) {
      BasicTensor<T>& g = g_act[t][b];
      leaky_relu_backward(pre[t][b], slope, g);
      if (t > 0) {
        BasicTensor<T> g_in;
        trunk_[t].backward(act[t - 1][b], g, &g_in);
        add_inplace(g_act[t - 1][b], g_in);
      } else {
        trunk_[t].backward(batch[b], g, nullptr);
      }
    }
  }
  return total;
}

template <typename T>
template <typename U>
Autoencoder<U> Autoencoder<T>::converted() const {
  Autoencoder<U> out(config_);
  auto src = const_cast<Autoencoder<T>*>(this)->parameters();
  auto dst = out.parameters();
  copy_values<U, T>(src, dst);
  const auto stats = bn_statistics();
  std::vector<U> cast(stats.begin(), stats.end());
  out.set_bn_statistics(cast);
  return out;
}

template struct ConvLayer<float>;
template struct ConvLayer<double>;
template class Autoencoder<float>;
template class Autoencoder<double>;
template Autoencoder<double> Autoencoder<float>::converted<double>() const;
template Autoencoder<float> Autoencoder<double>::converted<float>() const;
template Autoencoder<float> Autoencoder<float>::converted<float>() const;

// ---------------------------------------------------------------------------
// Training

std::vector<Tensor> sample_crops(const std::vector<Tensor>& corpus, int batch, int crop,
                                 uint64_t seed, int64_t t) {
  if (corpus.empty()) throw ConfigError("training corpus is empty");
  Rng rng(splitmix64(seed ^ splitmix64(static_cast<uint64_t>(t))));
  std::vector<Tensor> out;
  for (int b = 0; b < batch; ++b) {
    const Tensor& img = corpus[uniform_int(rng, static_cast<int>(corpus.size()))];
    if (img.height() < crop || img.width() < crop) {
      throw ConfigError("corpus image smaller than the training crop");
    }
    const int y0 = uniform_int(rng, img.height() - crop + 1);
    const int x0 = uniform_int(rng, img.width() - crop + 1);
    Tensor c(img.channels(), crop, crop);
    for (int ch = 0; ch < img.channels(); ++ch) {
      for (int y = 0; y < crop; ++y) {
        for (int x = 0; x < crop; ++x) c.at(ch, y, x) = img.at(ch, y0 + y, x0 + x);
      }
    }
    out.push_back(std::move(c));
  }
  return out;
}

void train_autoencoder(AutoencoderTrainer& trainer, const std::vector<Tensor>& corpus,
                       const TrainSchedule& schedule,
                       const std::function<void(const TrainLogRow&)>& log) {
  auto params = trainer.model.parameters();
  if (trainer.adam.m.size() != params.size()) trainer.adam.init(params);
  trainer.adam.alpha = schedule.learning_rate;
  if (schedule.crop % trainer.model.config().padding_multiple() != 0) {
    throw ConfigError("training crop must be a multiple of " +
                      std::to_string(trainer.model.config().padding_multiple()));
  }
  const int64_t last = schedule.stop_at > 0 ? std::min(schedule.stop_at, schedule.updates)
                                            : schedule.updates;
  for (int64_t t = trainer.completed + 1; t <= last; ++t) {
    const auto batch = sample_crops(corpus, schedule.batch_size, schedule.crop, schedule.seed, t);
    const auto saved_bn = trainer.model.bn_statistics();
    zero_grads(params);
    double loss;
    try {
      loss = trainer.model.batch_loss(batch, Mode::kTrain, QuantMode::kHard, true);
      const double scale = linear_decay_scale(t, schedule.updates, schedule.decay_start);
      adam_step(params, trainer.adam, scale);
      trainer.completed = t;
      if (log) log({t, loss, scale});
    } catch (const NumericError&) {
      trainer.model.set_bn_statistics(saved_bn);
      zero_grads(params);
      throw;
    }
  }
}

double evaluate_distortion(const Autoencoder<float>& model, const std::vector<Tensor>& images) {
  if (images.empty()) return 0.0;
  double sum = 0;
  for (const auto& img : images) {
    const Image padded = pad_image(img, model.config().padding_multiple());
    const Tensor rec = crop(model.reconstruct(padded.pixels), img.height(), img.width());
    sum += distortion_loss(img, rec);
  }
  return sum / static_cast<double>(images.size());
}

}  // namespace msic
