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

#include "msic/codec.h"

#include <algorithm>
#include <string_view>

#include "msic/bytes.h"
#include "msic/errors.h"

namespace msic {
namespace {

constexpr std::string_view kModelHeader = "MSIC-MODEL\n";
constexpr std::string_view kStateHeader = "MSIC-STATE\n";
constexpr std::string_view kEndLine = "end\n";
constexpr size_t kMaxTextHeader = 1 << 16;

// Splits "<magic>key=value...end\n<blob>" into key/values and the blob.
KeyValues split_text_header(std::span<const uint8_t> bytes, std::string_view magic,
                            std::span<const uint8_t>* rest) {
  const std::string_view text(reinterpret_cast<const char*>(bytes.data()),
                              std::min(bytes.size(), kMaxTextHeader));
  if (!text.starts_with(magic)) throw FormatError("bad file magic, expected " + std::string(magic.substr(0, magic.size() - 1)));
  size_t pos = magic.size();
  size_t end = std::string_view::npos;
  while (pos < text.size()) {
    const size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) break;
    if (text.substr(pos, nl + 1 - pos) == kEndLine) {
      end = pos;
      break;
    }
    pos = nl + 1;
  }
  if (end == std::string_view::npos) throw CorruptionError("unterminated text header");
  *rest = bytes.subspan(end + kEndLine.size());
  return parse_key_values(text.substr(magic.size(), end - magic.size()));
}

std::string get(const KeyValues& kv, const std::string& key) {
  auto it = kv.find(key);
  if (it == kv.end()) throw FormatError("missing key '" + key + "'");
  return it->second;
}

int64_t get_int(const KeyValues& kv, const std::string& key) {
  const std::string s = get(kv, key);
  try {
    size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw FormatError("bad integer for '" + key + "'");
  }
}

std::vector<float> take(std::span<const float>& flat, size_t n) {
  if (flat.size() < n) throw CorruptionError("model blob too short for its configuration");
  std::vector<float> out(flat.begin(), flat.begin() + n);
  flat = flat.subspan(n);
  return out;
}

}  // namespace

void Model::set_coder(const CoderConfig& cfg, ContextModel<float> model, BaseHistogram hist) {
  cfg.validate();
  if (model.channels() != config().total_channels() || model.levels() != config().levels ||
      model.blocks() != cfg.blocks || hist.channels() != model.channels() ||
      hist.levels() != model.levels()) {
    throw ConfigError("coder does not fit the autoencoder configuration");
  }
  coder = cfg;
  context.emplace(std::move(model));
  histogram = std::move(hist);
}

std::vector<uint8_t> serialize_model(const Model& model) {
  KeyValues kv;
  model.config().to_key_values(kv);
  kv["stage"] = model.has_coder() ? "full" : "ae";
  if (model.has_coder()) model.coder->to_key_values(kv);
  auto& ae = const_cast<Autoencoder<float>&>(model.ae);
  std::vector<float> flat = flatten_values(ae.parameters());
  const auto bn = model.ae.bn_statistics();
  flat.insert(flat.end(), bn.begin(), bn.end());
  if (model.has_coder()) {
    auto& ctx = const_cast<ContextModel<float>&>(*model.context);
    const auto c = flatten_values(ctx.parameters());
    flat.insert(flat.end(), c.begin(), c.end());
    for (double v : model.histogram.counts()) flat.push_back(static_cast<float>(v));
  }
  ByteWriter w;
  w.raw(kModelHeader);
  w.raw(format_key_values(kv));
  w.raw(kEndLine);
  w.raw(serialize_blob(flat));
  return w.take();
}

Model deserialize_model(std::span<const uint8_t> bytes) {
  std::span<const uint8_t> rest;
  const KeyValues kv = split_text_header(bytes, kModelHeader, &rest);
  const std::string stage = get(kv, "stage");
  if (stage != "ae" && stage != "full") throw FormatError("unknown model stage '" + stage + "'");
  CodecConfig cfg;
  try {
    cfg = CodecConfig::from_key_values(kv);
  } catch (const ConfigError& e) {
    throw FormatError(std::string("invalid model configuration: ") + e.what());
  }
  size_t used = 0;
  const std::vector<float> values = deserialize_blob(rest, &used);
  if (used != rest.size()) throw CorruptionError("trailing bytes after model blob");
  std::span<const float> flat(values);
  Model model(cfg);
  auto params = model.ae.parameters();
  unflatten_values(take(flat, total_size(params)), params);
  const auto bn = take(flat, model.ae.bn_statistics().size());
  model.ae.set_bn_statistics(bn);
  if (stage == "full") {
    CoderConfig cc;
    try {
      cc = CoderConfig::from_key_values(kv);
    } catch (const ConfigError& e) {
      throw FormatError(std::string("invalid coder configuration: ") + e.what());
    }
    ContextModel<float> ctx(cfg.total_channels(), cfg.levels, cc.blocks, cc.width);
    auto cp = ctx.parameters();
    unflatten_values(take(flat, total_size(cp)), cp);
    BaseHistogram hist(cfg.total_channels(), cfg.levels);
    const auto counts = take(flat, static_cast<size_t>(cfg.total_channels()) * cfg.levels);
    hist.set_counts(std::vector<double>(counts.begin(), counts.end()));
    model.set_coder(cc, std::move(ctx), std::move(hist));
  }
  if (!flat.empty()) throw CorruptionError("model blob longer than its configuration");
  return model;
}

Model load_model(const std::string& path) {
  try {
    return deserialize_model(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

void save_model(const std::string& path, const Model& model) {
  write_file(path, serialize_model(model));
}

uint64_t model_digest(const Model& model) { return fnv1a64(serialize_model(model)); }

std::vector<uint8_t> serialize_train_state(const TrainState& state) {
  KeyValues kv;
  kv["stage"] = state.stage;
  kv["completed"] = std::to_string(state.completed);
  kv["adam_step"] = std::to_string(state.adam.step);
  kv["tensors"] = std::to_string(state.adam.m.size());
  std::string sizes;
  std::vector<float> flat;
  for (size_t i = 0; i < state.adam.m.size(); ++i) {
    sizes += (i ? "," : "") + std::to_string(state.adam.m[i].size());
    flat.insert(flat.end(), state.adam.m[i].begin(), state.adam.m[i].end());
    flat.insert(flat.end(), state.adam.v[i].begin(), state.adam.v[i].end());
  }
  kv["sizes"] = sizes;
  ByteWriter w;
  w.raw(kStateHeader);
  w.raw(format_key_values(kv));
  w.raw(kEndLine);
  w.raw(serialize_blob(flat));
  return w.take();
}

TrainState deserialize_train_state(std::span<const uint8_t> bytes) {
  std::span<const uint8_t> rest;
  const KeyValues kv = split_text_header(bytes, kStateHeader, &rest);
  TrainState s;
  s.stage = get(kv, "stage");
  s.completed = get_int(kv, "completed");
  s.adam.step = get_int(kv, "adam_step");
  const int64_t tensors = get_int(kv, "tensors");
  const std::vector<float> values = deserialize_blob(rest);
  std::span<const float> flat(values);
  std::string sizes = get(kv, "sizes");
  size_t start = 0;
  for (int64_t i = 0; i < tensors; ++i) {
    const size_t comma = sizes.find(',', start);
    const std::string item = sizes.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    start = comma == std::string::npos ? sizes.size() : comma + 1;
    size_t n = 0;
    try {
      n = std::stoull(item);
    } catch (const std::exception&) {
      throw FormatError("bad tensor size list in training state");
    }
    s.adam.m.push_back(take(flat, n));
    s.adam.v.push_back(take(flat, n));
  }
  if (!flat.empty()) throw CorruptionError("training state longer than declared");
  return s;
}

int padding_multiple(const Model& model) {
  int m = model.config().padding_multiple();
  if (model.has_coder()) m = std::max(m, 4 * (1 << (model.coder->blocks / 2)));
  return m;
}

QuantizedFeatures analyze_and_quantize(const Model& model, const Tensor& image) {
  const Image padded = pad_image(image, padding_multiple(model));
  return model.ae.quantize_features(model.ae.analyze(padded.pixels));
}

CompressResult compress(const Model& model, const Tensor& image, const CompressOptions& options) {
  if (!model.has_coder()) throw ConfigError("model has no trained lossless coder (stage=ae)");
  if (image.channels() != 3) throw ConfigError("expected an RGB image");
  if (image.height() > 65535 || image.width() > 65535) {
    throw ConfigError("image dimensions above 65535 are not supported");
  }
  const int multiple = padding_multiple(model);
  const Image padded = pad_image(image, multiple);
  if (padded.pixels.height() > 65535 || padded.pixels.width() > 65535) {
    throw ConfigError("padded image dimensions exceed 65535");
  }
  CompressResult out;
  out.features = model.ae.quantize_features(model.ae.analyze(padded.pixels));
  const auto& f0 = out.features.maps[0];
  GridSchedule schedule = build_schedule(f0.height(), f0.width(), model.coder->blocks);
  const ContextModel<float>* ctx = &*model.context;
  std::optional<ContextModel<float>> reduced;
  if (options.drop_blocks != 0) {
    auto [s, m] = drop_last_blocks(schedule, *model.context, options.drop_blocks);
    schedule = std::move(s);
    reduced.emplace(std::move(m));
    ctx = &*reduced;
  }
  const auto payload = encode_features(out.features, *ctx, model.histogram, schedule, &out.stats);
  Header h;
  h.original_height = static_cast<uint16_t>(image.height());
  h.original_width = static_cast<uint16_t>(image.width());
  h.padded_height = static_cast<uint16_t>(padded.pixels.height());
  h.padded_width = static_cast<uint16_t>(padded.pixels.width());
  for (int c : model.config().channels) h.channels.push_back(static_cast<uint8_t>(c));
  h.levels = static_cast<uint8_t>(model.config().levels);
  h.blocks = static_cast<uint8_t>(model.coder->blocks);
  h.dropped_blocks = static_cast<uint8_t>(options.drop_blocks);
  h.model_digest = digest_bytes(model_digest(model));
  if (payload.size() > UINT32_MAX) throw ConfigError("payload too large");
  h.payload_length = static_cast<uint32_t>(payload.size());
  out.bytes = write_container(h, payload);
  return out;
}

DecompressResult decompress(const Model& model, std::span<const uint8_t> bytes) {
  if (!model.has_coder()) throw ConfigError("model has no trained lossless coder (stage=ae)");
  const CompressedImage ci = read_container(bytes);
  const Header& h = ci.header;
  if (h.model_digest != digest_bytes(model_digest(model))) {
    throw ModelMismatchError("container was produced with a different model (digest mismatch)");
  }
  const auto& cfg = model.config();
  std::vector<int> channels(h.channels.begin(), h.channels.end());
  if (channels != cfg.channels || h.levels != cfg.levels || h.blocks != model.coder->blocks) {
    throw ModelMismatchError("container configuration does not match the model");
  }
  const int multiple = padding_multiple(model);
  const auto round_up = [multiple](int v) { return (v + multiple - 1) / multiple * multiple; };
  if (h.padded_height != round_up(h.original_height) || h.padded_width != round_up(h.original_width)) {
    throw FormatError("padded dimensions do not match the model's padding rule");
  }
  GridSchedule schedule;
  try {
    schedule = build_schedule(h.padded_height / 4, h.padded_width / 4, h.blocks - h.dropped_blocks);
  } catch (const ConfigError& e) {
    throw FormatError(std::string("container dimensions do not fit the coder: ") + e.what());
  }
  const ContextModel<float>* ctx = &*model.context;
  std::optional<ContextModel<float>> reduced;
  if (h.dropped_blocks != 0) {
    reduced.emplace(model.context->without_first_steps(h.dropped_blocks));
    ctx = &*reduced;
  }
  DecompressResult out;
  out.features = decode_features(ci.payload, *ctx, model.histogram, schedule, channels, &out.stats);
  out.image = crop(model.ae.synthesize(out.features), h.original_height, h.original_width);
  return out;
}

Tensor reconstruct_direct(const Model& model, const Tensor& image) {
  const Image padded = pad_image(image, padding_multiple(model));
  return crop(model.ae.reconstruct(padded.pixels), image.height(), image.width());
}

}  // namespace msic
