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

#include "cli.h"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include <unistd.h>

#include "CLI11.hpp"
#include "msic/bytes.h"
#include "msic/codec.h"
#include "msic/corpus.h"
#include "msic/errors.h"
#include "msic/log.h"
#include "msic/metrics.h"
#include "msic/png_io.h"
#include "rd_plot.h"

namespace msic::cli {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

// Signals a usage problem detected after argument parsing.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string read_text(const std::string& path) {
  const auto bytes = read_file(path);
  return std::string(bytes.begin(), bytes.end());
}

void write_text(const std::string& path, const std::string& text) {
  write_file(path, std::span(reinterpret_cast<const uint8_t*>(text.data()), text.size()));
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Training configuration

const std::set<std::string>& known_config_keys() {
  static const std::set<std::string> keys = {
      "M", "channels", "N", "u", "alpha", "hidden_width", "depth",
      "K", "coder_width",
      "ae_updates", "ae_batch_size", "crop", "ae_learning_rate",
      "coder_updates", "coder_batch_size", "coder_learning_rate", "coder_crop",
      "decay_start"};
  return keys;
}

template <typename V>
V config_number(const KeyValues& kv, const std::string& key, V fallback) {
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
    throw FormatError("config: bad value for '" + key + "': '" + it->second + "'");
  }
}

KeyValues load_config(const std::string& path) {
  KeyValues kv = parse_key_values(read_text(path));
  for (const auto& [k, v] : kv) {
    if (known_config_keys().count(k) == 0) warn_once("config: ignoring unknown key '" + k + "'");
  }
  return kv;
}

TrainSchedule ae_schedule(const KeyValues& kv, uint64_t seed) {
  TrainSchedule s;
  s.updates = config_number<int64_t>(kv, "ae_updates", s.updates);
  s.batch_size = config_number<int>(kv, "ae_batch_size", s.batch_size);
  s.crop = config_number<int>(kv, "crop", s.crop);
  s.learning_rate = config_number<double>(kv, "ae_learning_rate", s.learning_rate);
  s.decay_start = config_number<double>(kv, "decay_start", s.decay_start);
  s.seed = seed;
  if (s.updates < 1 || s.batch_size < 1 || s.crop < 1 || !(s.learning_rate > 0)) {
    throw ConfigError("config: training values must be positive");
  }
  return s;
}

CoderTrainSchedule coder_schedule(const KeyValues& kv, uint64_t seed) {
  CoderTrainSchedule s;
  s.updates = config_number<int64_t>(kv, "coder_updates", s.updates);
  s.batch_size = config_number<int>(kv, "coder_batch_size", s.batch_size);
  s.learning_rate = config_number<double>(kv, "coder_learning_rate", s.learning_rate);
  s.decay_start = config_number<double>(kv, "decay_start", s.decay_start);
  s.seed = seed;
  if (s.updates < 1 || s.batch_size < 1 || !(s.learning_rate > 0)) {
    throw ConfigError("config: training values must be positive");
  }
  return s;
}

Tensor center_crop(const Tensor& img, int h, int w) {
  const int y0 = (img.height() - h) / 2, x0 = (img.width() - w) / 2;
  Tensor out(img.channels(), h, w);
  for (int c = 0; c < img.channels(); ++c) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) out.at(c, y, x) = img.at(c, y0 + y, x0 + x);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  std::string stage;
  std::string corpus;
  std::string config;
  std::string out;
  std::string ae;
  std::string log;
  uint64_t seed = 0;
  bool resume = false;
  int64_t stop_at = 0;
  int64_t checkpoint_every = 100;
};

class LogWriter {
 public:
  LogWriter(const std::string& path, bool append)
      : out_(path, append ? std::ios::app : std::ios::trunc) {
    if (!out_) throw FormatError("cannot write training log '" + path + "'");
    if (!append) out_ << "update,loss,lr_scale\n";
  }
  void row(int64_t t, double loss, double scale) {
    out_ << t << "," << num(loss) << "," << num(scale) << "\n";
  }
  void flush() { out_.flush(); }

 private:
  std::ofstream out_;
};

std::string state_path(const std::string& model_path) { return model_path + ".state"; }

void save_checkpoint(const std::string& out, const Model& model, const TrainState& state) {
  save_model(out, model);
  write_file(state_path(out), serialize_train_state(state));
}

TrainState load_state(const std::string& out, const std::string& stage) {
  TrainState s = deserialize_train_state(read_file(state_path(out)));
  if (s.stage != stage) {
    throw ConfigError("checkpoint '" + state_path(out) + "' belongs to stage " + s.stage);
  }
  return s;
}

int train_ae(const TrainArgs& a, const KeyValues& kv) {
  const CodecConfig cfg = CodecConfig::from_key_values(kv);
  TrainSchedule sched = ae_schedule(kv, a.seed);
  sched.stop_at = a.stop_at;
  const auto corpus = pixels_of(load_corpus(a.corpus));
  if (corpus.empty()) throw ConfigError("training corpus '" + a.corpus + "' has no PNG images");
  AutoencoderTrainer trainer(cfg);
  if (a.resume) {
    Model m = load_model(a.out);
    KeyValues saved, wanted;
    m.config().to_key_values(saved);
    cfg.to_key_values(wanted);
    if (saved != wanted) throw ConfigError("resume: '" + a.out + "' has a different configuration");
    trainer.model = m.ae;
    TrainState s = load_state(a.out, "ae");
    trainer.adam.m = std::move(s.adam.m);
    trainer.adam.v = std::move(s.adam.v);
    trainer.adam.step = s.adam.step;
    trainer.completed = s.completed;
  } else {
    trainer.model.init(a.seed);
  }
  LogWriter log(a.log.empty() ? a.out + ".log.csv" : a.log, a.resume);
  auto checkpoint = [&] {
    Model m(cfg);
    m.ae = trainer.model;
    save_checkpoint(a.out, m, {"ae", trainer.completed, trainer.adam});
    log.flush();
  };
  train_autoencoder(trainer, corpus, sched, [&](const TrainLogRow& r) {
    log.row(r.update, r.loss, r.lr_scale);
    if (a.checkpoint_every > 0 && r.update % a.checkpoint_every == 0) checkpoint();
  });
  checkpoint();
  std::printf("trained autoencoder: %lld updates, model %s\n",
              static_cast<long long>(trainer.completed), a.out.c_str());
  return kExitOk;
}

int train_coder(const TrainArgs& a, const KeyValues& kv) {
  if (a.ae.empty()) {
    throw UsageError("train --stage coder needs a trained autoencoder (--ae MODEL); "
                     "run --stage ae first");
  }
  const Model base = load_model(a.ae);
  const CodecConfig& cfg = base.config();
  const CoderConfig ccfg = CoderConfig::from_key_values(kv);
  CoderTrainSchedule sched = coder_schedule(kv, a.seed);
  sched.stop_at = a.stop_at;
  const auto corpus = pixels_of(load_corpus(a.corpus));
  if (corpus.empty()) throw ConfigError("training corpus '" + a.corpus + "' has no PNG images");

  // Placeholder coder so padding follows the final model's rule.
  Model model = base;
  model.set_coder(ccfg, ContextModel<float>(cfg.total_channels(), cfg.levels, ccfg.blocks, ccfg.width),
                  BaseHistogram(cfg.total_channels(), cfg.levels));
  const int multiple = padding_multiple(model);

  std::vector<QuantizedFeatures> full;
  for (const auto& img : corpus) full.push_back(analyze_and_quantize(model, img));
  BaseHistogram hist = fit_histogram(full, cfg.levels);

  int crop_h = config_number<int>(kv, "coder_crop", 0), crop_w = crop_h;
  if (crop_h == 0) {
    crop_h = crop_w = INT32_MAX;
    for (const auto& img : corpus) {
      crop_h = std::min(crop_h, img.height() / multiple * multiple);
      crop_w = std::min(crop_w, img.width() / multiple * multiple);
    }
  }
  if (crop_h < multiple || crop_w < multiple || crop_h % multiple || crop_w % multiple) {
    throw ConfigError("coder training crop must be a positive multiple of " +
                      std::to_string(multiple) + " that fits every corpus image");
  }
  std::vector<QuantizedFeatures> train;
  for (const auto& img : corpus) {
    if (img.height() < crop_h || img.width() < crop_w) {
      throw ConfigError("corpus image smaller than the coder training crop");
    }
    train.push_back(model.ae.quantize_features(model.ae.analyze(center_crop(img, crop_h, crop_w))));
  }

  CoderTrainer trainer(cfg.total_channels(), cfg.levels, ccfg);
  if (a.resume) {
    const Model m = load_model(a.out);
    if (!m.has_coder()) throw ConfigError("resume: '" + a.out + "' has no coder");
    trainer.model = *m.context;
    hist = m.histogram;
    TrainState s = load_state(a.out, "coder");
    trainer.adam.m = std::move(s.adam.m);
    trainer.adam.v = std::move(s.adam.v);
    trainer.adam.step = s.adam.step;
    trainer.completed = s.completed;
  } else {
    trainer.model.init(a.seed);
    std::vector<std::vector<double>> prior;
    for (int c = 0; c < hist.channels(); ++c) prior.push_back(hist.probabilities(c));
    trainer.model.init_output_prior(prior);
  }
  LogWriter log(a.log.empty() ? a.out + ".log.csv" : a.log, a.resume);
  auto checkpoint = [&] {
    model.set_coder(ccfg, trainer.model, hist);
    save_checkpoint(a.out, model, {"coder", trainer.completed, trainer.adam});
    log.flush();
  };
  train_context_model(trainer, train, sched, [&](const CoderTrainLogRow& r) {
    log.row(r.update, r.loss_bits, r.lr_scale);
    if (a.checkpoint_every > 0 && r.update % a.checkpoint_every == 0) checkpoint();
  });
  checkpoint();
  std::printf("trained lossless coder: %lld updates, model %s\n",
              static_cast<long long>(trainer.completed), a.out.c_str());
  return kExitOk;
}

// ---------------------------------------------------------------------------
// compress / decompress / eval

struct ImageResult {
  RdRow row;
  std::vector<uint8_t> container;
  std::vector<uint8_t> png;
};

// PNG decode through container bytes, then container through PNG bytes.
ImageResult run_image(const Model& model, const std::vector<uint8_t>& png_bytes,
                      const std::string& label, const std::string& name, int drop_blocks) {
  ImageResult r;
  const auto t0 = Clock::now();
  const Tensor image = decode_png(png_bytes);
  CompressOptions opt;
  opt.drop_blocks = drop_blocks;
  r.container = compress(model, image, opt).bytes;
  const double enc = seconds_since(t0);
  const auto t1 = Clock::now();
  const DecompressResult d = decompress(model, r.container);
  r.png = encode_png(d.image);
  const double dec = seconds_since(t1);
  r.row = {label, name, bpp(r.container.size(), image.width(), image.height()),
           ms_ssim(image, quantize_to_8bit(d.image)), enc, dec};
  return r;
}

std::vector<RdRow> eval_corpus(const Model& model, const std::string& dir,
                               const std::string& label, int drop_blocks, int jobs, bool timing) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw FormatError("corpus directory not found: " + dir);
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(dir)) {
    std::string ext = e.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (e.is_regular_file() && ext == ".png") names.push_back(e.path().filename().string());
  }
  std::sort(names.begin(), names.end());
  std::vector<RdRow> rows(names.size());
  std::vector<std::exception_ptr> errors(names.size());
  auto work = [&](size_t i) {
    try {
      const auto bytes = read_file((fs::path(dir) / names[i]).string());
      rows[i] = run_image(model, bytes, label, names[i], drop_blocks).row;
      if (!timing) rows[i].enc_s = rows[i].dec_s = 0;
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  jobs = std::max(1, std::min<int>(jobs, static_cast<int>(names.size())));
  if (jobs <= 1) {
    for (size_t i = 0; i < names.size(); ++i) work(i);
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) {
      pool.emplace_back([&, j] {
        for (size_t i = j; i < names.size(); i += jobs) work(i);
      });
    }
    for (auto& t : pool) t.join();
  }
  for (size_t i = 0; i < names.size(); ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const Error& e) {
      throw FormatError(names[i] + ": " + e.what());
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// bench

// Encode/decode of one external codec run. The template's first word must be
// an executable on PATH (or a path). Optional " ::: " splits it into an
// encode and a decode command, timed separately.
struct ExternalCodec {
  std::string name;
  std::string command;
};

bool executable_available(const std::string& command) {
  std::istringstream in(command);
  std::string prog;
  in >> prog;
  if (prog.empty()) return false;
  if (prog.find('/') != std::string::npos) return ::access(prog.c_str(), X_OK) == 0;
  const char* path = std::getenv("PATH");
  if (path == nullptr) return false;
  std::stringstream dirs(path);
  std::string dir;
  while (std::getline(dirs, dir, ':')) {
    if (!dir.empty() && ::access((fs::path(dir) / prog).c_str(), X_OK) == 0) return true;
  }
  return false;
}

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += "'\\''";
    else out += c;
  }
  return out + "'";
}

std::string substitute(std::string t, const std::string& key, const std::string& value) {
  for (size_t pos = t.find(key); pos != std::string::npos; pos = t.find(key, pos + value.size())) {
    t.replace(pos, key.size(), value);
  }
  return t;
}

std::string expand(const std::string& t, const std::string& in, const std::string& out,
                   const std::string& recon, int q) {
  std::string s = substitute(t, "{in}", shell_quote(in));
  s = substitute(s, "{out}", shell_quote(out));
  s = substitute(s, "{recon}", shell_quote(recon));
  return substitute(s, "{q}", std::to_string(q));
}

double run_shell(const std::string& cmd) {
  const auto t0 = Clock::now();
  const int rc = std::system(cmd.c_str());
  if (rc != 0) throw FormatError("external command failed (" + std::to_string(rc) + "): " + cmd);
  return seconds_since(t0);
}

std::vector<RdRow> bench_external(const ExternalCodec& codec, const std::string& corpus,
                                  const std::vector<int>& qualities, const std::string& work,
                                  bool timing) {
  const auto images = load_corpus(corpus);
  std::vector<RdRow> rows;
  const std::string sep = " ::: ";
  const size_t split = codec.command.find(sep);
  const std::string enc_t = codec.command.substr(0, split);
  const std::string dec_t = split == std::string::npos ? "" : codec.command.substr(split + sep.size());
  for (int q : qualities) {
    for (const auto& im : images) {
      const std::string in = (fs::path(corpus) / im.name).string();
      const std::string stem = fs::path(im.name).stem().string();
      const std::string out = (fs::path(work) / (codec.name + "_q" + std::to_string(q) + "_" + stem + ".bin")).string();
      const std::string recon = (fs::path(work) / (codec.name + "_q" + std::to_string(q) + "_" + stem + ".png")).string();
      double enc = run_shell(expand(enc_t, in, out, recon, q));
      double dec = dec_t.empty() ? 0.0 : run_shell(expand(dec_t, in, out, recon, q));
      const auto size = fs::file_size(out);
      const Tensor rec = read_png(recon);
      if (rec.height() != im.pixels.height() || rec.width() != im.pixels.width()) {
        throw FormatError(codec.name + " reconstruction has the wrong size");
      }
      if (!timing) enc = dec = 0;
      rows.push_back({codec.name + "@q" + std::to_string(q), im.name,
                      bpp(size, im.pixels.width(), im.pixels.height()), ms_ssim(im.pixels, rec), enc, dec});
    }
  }
  return rows;
}

std::vector<int> parse_qualities(const std::string& s) {
  std::vector<int> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      out.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw UsageError("bad quality list '" + s + "'");
    }
  }
  if (out.empty()) throw UsageError("empty quality list");
  return out;
}

int map_exception() {
  try {
    throw;
  } catch (const UsageError& e) {
    std::fprintf(stderr, "msic: %s\n", e.what());
    return kExitUsage;
  } catch (const ModelMismatchError& e) {
    std::fprintf(stderr, "msic: model mismatch: %s\n", e.what());
    return kExitModelMismatch;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "msic: error: %s\n", e.what());
    return kExitData;
  }
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"msic: multi-scale learned image compression"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "train the autoencoder or the lossless coder");
  train->add_option("--stage", ta.stage, "ae or coder")->required()->check(CLI::IsMember({"ae", "coder"}));
  train->add_option("--corpus", ta.corpus, "directory of training PNGs")->required();
  train->add_option("--config", ta.config, "key=value configuration file")->required();
  train->add_option("--out", ta.out, "output model file")->required();
  train->add_option("--ae", ta.ae, "trained autoencoder model (coder stage)");
  train->add_option("--seed", ta.seed, "random seed")->default_val(0);
  train->add_option("--log", ta.log, "training log CSV (default OUT.log.csv)");
  train->add_flag("--resume", ta.resume, "continue from OUT and OUT.state");
  train->add_option("--stop-at", ta.stop_at, "stop (with a checkpoint) after this update");
  train->add_option("--checkpoint-every", ta.checkpoint_every, "updates between checkpoints (0: end only)")
      ->default_val(100);

  std::string c_in, c_model, c_out;
  int c_drop = 0;
  auto* comp = app.add_subcommand("compress", "compress a PNG into a container");
  comp->add_option("input", c_in, "input PNG")->required();
  comp->add_option("--model", c_model, "model file")->required();
  comp->add_option("--out", c_out, "output container")->required();
  comp->add_option("--drop-blocks", c_drop, "coarsest coder steps to skip (even)")->default_val(0);

  std::string d_in, d_model, d_out;
  auto* decomp = app.add_subcommand("decompress", "decode a container into a PNG");
  decomp->add_option("input", d_in, "input container")->required();
  decomp->add_option("--model", d_model, "model file")->required();
  decomp->add_option("--out", d_out, "output PNG")->required();

  std::string e_corpus, e_model, e_out, e_label = "msic";
  int e_drop = 0, e_jobs = 1;
  bool e_no_timing = false;
  auto* eval = app.add_subcommand("eval", "rate and distortion of every corpus image");
  eval->add_option("--corpus", e_corpus, "directory of PNGs")->required();
  eval->add_option("--model", e_model, "model file")->required();
  eval->add_option("--out", e_out, "output CSV")->required();
  eval->add_option("--label", e_label, "label column value")->default_val("msic");
  eval->add_option("--drop-blocks", e_drop, "coarsest coder steps to skip (even)")->default_val(0);
  eval->add_option("--jobs", e_jobs, "images processed concurrently")->default_val(1);
  eval->add_flag("--no-timing", e_no_timing, "write 0 for enc_s/dec_s");

  std::string b_corpus, b_out, b_jpeg, b_webp, b_bpg, b_qualities = "25,50,75,90";
  std::vector<std::string> b_models;
  bool b_no_timing = false;
  int b_jobs = 1;
  auto* bench = app.add_subcommand("bench", "compare against external codecs");
  bench->add_option("--corpus", b_corpus, "directory of PNGs")->required();
  bench->add_option("--model", b_models, "model file (repeatable)")->required();
  bench->add_option("--jpeg-cmd", b_jpeg, "JPEG command template");
  bench->add_option("--webp-cmd", b_webp, "WebP command template");
  bench->add_option("--bpg-cmd", b_bpg, "BPG command template");
  bench->add_option("--qualities", b_qualities, "comma-separated quality settings");
  bench->add_option("--jobs", b_jobs, "images processed concurrently")->default_val(1);
  bench->add_option("--out", b_out, "output directory")->required();
  bench->add_flag("--no-timing", b_no_timing, "write 0 for timing columns");

  std::string p_csv, p_out;
  auto* plot = app.add_subcommand("plot", "render an RD CSV as SVG");
  plot->add_option("--csv", p_csv, "RD CSV")->required();
  plot->add_option("--out", p_out, "output SVG")->required();

  std::string m_out;
  int m_count = 100, m_height = 64, m_width = 64;
  uint64_t m_seed = 0;
  auto* make = app.add_subcommand("make-corpus", "write a synthetic PNG corpus");
  make->add_option("--out", m_out, "output directory")->required();
  make->add_option("--count", m_count, "number of images")->default_val(100);
  make->add_option("--height", m_height, "image height")->default_val(64);
  make->add_option("--width", m_width, "image width")->default_val(64);
  make->add_option("--seed", m_seed, "random seed")->default_val(0);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*train) {
      const KeyValues kv = load_config(ta.config);
      return ta.stage == "ae" ? train_ae(ta, kv) : train_coder(ta, kv);
    }
    if (*comp) {
      const Model model = load_model(c_model);
      const auto t0 = Clock::now();
      const Tensor image = decode_png(read_file(c_in));
      CompressOptions opt;
      opt.drop_blocks = c_drop;
      const auto r = compress(model, image, opt);
      write_file(c_out, r.bytes);
      const double secs = seconds_since(t0);
      std::printf("bytes=%zu bpp=%.6f seconds=%.6f\n", r.bytes.size(),
                  bpp(r.bytes.size(), image.width(), image.height()), secs);
      return kExitOk;
    }
    if (*decomp) {
      const Model model = load_model(d_model);
      const auto t0 = Clock::now();
      const auto d = decompress(model, read_file(d_in));
      write_png(d_out, d.image);
      std::printf("height=%d width=%d seconds=%.6f\n", d.image.height(), d.image.width(),
                  seconds_since(t0));
      return kExitOk;
    }
    if (*eval) {
      const Model model = load_model(e_model);
      const auto rows = eval_corpus(model, e_corpus, e_label, e_drop, e_jobs, !e_no_timing);
      write_text(e_out, format_rd_csv(rows));
      return kExitOk;
    }
    if (*bench) {
      fs::create_directories(b_out);
      const std::vector<int> qualities = parse_qualities(b_qualities);
      std::vector<RdRow> rows;
      for (const auto& path : b_models) {
        const Model model = load_model(path);
        const std::string label =
            b_models.size() == 1 ? "msic" : "msic@" + fs::path(path).stem().string();
        const auto r = eval_corpus(model, b_corpus, label, 0, b_jobs, !b_no_timing);
        rows.insert(rows.end(), r.begin(), r.end());
      }
      const fs::path work = fs::path(b_out) / "work";
      for (const ExternalCodec& codec : {ExternalCodec{"jpeg", b_jpeg}, ExternalCodec{"webp", b_webp},
                                         ExternalCodec{"bpg", b_bpg}}) {
        if (codec.command.empty()) continue;
        if (!executable_available(codec.command)) {
          warn_once("bench: skipping " + codec.name + ", command not found: " + codec.command);
          continue;
        }
        fs::create_directories(work);
        const auto r = bench_external(codec, b_corpus, qualities, work.string(), !b_no_timing);
        rows.insert(rows.end(), r.begin(), r.end());
      }
      const std::string csv = format_rd_csv(rows);
      write_text((fs::path(b_out) / "bench.csv").string(), csv);
      write_text((fs::path(b_out) / "rd.svg").string(), render_rd_svg(parse_rd_csv(csv)));
      return kExitOk;
    }
    if (*plot) {
      write_text(p_out, render_rd_svg(parse_rd_csv(read_text(p_csv))));
      return kExitOk;
    }
    if (*make) {
      if (m_count < 0 || m_height < 1 || m_width < 1) throw UsageError("make-corpus: bad size");
      write_corpus(m_out, make_toy_corpus(m_count, m_height, m_width, m_seed));
      return kExitOk;
    }
  } catch (...) {
    return map_exception();
  }
  return kExitUsage;
}

}  // namespace msic::cli
