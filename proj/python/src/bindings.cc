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

// Python bindings for the msic codec.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <string>
#include <vector>

#include "msic/codec.h"
#include "msic/container.h"
#include "msic/corpus.h"
#include "msic/errors.h"
#include "msic/metrics.h"
#include "msic/png_io.h"
#include "msic/quantizer.h"
#include "msic/range_coder.h"

namespace py = pybind11;

namespace msic {
namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;
using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

template <typename T, typename Array>
BasicTensor<T> to_tensor(const Array& a) {
  if (a.ndim() != 3) throw ConfigError("expected an array of shape (channels, height, width)");
  BasicTensor<T> t(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)),
                   static_cast<int>(a.shape(2)));
  std::memcpy(t.storage().data(), a.data(), t.size() * sizeof(T));
  return t;
}

template <typename T>
py::array_t<T> to_array(const BasicTensor<T>& t) {
  py::array_t<T> a({t.channels(), t.height(), t.width()});
  std::memcpy(a.mutable_data(), t.storage().data(), t.size() * sizeof(T));
  return a;
}

std::vector<uint8_t> to_vector(const py::bytes& b) {
  const std::string s = b;
  return {s.begin(), s.end()};
}

py::bytes to_bytes(const std::vector<uint8_t>& v) {
  return py::bytes(reinterpret_cast<const char*>(v.data()), v.size());
}

py::list features_to_list(const QuantizedFeatures& f) {
  py::list out;
  for (const auto& m : f.maps) out.append(to_array(m));
  return out;
}

py::dict stats_to_dict(const CodingStats& s) {
  py::dict d;
  d["model_evaluations"] = s.model_evaluations;
  d["symbols"] = s.symbols;
  d["logprob_bits"] = s.logprob_bits;
  return d;
}

py::dict header_to_dict(const Header& h) {
  py::dict d;
  d["version"] = h.version;
  d["original_height"] = h.original_height;
  d["original_width"] = h.original_width;
  d["padded_height"] = h.padded_height;
  d["padded_width"] = h.padded_width;
  d["channels"] = std::vector<int>(h.channels.begin(), h.channels.end());
  d["levels"] = h.levels;
  d["blocks"] = h.blocks;
  d["dropped_blocks"] = h.dropped_blocks;
  uint64_t digest = 0;
  for (int i = 7; i >= 0; --i) digest = (digest << 8) | h.model_digest[i];
  d["model_digest"] = digest;
  d["payload_length"] = h.payload_length;
  d["header_size"] = h.size();
  return d;
}

CodecConfig config_from_kwargs(int scales, std::vector<int> channels, int levels, int hidden_width,
                               int depth) {
  CodecConfig c;
  c.scales = scales;
  c.channels = std::move(channels);
  c.levels = levels;
  c.hidden_width = hidden_width;
  c.depth = depth;
  c.validate();
  return c;
}

// Randomly initialized model with a histogram fitted on `images`; useful
// for smoke tests and for exercising the container path without training.
Model random_model(const CodecConfig& cfg, int blocks, int width, uint64_t seed,
                   const std::vector<FloatArray>& images) {
  Model m(cfg);
  m.ae.init(seed);
  CoderConfig cc{blocks, width};
  cc.validate();
  ContextModel<float> ctx(cfg.total_channels(), cfg.levels, cc.blocks, cc.width);
  ctx.init(seed + 1);
  std::vector<QuantizedFeatures> feats;
  for (const auto& img : images) feats.push_back(analyze_and_quantize(m, to_tensor<float>(img)));
  m.set_coder(cc, std::move(ctx), fit_histogram(feats, cfg.levels));
  return m;
}

std::vector<ProbTable> tables_from(const std::vector<std::vector<double>>& probs) {
  std::vector<ProbTable> tables;
  tables.reserve(probs.size());
  for (const auto& p : probs) tables.push_back(quantize_probs(p));
  return tables;
}

}  // namespace
}  // namespace msic

PYBIND11_MODULE(_msic, mod) {
  using namespace msic;
  mod.doc() = "Multi-scale learned image codec";

  auto error = py::register_exception<Error>(mod, "Error");
  py::register_exception<ConfigError>(mod, "ConfigError", error.ptr());
  auto format = py::register_exception<FormatError>(mod, "FormatError", error.ptr());
  py::register_exception<CorruptionError>(mod, "CorruptionError", format.ptr());
  py::register_exception<ModelMismatchError>(mod, "ModelMismatchError", error.ptr());
  py::register_exception<NumericError>(mod, "NumericError", error.ptr());

  py::class_<Model>(mod, "Model")
      .def_static("load", &load_model, py::arg("path"))
      .def_static("from_bytes", [](const py::bytes& b) { return deserialize_model(to_vector(b)); })
      .def_static(
          "random",
          [](int scales, std::vector<int> channels, int levels, int hidden_width, int depth,
             int blocks, int coder_width, uint64_t seed, const std::vector<FloatArray>& images) {
            return random_model(config_from_kwargs(scales, std::move(channels), levels, hidden_width, depth),
                                blocks, coder_width, seed, images);
          },
          py::arg("scales"), py::arg("channels"), py::arg("levels"), py::arg("hidden_width"),
          py::arg("depth"), py::arg("blocks"), py::arg("coder_width"), py::arg("seed"),
          py::arg("images"))
      .def("save", [](const Model& m, const std::string& path) { save_model(path, m); })
      .def("to_bytes", [](const Model& m) { return to_bytes(serialize_model(m)); })
      .def_property_readonly("digest", &model_digest)
      .def_property_readonly("has_coder", &Model::has_coder)
      .def_property_readonly("padding_multiple", &padding_multiple)
      .def_property_readonly("scales", [](const Model& m) { return m.config().scales; })
      .def_property_readonly("channels", [](const Model& m) { return m.config().channels; })
      .def_property_readonly("levels", [](const Model& m) { return m.config().levels; })
      .def_property_readonly("blocks", [](const Model& m) { return m.coder ? m.coder->blocks : 0; });

  mod.def(
      "compress",
      [](const Model& m, const FloatArray& image, int drop_blocks) {
        CompressOptions opt;
        opt.drop_blocks = drop_blocks;
        CompressResult r;
        {
          const Tensor t = to_tensor<float>(image);
          py::gil_scoped_release release;
          r = compress(m, t, opt);
        }
        return py::make_tuple(to_bytes(r.bytes), stats_to_dict(r.stats));
      },
      py::arg("model"), py::arg("image"), py::arg("drop_blocks") = 0,
      "Compresses a (3, H, W) float image in [0, 1]; returns (container bytes, stats).");
  mod.def(
      "decompress",
      [](const Model& m, const py::bytes& data) {
        const auto bytes = to_vector(data);
        DecompressResult r;
        {
          py::gil_scoped_release release;
          r = decompress(m, bytes);
        }
        return py::make_tuple(to_array(r.image), stats_to_dict(r.stats));
      },
      py::arg("model"), py::arg("data"), "Returns (image, stats).");
  mod.def(
      "reconstruct",
      [](const Model& m, const FloatArray& image) {
        return to_array(reconstruct_direct(m, to_tensor<float>(image)));
      },
      py::arg("model"), py::arg("image"));
  mod.def(
      "quantized_features",
      [](const Model& m, const FloatArray& image) {
        return features_to_list(analyze_and_quantize(m, to_tensor<float>(image)));
      },
      py::arg("model"), py::arg("image"));
  mod.def(
      "read_header",
      [](const py::bytes& data) { return header_to_dict(read_container(to_vector(data)).header); },
      py::arg("data"));

  mod.def(
      "ms_ssim",
      [](const DoubleArray& a, const DoubleArray& b) {
        return ms_ssim(to_tensor<double>(a), to_tensor<double>(b));
      },
      py::arg("a"), py::arg("b"));
  mod.def("bpp", &bpp, py::arg("file_bytes"), py::arg("width"), py::arg("height"));
  mod.def("round_hard", &round_hard, py::arg("x"));
  mod.def("round_soft", &round_soft, py::arg("x"), py::arg("alpha"));

  mod.def(
      "quantize_probs",
      [](const std::vector<double>& p) { return quantize_probs(p).cdf; }, py::arg("probs"),
      "16-bit CDF (N + 1 entries) for a probability vector.");
  mod.def(
      "encode_symbols",
      [](const std::vector<int>& symbols, const std::vector<std::vector<double>>& probs) {
        return to_bytes(encode_symbols(symbols, tables_from(probs)));
      },
      py::arg("symbols"), py::arg("probs"));
  mod.def(
      "decode_symbols",
      [](const py::bytes& data, const std::vector<std::vector<double>>& probs) {
        return decode_symbols(to_vector(data), tables_from(probs));
      },
      py::arg("data"), py::arg("probs"));

  mod.def("read_png", [](const std::string& path) { return to_array(read_png(path)); }, py::arg("path"));
  mod.def(
      "write_png",
      [](const std::string& path, const FloatArray& image) { write_png(path, to_tensor<float>(image)); },
      py::arg("path"), py::arg("image"));
  mod.def(
      "make_toy_image",
      [](int height, int width, uint64_t seed) { return to_array(make_toy_image(height, width, seed)); },
      py::arg("height"), py::arg("width"), py::arg("seed"));
}
