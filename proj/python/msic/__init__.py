# Copyright 2026 The MSIC Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Multi-scale learned image codec with a progressive context model."""

from ._msic import (
    ConfigError,
    CorruptionError,
    Error,
    FormatError,
    Model,
    ModelMismatchError,
    NumericError,
    bpp,
    compress,
    decode_symbols,
    decompress,
    encode_symbols,
    make_toy_image,
    ms_ssim,
    quantize_probs,
    quantized_features,
    read_header,
    read_png,
    reconstruct,
    round_hard,
    round_soft,
    write_png,
)

__all__ = [
    "ConfigError",
    "CorruptionError",
    "Error",
    "FormatError",
    "Model",
    "ModelMismatchError",
    "NumericError",
    "bpp",
    "compress",
    "decode_symbols",
    "decompress",
    "encode_symbols",
    "make_toy_image",
    "ms_ssim",
    "quantize_probs",
    "quantized_features",
    "read_header",
    "read_png",
    "reconstruct",
    "round_hard",
    "round_soft",
    "write_png",
]
