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

import math
import random

import numpy as np
import pytest

import msic


def small_model(seed=1, blocks=2):
    images = [msic.make_toy_image(32, 32, seed + i) for i in range(3)]
    return msic.Model.random(scales=3, channels=[1, 2, 4], levels=5, hidden_width=6, depth=4,
                             blocks=blocks, coder_width=6, seed=seed, images=images)


def test_round_hard_matches_ceil_rule():
    for x in np.linspace(-5, 5, 2001):
        assert msic.round_hard(x) == math.ceil(x - 0.5)
    assert msic.round_hard(0.5) == 0
    assert msic.round_hard(1.5) == 1


def test_round_soft_fixed_points():
    for k in range(-3, 4):
        assert msic.round_soft(k, 0.5) == pytest.approx(k, abs=1e-12)
        assert msic.round_soft(k + 0.5, 0.5) == pytest.approx(k + 0.5, abs=1e-12)


def test_ms_ssim_identity_and_range():
    rng = np.random.default_rng(0)
    a = rng.random((3, 64, 64))
    assert msic.ms_ssim(a, a) == pytest.approx(1.0, abs=1e-12)
    b = np.clip(a + 0.1 * rng.standard_normal(a.shape), 0, 1)
    value = msic.ms_ssim(a, b)
    assert 0.0 < value < 1.0


def test_range_coder_round_trip():
    rng = random.Random(3)
    probs, symbols = [], []
    for _ in range(500):
        p = [rng.random() + 1e-3 for _ in range(6)]
        total = sum(p)
        p = [v / total for v in p]
        probs.append(p)
        symbols.append(rng.randrange(6))
    data = msic.encode_symbols(symbols, probs)
    assert msic.decode_symbols(data, probs) == symbols
    cdf = msic.quantize_probs([0.5, 0.25, 0.25])
    assert cdf[0] == 0 and cdf[-1] == 1 << 16
    with pytest.raises(msic.CorruptionError):
        msic.decode_symbols(data[:-1], probs)


def test_compress_decompress_round_trip():
    model = small_model()
    assert model.has_coder
    image = msic.make_toy_image(45, 70, 9)
    data, stats = msic.compress(model, image)
    assert stats["model_evaluations"] == 2
    header = msic.read_header(data)
    assert header["original_height"] == 45 and header["original_width"] == 70
    assert header["model_digest"] == model.digest
    assert len(data) == header["header_size"] + header["payload_length"]
    decoded, dstats = msic.decompress(model, data)
    assert decoded.shape == (3, 45, 70)
    np.testing.assert_array_equal(decoded, msic.reconstruct(model, image))
    assert dstats["model_evaluations"] == 2


def test_model_bytes_round_trip_and_mismatch():
    model = small_model(seed=4)
    again = msic.Model.from_bytes(model.to_bytes())
    assert again.digest == model.digest
    data, _ = msic.compress(model, msic.make_toy_image(32, 32, 5))
    with pytest.raises(msic.ModelMismatchError):
        msic.decompress(small_model(seed=6), data)
    with pytest.raises(msic.FormatError):
        msic.decompress(model, b"XSIC" + data[4:])


def test_png_round_trip(tmp_path):
    image = msic.make_toy_image(20, 30, 2)
    path = str(tmp_path / "x.png")
    msic.write_png(path, image)
    back = msic.read_png(path)
    assert back.shape == (3, 20, 30)
    assert np.max(np.abs(back - image)) <= 0.5 / 255 + 1e-6
