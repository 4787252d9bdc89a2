import json

import numpy as np
import pytest

from slothbench.errors import DimensionMismatchError, MagicMismatchError, TruncatedFileError, WeightFileError
from slothbench.serialize import DETECTOR_MAGIC, VERSION, WEIGHTS_MAGIC, load_model, load_weights, read_envelope, save_weights

from .conftest import small_model


@pytest.fixture
def saved(tmp_path, tiny):
    path = tmp_path / "w.nmts"
    save_weights(path, tiny.weights, tiny.config)
    return path


def test_round_trip_bit_exact(saved, tiny):
    weights, config = load_weights(saved)
    assert config == tiny.config
    for (n, a), (m, b) in zip(tiny.weights.items(), weights.items()):
        assert n == m and a.tobytes() == b.tobytes()


def test_layout(saved):
    raw = saved.read_bytes()
    assert raw[:4] == WEIGHTS_MAGIC and raw[4] == VERSION
    header = json.loads(raw[5:raw.index(b"\n")])
    assert header["hidden_dim"] == 12 and header["embed_dim"] == 8
    assert [n for n, _ in header["tensors"]][0] == "src_embed"


def test_magic_mismatch(saved):
    raw = bytearray(saved.read_bytes())
    raw[:4] = b"XXXX"
    saved.write_bytes(bytes(raw))
    with pytest.raises(MagicMismatchError):
        load_weights(saved)


def test_detector_magic_refused_as_weights(saved):
    with pytest.raises(MagicMismatchError):
        read_envelope(saved, DETECTOR_MAGIC)


def test_dimension_mismatch(saved, vocab):
    other = small_model(vocab, hidden_dim=16)
    with pytest.raises(DimensionMismatchError):
        load_weights(saved, other.config)


@pytest.mark.parametrize("cut", [3, 30, -1, -100])
def test_truncated(saved, cut):
    raw = saved.read_bytes()
    saved.write_bytes(raw[:cut])
    with pytest.raises(TruncatedFileError):
        load_weights(saved)


def test_trailing_bytes_and_version(saved):
    raw = saved.read_bytes()
    saved.write_bytes(raw + b"\x00")
    with pytest.raises(WeightFileError):
        load_weights(saved)
    saved.write_bytes(raw[:4] + b"\x02" + raw[5:])
    with pytest.raises(WeightFileError):
        load_weights(saved)


def test_errors_are_distinct():
    assert len({MagicMismatchError, DimensionMismatchError, TruncatedFileError}) == 3
    assert not issubclass(MagicMismatchError, TruncatedFileError)


def test_load_model_overrides(saved):
    model = load_model(saved, num_beams=3, max_length=7)
    assert model.config.num_beams == 3 and model.config.max_length == 7
    assert np.array_equal(model.translate([5, 6]).output_ids, model.translate([5, 6]).output_ids)
