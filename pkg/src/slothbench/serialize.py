"""Versioned binary envelope for weights and detectors.

Layout: 4 magic bytes, one version byte, a one-line UTF-8 JSON header, then
each declared tensor as little-endian float32 in header order.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import DimensionMismatchError, MagicMismatchError, TruncatedFileError, WeightFileError
from .model import ModelConfig, ModelWeights, Seq2Seq

VERSION = 1
WEIGHTS_MAGIC = b"NMTS"
DETECTOR_MAGIC = b"NMTD"

_LE_F32 = np.dtype("<f4")


def write_envelope(path, magic: bytes, header: dict, tensors) -> None:
    header = dict(header)
    header["tensors"] = [[name, list(arr.shape)] for name, arr in tensors]
    line = json.dumps(header, sort_keys=True).encode("utf-8") + b"\n"
    with open(path, "wb") as fh:
        fh.write(magic + bytes([VERSION]) + line)
        for _, arr in tensors:
            fh.write(np.ascontiguousarray(arr, dtype=_LE_F32).tobytes())


def read_envelope(path, magic: bytes):
    """Returns (header, [(name, float32 array), ...])."""
    raw = Path(path).read_bytes()
    if len(raw) < 5:
        raise TruncatedFileError(f"{path}: file too short for a header")
    if raw[:4] != magic:
        raise MagicMismatchError(f"{path}: expected magic {magic!r}, found {raw[:4]!r}")
    if raw[4] != VERSION:
        raise WeightFileError(f"{path}: unsupported version {raw[4]}")
    end = raw.find(b"\n", 5)
    if end < 0:
        raise TruncatedFileError(f"{path}: header not terminated")
    try:
        header = json.loads(raw[5:end].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise WeightFileError(f"{path}: unreadable header ({exc})") from None
    pos = end + 1
    tensors = []
    for name, shape in header["tensors"]:
        n = int(np.prod(shape)) if shape else 1
        nbytes = 4 * n
        if pos + nbytes > len(raw):
            raise TruncatedFileError(f"{path}: tensor {name} truncated")
        arr = np.frombuffer(raw, dtype=_LE_F32, count=n, offset=pos).astype(np.float32).reshape(shape)
        tensors.append((name, arr))
        pos += nbytes
    if pos != len(raw):
        raise WeightFileError(f"{path}: {len(raw) - pos} trailing bytes")
    return header, tensors


def save_weights(path, weights: ModelWeights, config: ModelConfig) -> None:
    header = {
        "vocab_size": config.vocab_size,
        "embed_dim": config.embed_dim,
        "hidden_dim": config.hidden_dim,
        "config": config.to_dict(),
    }
    write_envelope(path, WEIGHTS_MAGIC, header, weights.items())


def load_weights(path, config: ModelConfig | None = None):
    """Load (weights, config). With ``config`` given, dims must agree."""
    header, tensors = read_envelope(path, WEIGHTS_MAGIC)
    stored = ModelConfig(**header["config"])
    if config is not None:
        for key in ("vocab_size", "embed_dim", "hidden_dim"):
            if header[key] != getattr(config, key):
                raise DimensionMismatchError(
                    f"{path}: {key} is {header[key]} in file, {getattr(config, key)} in config"
                )
    else:
        config = stored
    names = [n for n, _ in tensors]
    if names != ModelWeights.names():
        raise WeightFileError(f"{path}: unexpected tensor list {names}")
    weights = ModelWeights(**dict(tensors))
    for name, shape in ModelWeights.expected_shapes(config).items():
        if getattr(weights, name).shape != shape:
            raise DimensionMismatchError(f"{path}: tensor {name} has shape {getattr(weights, name).shape}")
    return weights, config


def load_model(path, **overrides) -> Seq2Seq:
    weights, config = load_weights(path)
    if overrides:
        config = config.replace(**overrides)
    return Seq2Seq(weights, config)
