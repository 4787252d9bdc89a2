"""Linear hinge-loss filter over mean-pooled encoder states."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, EmptyInputError, InsufficientDataError
from .model import DecodeTrace, EncoderState, Seq2Seq
from .serialize import DETECTOR_MAGIC, read_envelope, write_envelope

ACCEPT = "ACCEPT"
REJECT = "REJECT"
MIN_PER_CLASS = 5


def featurize(state: EncoderState) -> np.ndarray:
    """Column-wise mean of the encoder states."""
    H = np.asarray(state.H if isinstance(state, EncoderState) else state)
    if H.ndim != 2 or H.shape[0] == 0:
        raise EmptyInputError("featurize needs at least one encoder row")
    return H.mean(axis=0)


@dataclass
class DetectorModel:
    weight: np.ndarray
    bias: float
    threshold: float = 0.0

    def margin(self, features) -> np.ndarray:
        return np.asarray(features) @ self.weight + self.bias

    def decide(self, features) -> str:
        return REJECT if float(self.margin(features)) > self.threshold else ACCEPT

    def save(self, path, meta: dict | None = None) -> None:
        header = {"hidden_dim": int(self.weight.shape[0]), "meta": meta or {}}
        tensors = [
            ("weight", self.weight),
            ("bias", np.array([self.bias])),
            ("threshold", np.array([self.threshold])),
        ]
        write_envelope(path, DETECTOR_MAGIC, header, tensors)

    @classmethod
    def load(cls, path):
        """Returns (detector, meta)."""
        header, tensors = read_envelope(path, DETECTOR_MAGIC)
        t = dict(tensors)
        det = cls(t["weight"].astype(np.float64), float(t["bias"][0]), float(t["threshold"][0]))
        return det, header.get("meta", {})


def auc(scores_positive, scores_negative) -> float:
    """P(random positive outscores random negative), ties count one half."""
    pos = np.asarray(scores_positive, dtype=np.float64)
    neg = np.asarray(scores_negative, dtype=np.float64)
    if pos.size == 0 or neg.size == 0:
        raise ContractError("auc needs both classes")
    greater = (pos[:, None] > neg[None, :]).sum()
    ties = (pos[:, None] == neg[None, :]).sum()
    return float((greater + 0.5 * ties) / (pos.size * neg.size))


def _split(n: int, rng) -> tuple:
    order = rng.permutation(n)
    cut = int(round(0.8 * n))
    return order[:cut], order[cut:]


def fit_hinge(X, y, seed, epochs: int = 200, lr0: float = 0.1, penalty: float = 1e-3):
    """Stochastic subgradient descent on L2-regularised hinge loss, y in {-1, +1}."""
    rng = np.random.default_rng(seed)
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    w = np.zeros(X.shape[1])
    b = 0.0
    for epoch in range(1, epochs + 1):
        lr = lr0 / np.sqrt(epoch)
        for i in rng.permutation(len(y)):
            if y[i] * (X[i] @ w + b) < 1.0:
                w -= lr * (penalty * w - y[i] * X[i])
                b += lr * y[i]
            else:
                w -= lr * penalty * w
    return w, b


def train_detector(normal, abnormal, split_seed: int = 0, epochs: int = 200):
    """Stratified 80/20 split, fit, and held-out Accuracy / AUC.

    Abnormal inputs are the positive class (margin above threshold rejects).
    Returns (DetectorModel, metrics dict).
    """
    normal = np.asarray(normal, dtype=np.float64)
    abnormal = np.asarray(abnormal, dtype=np.float64)
    if len(normal) < MIN_PER_CLASS or len(abnormal) < MIN_PER_CLASS:
        raise InsufficientDataError(
            f"need >= {MIN_PER_CLASS} examples per class, got {len(normal)} normal / {len(abnormal)} abnormal"
        )
    rng = np.random.default_rng(split_seed)
    n_tr, n_te = _split(len(normal), rng)
    a_tr, a_te = _split(len(abnormal), rng)
    X = np.concatenate([normal[n_tr], abnormal[a_tr]])
    y = np.concatenate([-np.ones(len(n_tr)), np.ones(len(a_tr))])
    w, b = fit_hinge(X, y, rng.integers(2**63), epochs=epochs)
    det = DetectorModel(w, float(b), 0.0)
    metrics = evaluate_detector(det, normal[n_te], abnormal[a_te])
    metrics.update(n_train=len(y), n_test=len(n_te) + len(a_te))
    return det, metrics


def evaluate_detector(det: DetectorModel, normal, abnormal) -> dict:
    normal = np.asarray(normal, dtype=np.float64)
    abnormal = np.asarray(abnormal, dtype=np.float64)
    s_norm = det.margin(normal)
    s_abn = det.margin(abnormal)
    correct = int((s_norm <= det.threshold).sum() + (s_abn > det.threshold).sum())
    return {
        "accuracy": correct / (len(normal) + len(abnormal)),
        "auc": auc(s_abn, s_norm),
    }


@dataclass
class FilterResult:
    decision: str
    overhead_ns: int
    trace: DecodeTrace | None


def runtime_filter(tokens, model: Seq2Seq, detector: DetectorModel) -> FilterResult:
    """Screen an input on the encoder pass the translation needs anyway.

    Rejected inputs never reach the decoder; accepted ones are decoded from
    the same encoder state. ``overhead_ns`` covers pooling and scoring only.
    """
    state = model.encode(tokens)
    t0 = time.perf_counter_ns()
    decision = detector.decide(featurize(state))
    overhead = time.perf_counter_ns() - t0
    trace = model.decode(state) if decision == ACCEPT else None
    return FilterResult(decision, overhead, trace)
