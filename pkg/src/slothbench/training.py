"""SGD training of the toy translator and held-out evaluation."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .errors import ContractError, TrainingDivergedError
from .model import EOS_STOP, ModelConfig, ModelWeights, Seq2Seq
from .tokenizer import Vocabulary, tokenize

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    # reference recipe
    epochs: int = 30
    learning_rate: float = 0.05
    batch_size: int = 16
    rng_seed: int = 7
    clip_norm: float = 5.0


def encode_pairs(pairs, vocab: Vocabulary) -> list:
    """Text pairs -> (source ids, target ids + EOS)."""
    out = []
    for src, tgt in pairs:
        s = tokenize(src, vocab).tokens
        t = tokenize(tgt, vocab).tokens + (vocab.eos_id,)
        out.append((s, t))
    return out


def _pad_batch(batch, config: ModelConfig):
    bsz = len(batch)
    m = max(len(s) for s, _ in batch)
    n = max(len(t) for _, t in batch)
    src = np.full((bsz, m), config.eos_id, dtype=np.int64)
    src_mask = np.zeros((bsz, m), dtype=np.float32)
    tgt_in = np.full((bsz, n), config.eos_id, dtype=np.int64)
    tgt_out = np.full((bsz, n), config.eos_id, dtype=np.int64)
    tgt_mask = np.zeros((bsz, n), dtype=np.float32)
    for i, (s, t) in enumerate(batch):
        src[i, : len(s)] = s
        src_mask[i, : len(s)] = 1.0
        tgt_in[i, 0] = config.sos_id
        tgt_in[i, 1: len(t)] = t[:-1]
        tgt_out[i, : len(t)] = t
        tgt_mask[i, : len(t)] = 1.0
    return src, src_mask, tgt_in, tgt_out, tgt_mask


def batch_step(model: Seq2Seq, weights: ModelWeights, batch, lr: float, clip_norm: float | None = None) -> float:
    """One SGD step in place on ``weights``; returns the batch loss."""
    arrays = _pad_batch(batch, model.config)
    with ad.Tape() as tape:
        params = {n: tape.leaf(a) for n, a in weights.items()}
        loss = model.batch_loss(params, *arrays)
    grads = tape.backward(loss)
    value = loss.item()
    if not np.isfinite(value):
        raise TrainingDivergedError(f"loss became {value}")
    scale = 1.0
    if clip_norm:
        norm = float(np.sqrt(sum(float(np.sum(g.data.astype(np.float64) ** 2)) for g in grads.values())))
        if norm > clip_norm:
            scale = clip_norm / norm
    step = np.float32(lr * scale)
    for name, leaf in params.items():
        arr = getattr(weights, name)
        arr -= step * grads[leaf].data
    return value


def train(corpus, weights: ModelWeights, config: ModelConfig, hyper: TrainConfig = TrainConfig(), progress=None):
    """Train on encoded pairs; returns (new weights, per-epoch mean loss).

    ``corpus`` holds (source ids, target ids ending in EOS). The input weights
    are not modified. Batch order comes from ``hyper.rng_seed`` only.
    """
    if not corpus:
        raise ContractError("training corpus is empty")
    weights = weights.copy()
    model = Seq2Seq(weights, config)
    rng = np.random.default_rng(hyper.rng_seed)
    history = []
    for epoch in range(hyper.epochs):
        order = rng.permutation(len(corpus))
        losses = []
        for start in range(0, len(order), hyper.batch_size):
            batch = [corpus[i] for i in order[start:start + hyper.batch_size]]
            losses.append(batch_step(model, weights, batch, hyper.learning_rate, hyper.clip_norm))
        history.append(float(np.mean(losses)))
        log.info("epoch %d loss %.4f", epoch + 1, history[-1])
        if progress is not None:
            progress(epoch + 1, history[-1])
    return weights, history


def corpus_loss(model: Seq2Seq, corpus, batch_size: int = 64) -> float:
    total, count = 0.0, 0
    with ad.precision(np.float32):
        p = model.params()
        for start in range(0, len(corpus), batch_size):
            batch = corpus[start:start + batch_size]
            arrays = _pad_batch(batch, model.config)
            total += model.batch_loss(p, *arrays).item() * len(batch)
            count += len(batch)
    return total / count


def heldout_accuracy(model: Seq2Seq, corpus) -> tuple:
    """(teacher-forced next-token accuracy, fraction of greedy decodes that
    stop by EOS at exactly the reference length)."""
    correct = total = exact = 0
    for src, tgt in corpus:
        state = model.encode(src)
        probs = model.teacher_forced_probs(state, tgt)
        pred = probs.data.argmax(axis=1)
        correct += int((pred == np.asarray(tgt)).sum())
        total += len(tgt)
        trace = model.decode_greedy(state)
        if trace.terminated_by == EOS_STOP and len(trace.output_ids) == len(tgt):
            exact += 1
    return correct / total, exact / len(corpus)
