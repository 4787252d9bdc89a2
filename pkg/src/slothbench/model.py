"""Tiny GRU encoder / attention GRU decoder translator.

The decode loop is the textbook one: start from SOS, feed back the argmax
token, stop on EOS or after ``max_length`` decoder steps. Every forward path
(training, greedy, beam, teacher forcing) goes through the same
:meth:`Seq2Seq._decoder_step`, so a teacher-forced replay of a greedy output
reproduces its per-step distributions.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .errors import ContractError, EmptyInputError

EOS_STOP = "EOS"
MAX_LENGTH_STOP = "MAX_LENGTH"


@dataclass(frozen=True)
class ModelConfig:
    vocab_size: int
    eos_id: int
    sos_id: int
    embed_dim: int = 32
    hidden_dim: int = 64
    max_length: int = 64
    num_beams: int = 1
    rng_seed: int = 0

    def __post_init__(self):
        if self.max_length < 1:
            raise ContractError(f"max_length must be >= 1, got {self.max_length}")
        if not 1 <= self.num_beams <= 5:
            raise ContractError(f"num_beams must be in 1..5, got {self.num_beams}")
        if self.eos_id == self.sos_id:
            raise ContractError("eos_id and sos_id must differ")
        for name in ("eos_id", "sos_id"):
            if not 0 <= getattr(self, name) < self.vocab_size:
                raise ContractError(f"{name} outside vocabulary")

    def replace(self, **changes) -> "ModelConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class ModelWeights:
    src_embed: np.ndarray
    tgt_embed: np.ndarray
    enc_wx: np.ndarray
    enc_wh: np.ndarray
    enc_b: np.ndarray
    dec_wx: np.ndarray
    dec_wh: np.ndarray
    dec_b: np.ndarray
    attn_w: np.ndarray
    attn_b: np.ndarray
    out_w: np.ndarray
    out_b: np.ndarray

    @staticmethod
    def names() -> list:
        return [f.name for f in dataclasses.fields(ModelWeights)]

    @staticmethod
    def expected_shapes(config: ModelConfig) -> dict:
        v, e, h = config.vocab_size, config.embed_dim, config.hidden_dim
        return {
            "src_embed": (v, e),
            "tgt_embed": (v, e),
            "enc_wx": (e, 3 * h),
            "enc_wh": (h, 3 * h),
            "enc_b": (3 * h,),
            "dec_wx": (e, 3 * h),
            "dec_wh": (h, 3 * h),
            "dec_b": (3 * h,),
            "attn_w": (2 * h, h),
            "attn_b": (h,),
            "out_w": (h, v),
            "out_b": (v,),
        }

    def items(self):
        return [(n, getattr(self, n)) for n in self.names()]

    def copy(self) -> "ModelWeights":
        return ModelWeights(**{n: a.copy() for n, a in self.items()})

    def check(self, config: ModelConfig) -> None:
        for name, shape in self.expected_shapes(config).items():
            arr = getattr(self, name)
            if arr.shape != shape:
                raise ContractError(f"weight {name} has shape {arr.shape}, expected {shape}")
            if not np.all(np.isfinite(arr)):
                raise ContractError(f"weight {name} has non-finite entries")

    @classmethod
    def init(cls, config: ModelConfig, seed: int | None = None) -> "ModelWeights":
        rng = np.random.default_rng(config.rng_seed if seed is None else seed)
        arrays = {}
        for name, shape in cls.expected_shapes(config).items():
            if name.endswith("embed"):
                arr = rng.normal(0.0, 1.0, size=shape)
            elif name.endswith("_b") or name == "out_b":
                arr = np.zeros(shape)
            else:
                bound = 1.0 / np.sqrt(shape[0])
                arr = rng.uniform(-bound, bound, size=shape)
            arrays[name] = arr.astype(np.float32)
        return cls(**arrays)


@dataclass
class EncoderState:
    H: np.ndarray

    def __len__(self):
        return self.H.shape[0]


@dataclass
class DecodeTrace:
    output_ids: tuple
    step_probs: np.ndarray
    loops: int
    terminated_by: str


def _gru_cell(gx: Tensor, h: Tensor, wh: Tensor, hd: int) -> Tensor:
    """GRU update given the precomputed input projection ``gx`` = x Wx + b."""
    gh = ad.matmul(h, wh)
    zr = ad.sigmoid(ad.add(gx[:, : 2 * hd], gh[:, : 2 * hd]))
    z, r = zr[:, :hd], zr[:, hd:]
    n = ad.tanh(ad.add(gx[:, 2 * hd:], ad.mul(r, gh[:, 2 * hd:])))
    return ad.add(n, ad.mul(z, ad.sub(h, n)))


class Seq2Seq:
    """Weights plus config; encode/decode are pure over immutable weights."""

    def __init__(self, weights: ModelWeights, config: ModelConfig):
        weights.check(config)
        self.weights = weights
        self.config = config

    def with_config(self, **changes) -> "Seq2Seq":
        return Seq2Seq(self.weights, self.config.replace(**changes))

    def params(self) -> dict:
        """Weights wrapped as tensors in the current precision."""
        return {n: Tensor(a) for n, a in self.weights.items()}

    # -- encoder ---------------------------------------------------------

    def _check_ids(self, ids) -> np.ndarray:
        ids = np.asarray(ids, dtype=np.int64)
        if ids.size == 0:
            raise EmptyInputError("cannot encode an empty token sequence")
        if ids.min() < 0 or ids.max() >= self.config.vocab_size:
            raise IndexError("token id outside the model vocabulary")
        return ids

    def embed_source(self, ids, p=None) -> Tensor:
        p = p or self.params()
        return ad.embedding(p["src_embed"], self._check_ids(ids))

    def encode_embedded(self, emb: Tensor, p=None, mask=None) -> Tensor:
        """Run the encoder over embeddings [m, E] or [B, m, E]; returns H."""
        p = p or self.params()
        hd = self.config.hidden_dim
        batched = emb.data.ndim == 3
        if not batched:
            emb = ad.reshape(emb, (1,) + emb.shape)
        bsz, m, e = emb.shape
        gx_all = ad.add(ad.matmul(ad.reshape(emb, (bsz * m, e)), p["enc_wx"]), p["enc_b"])
        gx_all = ad.reshape(gx_all, (bsz, m, 3 * hd))
        h = Tensor(np.zeros((bsz, hd)))
        states = []
        for t in range(m):
            h_new = _gru_cell(gx_all[:, t, :], h, p["enc_wh"], hd)
            if mask is not None:
                h_new = ad.add(h, ad.mul(Tensor(mask[:, t:t + 1]), ad.sub(h_new, h)))
            h = h_new
            states.append(h)
        H = ad.stack(states, axis=1)
        return H if batched else ad.reshape(H, (m, hd))

    def encode(self, ids) -> EncoderState:
        with ad.precision(np.float32):
            H = self.encode_embedded(self.embed_source(ids))
        return EncoderState(H.data)

    # -- decoder ---------------------------------------------------------

    def _decoder_step(self, p, prev_ids, s: Tensor, H: Tensor, bias=None):
        """One decoder timestep for a batch. H is [B, m, hd]; returns (s, probs)."""
        hd = self.config.hidden_dim
        bsz, m = H.shape[0], H.shape[1]
        e = ad.embedding(p["tgt_embed"], prev_ids)
        gx = ad.add(ad.matmul(e, p["dec_wx"]), p["dec_b"])
        s = _gru_cell(gx, s, p["dec_wh"], hd)
        scores = ad.reshape(ad.matmul(H, ad.reshape(s, (bsz, hd, 1))), (bsz, m))
        if bias is not None:
            scores = ad.add(scores, Tensor(bias))
        attn = ad.softmax(scores)
        ctx = ad.reshape(ad.matmul(ad.reshape(attn, (bsz, 1, m)), H), (bsz, hd))
        att = ad.tanh(ad.add(ad.matmul(ad.concat([s, ctx], axis=1), p["attn_w"]), p["attn_b"]))
        logits = ad.add(ad.matmul(att, p["out_w"]), p["out_b"])
        return s, ad.softmax(logits)

    def decode_greedy(self, state: EncoderState) -> DecodeTrace:
        cfg = self.config
        with ad.precision(np.float32):
            p = self.params()
            H = Tensor(state.H[None])
            s = Tensor(state.H[-1:])
            prev = np.array([cfg.sos_id])
            out, rows = [], []
            stop = MAX_LENGTH_STOP
            for _ in range(cfg.max_length):
                s, probs = self._decoder_step(p, prev, s, H)
                row = probs.data[0]
                tok = int(np.argmax(row))  # first max -> lowest id on ties
                rows.append(row)
                out.append(tok)
                if tok == cfg.eos_id:
                    stop = EOS_STOP
                    break
                prev = np.array([tok])
        return DecodeTrace(tuple(out), np.stack(rows), len(rows), stop)

    def decode_beam(self, state: EncoderState) -> DecodeTrace:
        """Beam search over summed log-probabilities, no length normalisation.

        Hypotheses that emit EOS are frozen and compete with live ones on raw
        score. The search ends when every hypothesis is frozen, when
        ``max_length`` steps have run, or as soon as no live hypothesis can
        outscore the best frozen one. Equal scores are ordered by the
        lexicographically smaller id sequence. ``loops`` counts timesteps, not
        beam expansions.
        """
        cfg = self.config
        k = cfg.num_beams
        # (score, ids, state, frozen)
        beam = [(0.0, (), Tensor(state.H[-1:]), False)]
        loops = 0
        with ad.precision(np.float32):
            p = self.params()
            while loops < cfg.max_length and not all(h[3] for h in beam):
                live = [h for h in beam if not h[3]]
                n = len(live)
                H = Tensor(np.repeat(state.H[None], n, axis=0))
                s = ad.concat([h[2] for h in live], axis=0)
                prev = np.array([h[1][-1] if h[1] else cfg.sos_id for h in live])
                s_new, probs = self._decoder_step(p, prev, s, H)
                loops += 1
                logp = np.log(probs.data.astype(np.float64) + ad.LOG_EPS)
                total = np.array([h[0] for h in live])[:, None] + logp
                flat = total.reshape(-1)
                cands = [(h[0], h[1], h[2], True) for h in beam if h[3]]
                if flat.size > k:
                    cut = np.partition(flat, flat.size - k)[flat.size - k]
                    picked = np.flatnonzero(flat >= cut)
                else:
                    picked = np.arange(flat.size)
                vocab = total.shape[1]
                for idx in picked:
                    row, tok = divmod(int(idx), vocab)
                    ids = live[row][1] + (tok,)
                    cands.append((float(flat[idx]), ids, s_new[row:row + 1], tok == cfg.eos_id))
                cands.sort(key=lambda h: (-h[0], h[1]))
                beam = cands[:k]
                if self._settled(beam, cfg.max_length - loops):
                    break
        finished = [h for h in beam if h[3]]
        pool = finished or beam
        best = min(pool, key=lambda h: (-h[0], h[1]))
        ids = best[1]
        probs = self.teacher_forced_probs(state, ids).data if ids else np.zeros((0, cfg.vocab_size))
        stop = EOS_STOP if ids and ids[-1] == cfg.eos_id else MAX_LENGTH_STOP
        return DecodeTrace(tuple(ids), probs, loops, stop)

    @staticmethod
    def _settled(beam, steps_left: int) -> bool:
        """True once no live hypothesis can still overtake the best finished one.

        Each step adds log(p + eps) <= log1p(eps) to a score, so a live score
        can grow by at most ``steps_left * log1p(eps)``.
        """
        finished = [h[0] for h in beam if h[3]]
        live = [h[0] for h in beam if not h[3]]
        if not finished or not live:
            return False
        return max(finished) > max(live) + steps_left * math.log1p(ad.LOG_EPS)

    def decode(self, state: EncoderState) -> DecodeTrace:
        if self.config.num_beams == 1:
            return self.decode_greedy(state)
        return self.decode_beam(state)

    def translate(self, ids) -> DecodeTrace:
        """Encode once, then decode with the configured search."""
        return self.decode(self.encode(ids))

    # -- teacher forcing -------------------------------------------------

    def decode_teacher_forced(self, H: Tensor, y, p=None, s0: Tensor | None = None) -> Tensor:
        """Per-step probabilities [n, V] when the decoder is fed SOS, y[:-1]."""
        y = [int(t) for t in y]
        if not y:
            raise ContractError("teacher forcing needs a nonempty output sequence")
        if min(y) < 0 or max(y) >= self.config.vocab_size:
            raise IndexError("output id outside the model vocabulary")
        p = p or self.params()
        m, hd = H.shape
        H3 = ad.reshape(H, (1, m, hd))
        s = H[m - 1:m] if s0 is None else s0
        rows = []
        prev = [self.config.sos_id] + y[:-1]
        for t in range(len(y)):
            s, probs = self._decoder_step(p, np.array([prev[t]]), s, H3)
            rows.append(probs)
        return ad.reshape(ad.stack(rows, axis=0), (len(y), self.config.vocab_size))

    def teacher_forced_probs(self, x, y, tape: ad.Tape | None = None):
        """Teacher-forced step probabilities.

        ``x`` is either token ids or an :class:`EncoderState`. With a tape, the
        source embeddings become a leaf on it and ``(probs, leaf)`` is
        returned so callers can differentiate with respect to them.
        """
        if isinstance(x, EncoderState):
            with ad.precision(np.float32):
                return self.decode_teacher_forced(Tensor(x.H), y)
        p = self.params()
        emb = self.embed_source(x, p)
        if tape is not None:
            emb = tape.leaf(emb.data)
        probs = self.decode_teacher_forced(self.encode_embedded(emb, p), y, p)
        return (probs, emb) if tape is not None else probs

    # -- training forward --------------------------------------------------

    def batch_loss(self, p, src, src_mask, tgt_in, tgt_out, tgt_mask) -> Tensor:
        """Cross-entropy of a padded batch (all arrays [B, len]).

        Token losses are summed along each target sequence and averaged over
        the batch.
        """
        emb = ad.embedding(p["src_embed"], src)
        H = self.encode_embedded(emb, p, mask=src_mask)
        bsz, m = src.shape
        lengths = src_mask.sum(axis=1).astype(np.int64)
        s = ad.getitem(H, (np.arange(bsz), lengths - 1))
        bias = np.where(src_mask > 0, 0.0, -1e9).astype(H.data.dtype)
        picks = []
        for t in range(tgt_in.shape[1]):
            s, probs = self._decoder_step(p, tgt_in[:, t], s, H, bias)
            picks.append(ad.pick(ad.log(probs), tgt_out[:, t]))
        ll = ad.mul(ad.stack(picks, axis=1), Tensor(tgt_mask))
        return ad.mul(ad.sum(ll), -1.0 / float(bsz))
