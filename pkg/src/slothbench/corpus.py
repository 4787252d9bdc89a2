"""Synthetic parallel corpus: map every word through a fixed bijection, reverse."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from . import lexicon

MIN_WORDS, MAX_WORDS = 3, 12
# word i of the content lexicon translates to word (i + SHIFT) mod 64
SHIFT = 17

_WORDS = lexicon.content_words()
_FORWARD = {w: _WORDS[(i + SHIFT) % len(_WORDS)] for i, w in enumerate(_WORDS)}
_BACKWARD = {v: k for k, v in _FORWARD.items()}


def translate_word(word: str) -> str:
    return _FORWARD[word]


def untranslate_word(word: str) -> str:
    return _BACKWARD[word]


def reference_translation(source: str) -> str:
    return " ".join(translate_word(w) for w in reversed(source.split()))


def gen_synthetic_corpus(seed, n_pairs: int) -> list:
    """``n_pairs`` (source, target) sentence pairs, deterministic in ``seed``.

    ``seed`` may be an int or a sequence of ints (numpy SeedSequence entropy).
    Targets are plain text; EOS is appended at tokenization time.
    """
    if n_pairs < 1:
        raise ValueError("n_pairs must be >= 1")
    rng = np.random.default_rng(seed)
    pairs = []
    for _ in range(n_pairs):
        k = int(rng.integers(MIN_WORDS, MAX_WORDS + 1))
        words = [_WORDS[i] for i in rng.integers(0, len(_WORDS), size=k)]
        source = " ".join(words)
        pairs.append((source, reference_translation(source)))
    return pairs


def heldout_pairs(seed, n: int, exclude) -> list:
    """``n`` pairs drawn from a stream independent of ``seed``'s training stream.

    Sources present in ``exclude`` are skipped, so held-out seeds never overlap
    the training corpus.
    """
    seen = set(exclude)
    rng_seed = [int(seed), 1]
    out = []
    batch = 0
    while len(out) < n:
        for src, tgt in gen_synthetic_corpus(rng_seed + [batch], max(n, 16)):
            if src not in seen:
                seen.add(src)
                out.append((src, tgt))
                if len(out) == n:
                    break
        batch += 1
    return out


def write_parallel(path, pairs) -> None:
    text = "".join(f"{s}\t{t}\n" for s, t in pairs)
    Path(path).write_text(text, encoding="utf-8")


def read_parallel(path) -> list:
    pairs = []
    for ln in Path(path).read_text(encoding="utf-8").splitlines():
        if not ln.strip():
            continue
        src, tgt = ln.split("\t")
        pairs.append((src, tgt))
    return pairs
