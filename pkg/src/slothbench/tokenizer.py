"""Greedy longest-prefix subword tokenizer, insertion charset and POS lexicon."""

from __future__ import annotations

import re
import string
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

from . import lexicon
from .errors import ContractError, UnsupportedCharacterError

FORMAT_LINE = "#v1"

PAD, SOS, EOS = "<pad>", "<sos>", "<eos>"
SPECIALS = (PAD, SOS, EOS)
SPACE = " "
PUNCTUATION = (".", ",", "?", "!", "'", "-")
OTHER = "OTHER"

_WORD_RE = re.compile(r"\S+")


@dataclass(frozen=True)
class CharSet:
    """Characters a character-level mutation may insert, in enumeration order."""

    characters: tuple = tuple(string.ascii_lowercase + string.ascii_uppercase + string.digits)

    def __post_init__(self):
        if len(set(self.characters)) != len(self.characters):
            raise ContractError("CharSet contains duplicates")

    def __len__(self):
        return len(self.characters)

    def __iter__(self):
        return iter(self.characters)

    def __contains__(self, c):
        return c in self.characters


CHARSET = CharSet()


class Vocabulary:
    """Ordered subword inventory with dense ids."""

    def __init__(self, entries):
        self.entries = tuple(entries)
        self.id_of = {tok: i for i, tok in enumerate(self.entries)}
        if len(self.id_of) != len(self.entries):
            raise ContractError("duplicate vocabulary entries")
        missing = [s for s in SPECIALS if s not in self.id_of]
        if missing:
            raise ContractError(f"vocabulary lacks special tokens {missing}")
        self.pad_id = self.id_of[PAD]
        self.sos_id = self.id_of[SOS]
        self.eos_id = self.id_of[EOS]
        self.special_ids = frozenset((self.pad_id, self.sos_id, self.eos_id))
        self.space_id = self.id_of.get(SPACE)
        self._max_len = max(len(e) for e in self.entries if e not in SPECIALS)
        self.supported = frozenset(e for e in self.entries if len(e) == 1)

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, idx):
        return self.entries[idx]

    def __eq__(self, other):
        return isinstance(other, Vocabulary) and self.entries == other.entries

    def __hash__(self):
        return hash(self.entries)

    def is_word_token(self, idx: int) -> bool:
        """True for ids that are neither special nor whitespace."""
        return idx not in self.special_ids and idx != self.space_id

    @classmethod
    def build(cls, words, charset: CharSet = CHARSET) -> "Vocabulary":
        entries = list(SPECIALS) + list(charset.characters) + [SPACE] + list(PUNCTUATION)
        entries += [w for w in words if w not in entries]
        return cls(entries)

    @classmethod
    def load(cls, path) -> "Vocabulary":
        lines = Path(path).read_text(encoding="utf-8").split("\n")
        if not lines or lines[0].strip() != FORMAT_LINE:
            raise ContractError(f"{path}: missing {FORMAT_LINE} header")
        entries = [ln for ln in lines[1:] if ln != ""]
        return cls(entries)

    def save(self, path) -> None:
        body = "\n".join(self.entries)
        Path(path).write_text(f"{FORMAT_LINE}\n{body}\n", encoding="utf-8")


@dataclass(frozen=True)
class TokenSequence:
    surface: str
    tokens: tuple
    spans: tuple

    def __len__(self):
        return len(self.tokens)

    def words(self) -> list:
        """(start, end) character spans of whitespace-delimited words."""
        return [m.span() for m in _WORD_RE.finditer(self.surface)]

    def word_texts(self) -> list:
        return self.surface.split()

    def word_of_token(self) -> list:
        """Word index for each token, ``None`` for whitespace tokens."""
        spans = self.words()
        out = []
        w = 0
        for start, end in self.spans:
            while w < len(spans) and spans[w][1] <= start:
                w += 1
            if w < len(spans) and spans[w][0] <= start and end <= spans[w][1]:
                out.append(w)
            else:
                out.append(None)
        return out


def tokenize(text: str, vocab: Vocabulary) -> TokenSequence:
    """Consume the longest vocabulary entry at each position."""
    for offset, ch in enumerate(text):
        if ch not in vocab.supported:
            raise UnsupportedCharacterError(ch, offset)
    tokens, spans = [], []
    i, n = 0, len(text)
    id_of = vocab.id_of
    while i < n:
        for length in range(min(vocab._max_len, n - i), 0, -1):
            idx = id_of.get(text[i:i + length])
            if idx is not None and idx not in vocab.special_ids:
                break
        tokens.append(idx)
        spans.append((i, i + length))
        i += length
    return TokenSequence(text, tuple(tokens), tuple(spans))


def detokenize(tokens, vocab: Vocabulary) -> str:
    tokens = list(tokens)
    if tokens and tokens[-1] == vocab.eos_id:
        tokens = tokens[:-1]
    parts = []
    for idx in tokens:
        if not 0 <= idx < len(vocab):
            raise IndexError(f"token id {idx} out of range [0, {len(vocab)})")
        if idx in vocab.special_ids:
            raise ContractError(f"special id {idx} inside token sequence")
        parts.append(vocab.entries[idx])
    return "".join(parts)


def from_ids(tokens, vocab: Vocabulary) -> TokenSequence:
    """Build a TokenSequence from ids, recomputing surface and spans."""
    surface = detokenize(tokens, vocab)
    spans, pos = [], 0
    tokens = [t for t in tokens if t != vocab.eos_id]
    for idx in tokens:
        end = pos + len(vocab.entries[idx])
        spans.append((pos, end))
        pos = end
    return TokenSequence(surface, tuple(tokens), tuple(spans))


class PosLexicon:
    """Static word -> coarse POS tag table with per-tag buckets."""

    def __init__(self, pairs):
        self.tag_of = {}
        self.buckets = {tag: [] for tag in lexicon.TAGS}
        for word, tag in pairs:
            if tag not in self.buckets:
                raise ContractError(f"unknown POS tag {tag!r}")
            if word in self.tag_of:
                raise ContractError(f"word {word!r} tagged twice")
            self.tag_of[word] = tag
            self.buckets[tag].append(word)

    def __len__(self):
        return len(self.tag_of)

    def tag(self, word: str) -> str:
        if len(word) < 2:
            return OTHER
        return self.tag_of.get(word, OTHER)

    def covers(self, vocab: Vocabulary) -> bool:
        return all(
            e in self.tag_of
            for e in vocab.entries
            if e not in SPECIALS and len(e) > 1
        )

    @classmethod
    def load(cls, path) -> "PosLexicon":
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        if not lines or lines[0].strip() != FORMAT_LINE:
            raise ContractError(f"{path}: missing {FORMAT_LINE} header")
        pairs = []
        for ln in lines[1:]:
            if not ln.strip() or ln.startswith("#"):
                continue
            word, tag = ln.split("\t")
            pairs.append((word, tag))
        return cls(pairs)

    def save(self, path) -> None:
        body = "".join(f"{w}\t{t}\n" for t in lexicon.TAGS for w in self.buckets[t])
        Path(path).write_text(f"{FORMAT_LINE}\n{body}", encoding="utf-8")


def pos_tags(seq: TokenSequence, lex: PosLexicon) -> list:
    return [lex.tag(w) for w in seq.word_texts()]


@lru_cache(maxsize=None)
def default_vocabulary() -> Vocabulary:
    with resources.as_file(resources.files("slothbench") / "data" / "vocab.txt") as p:
        return Vocabulary.load(p)


@lru_cache(maxsize=None)
def default_lexicon() -> PosLexicon:
    with resources.as_file(resources.files("slothbench") / "data" / "pos_lexicon.tsv") as p:
        return PosLexicon.load(p)
