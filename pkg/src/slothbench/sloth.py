"""Gradient-guided search for inputs that keep the decoder running.

One iteration of :func:`generate_test`:

1. score every source token by the gradient of the EOS-delaying objective,
2. take the highest-|score| word not yet touched and build mutations of it,
3. decode every mutation and keep the one with the most decoder steps,
   provided it beats the incumbent.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .errors import ContractError, DegenerateOutputError, ExhaustedPositionsError
from .model import DecodeTrace, Seq2Seq
from .tokenizer import CHARSET, OTHER, CharSet, PosLexicon, TokenSequence, Vocabulary, tokenize


class Kind(str, enum.Enum):
    CHAR_INSERT = "char"
    TOKEN_REPLACE = "token"
    STRUCT_REPLACE = "struct"
    RANDOM = "random"


@dataclass
class ImportanceProfile:
    objective: float
    scores: np.ndarray
    grad_vectors: np.ndarray
    output_ids: tuple

    def __len__(self):
        return len(self.scores)


@dataclass(frozen=True)
class PerturbationCandidate:
    """One proposed single-word edit.

    ``payload`` is ``("insert", offset, char)``, ``("token", token_id)`` or
    ``("word", replacement)``. ``position`` is a token index for token
    payloads and a word index otherwise.
    """

    position: int
    kind: Kind
    payload: tuple
    predicted_delta_f: float | None = None

    def word_index(self, x: TokenSequence) -> int:
        if self.payload[0] == "token":
            return x.word_of_token()[self.position]
        return self.position

    def apply(self, x: TokenSequence, vocab: Vocabulary) -> TokenSequence:
        op = self.payload[0]
        if op == "token":
            start, end = x.spans[self.position]
            text = x.surface[:start] + vocab[self.payload[1]] + x.surface[end:]
        else:
            start, end = x.words()[self.position]
            if op == "insert":
                _, offset, char = self.payload
                cut = start + offset
                text = x.surface[:cut] + char + x.surface[cut:]
            else:
                text = x.surface[:start] + self.payload[1] + x.surface[end:]
        return tokenize(text, vocab)


@dataclass
class TestCase:
    __test__ = False  # not a pytest class

    seed: TokenSequence
    perturbed: TokenSequence
    epsilon: int
    epsilon_used: int
    kind: Kind
    seed_trace: DecodeTrace
    adv_trace: DecodeTrace
    candidates_evaluated: int = 0
    per_iteration_best_loops: list = field(default_factory=list)
    exhausted: bool = False
    adopted: list = field(default_factory=list)
    positions: list = field(default_factory=list)  # word index tried per iteration


# ---------------------------------------------------------------------------
# objective and importance
# ---------------------------------------------------------------------------


def objective(model: Seq2Seq, emb: Tensor, output_ids) -> Tensor:
    """Mean over decode steps of p(EOS) + p(emitted token), from embeddings."""
    p = model.params()
    H = model.encode_embedded(emb, p)
    probs = model.decode_teacher_forced(H, output_ids, p)
    n = len(output_ids)
    p_eos = ad.pick(probs, np.full(n, model.config.eos_id))
    p_out = ad.pick(probs, np.asarray(output_ids))
    return ad.mean(ad.add(p_eos, p_out))


def objective_and_importance(x: TokenSequence, model: Seq2Seq) -> ImportanceProfile:
    """Objective value and per-token importance (signed gradient sums).

    The output sequence is fixed to the current greedy decode so the graph is
    well defined; the gradient is taken with respect to the source embedding
    rows of ``x``.
    """
    if not x.tokens:
        raise ContractError("importance needs a nonempty input")
    greedy = model.with_config(num_beams=1)
    out = greedy.translate(x.tokens).output_ids
    if not out:
        raise DegenerateOutputError("decoder produced no output")
    with ad.precision(np.float32):
        with ad.Tape() as tape:
            emb = tape.leaf(greedy.embed_source(x.tokens).data)
            f = objective(greedy, emb, out)
        grad = tape.backward(f)[emb].data
    return ImportanceProfile(f.item(), grad.sum(axis=1), grad, tuple(out))


def rank_critical_tokens(profile: ImportanceProfile, exclude=()) -> list:
    """Positions by |score| descending, lower index first on ties."""
    exclude = set(exclude)
    order = sorted(
        (i for i in range(len(profile.scores)) if i not in exclude),
        key=lambda i: (-abs(float(profile.scores[i])), i),
    )
    if not order:
        raise ExhaustedPositionsError("every token position is excluded")
    return order


# ---------------------------------------------------------------------------
# mutation operators
# ---------------------------------------------------------------------------


def char_insert_candidates(x: TokenSequence, word_position: int, charset: CharSet = CHARSET) -> list:
    """All single-character insertions into one word: (l + 1) * |charset|."""
    start, end = x.words()[word_position]
    return [
        PerturbationCandidate(word_position, Kind.CHAR_INSERT, ("insert", offset, c))
        for offset in range(end - start + 1)
        for c in charset
    ]


def replacement_increments(model: Seq2Seq, src_id: int, grad_vector) -> np.ndarray:
    """First-order change of the objective for swapping ``src_id`` to every id."""
    table = model.weights.src_embed.astype(np.float64)
    return (table - table[src_id]) @ np.asarray(grad_vector, dtype=np.float64)


def eligible_replacements(vocab: Vocabulary, src_id: int) -> np.ndarray:
    mask = np.ones(len(vocab), dtype=bool)
    for i in vocab.special_ids:
        mask[i] = False
    if vocab.space_id is not None:
        mask[vocab.space_id] = False
    mask[src_id] = False
    return mask


def token_replace_candidate(
    x: TokenSequence, token_position: int, profile: ImportanceProfile, model: Seq2Seq, vocab: Vocabulary
) -> PerturbationCandidate:
    """Replacement whose first-order effect pushes the objective down the most."""
    src = x.tokens[token_position]
    inc = replacement_increments(model, src, profile.grad_vectors[token_position])
    masked = np.where(eligible_replacements(vocab, src), inc, np.inf)
    best = int(np.argmin(masked))
    return PerturbationCandidate(token_position, Kind.TOKEN_REPLACE, ("token", best), float(inc[best]))


def struct_replace_candidates(x: TokenSequence, word_position: int, lexicon: PosLexicon) -> list:
    """Same-tag lexicon substitutes for one word; empty for untagged words."""
    word = x.word_texts()[word_position]
    tag = lexicon.tag(word)
    if tag == OTHER:
        return []
    return [
        PerturbationCandidate(word_position, Kind.STRUCT_REPLACE, ("word", w))
        for w in lexicon.buckets[tag]
        if w != word
    ]


def random_mutation(
    x: TokenSequence,
    kind: Kind,
    rng_seed,
    vocab: Vocabulary,
    lexicon: PosLexicon | None = None,
    exclude_words=(),
    charset: CharSet = CHARSET,
) -> PerturbationCandidate | None:
    """Uniformly random edit of the given kind; ``None`` if nothing is eligible."""
    rng = np.random.default_rng(rng_seed)
    words = x.word_texts()
    eligible = [i for i in range(len(words)) if i not in exclude_words]
    if kind == Kind.STRUCT_REPLACE:
        lexicon = lexicon or _default_lexicon()
        eligible = [i for i in eligible if len(struct_replace_candidates(x, i, lexicon)) > 0]
    if not eligible:
        return None
    wi = eligible[int(rng.integers(len(eligible)))]
    if kind == Kind.CHAR_INSERT:
        offset = int(rng.integers(len(words[wi]) + 1))
        char = charset.characters[int(rng.integers(len(charset)))]
        return PerturbationCandidate(wi, Kind.RANDOM, ("insert", offset, char))
    if kind == Kind.STRUCT_REPLACE:
        options = struct_replace_candidates(x, wi, lexicon)
        pick = options[int(rng.integers(len(options)))]
        return PerturbationCandidate(wi, Kind.RANDOM, pick.payload)
    # token replacement inside the chosen word
    positions = [i for i, w in enumerate(x.word_of_token()) if w == wi]
    pos = positions[int(rng.integers(len(positions)))]
    ids = np.flatnonzero(eligible_replacements(vocab, x.tokens[pos]))
    return PerturbationCandidate(pos, Kind.RANDOM, ("token", int(ids[int(rng.integers(len(ids)))])))


def _default_lexicon():
    from .tokenizer import default_lexicon

    return default_lexicon()


# ---------------------------------------------------------------------------
# driver
# ---------------------------------------------------------------------------


def _propose(x, kind, profile, excluded_words, model, vocab, lexicon, charset):
    """Walk positions by importance until one yields candidates."""
    word_of = x.word_of_token()
    blocked = {i for i, w in enumerate(word_of) if w is None or w in excluded_words}
    tried = set()
    for pos in rank_critical_tokens(profile, blocked):
        wi = word_of[pos]
        if wi in tried:
            continue
        tried.add(wi)
        if kind == Kind.CHAR_INSERT:
            cands = char_insert_candidates(x, wi, charset)
        elif kind == Kind.TOKEN_REPLACE:
            cands = [token_replace_candidate(x, pos, profile, model, vocab)]
        else:
            cands = struct_replace_candidates(x, wi, lexicon)
        if cands:
            return wi, cands
    raise ExhaustedPositionsError("no position yields candidates")


def generate_test(
    seed: TokenSequence,
    epsilon: int,
    kind: Kind,
    model: Seq2Seq,
    vocab: Vocabulary,
    lexicon: PosLexicon | None = None,
    rng_seed=0,
    random_kind: Kind = Kind.TOKEN_REPLACE,
    executor=None,
    charset: CharSet = CHARSET,
) -> TestCase:
    """Perturb up to ``epsilon`` words of ``seed`` to maximise decoder loops.

    Candidates are decoded with the model's configured search (greedy or
    beam); importance always uses the greedy output. A candidate replaces the
    incumbent only if it needs strictly more loops; among equally long
    candidates the first in enumeration order wins. ``executor`` (anything
    with an order-preserving ``map``) may parallelise candidate decoding.
    """
    if epsilon < 0:
        raise ContractError("epsilon must be >= 0")
    kind = Kind(kind)
    if kind == Kind.STRUCT_REPLACE or (kind == Kind.RANDOM and random_kind == Kind.STRUCT_REPLACE):
        lexicon = lexicon or _default_lexicon()
    mapper = executor.map if executor is not None else map

    best = seed
    best_trace = model.translate(seed.tokens)
    case = TestCase(seed, seed, epsilon, 0, kind, best_trace, best_trace)
    excluded = set()
    for it in range(epsilon):
        if kind == Kind.RANDOM:
            seq = [*np.atleast_1d(rng_seed).tolist(), it]
            cand = random_mutation(best, random_kind, seq, vocab, lexicon, excluded, charset)
            if cand is None:
                case.exhausted = True
                break
            word, cands = cand.word_index(best), [cand]
        else:
            profile = objective_and_importance(best, model)
            try:
                word, cands = _propose(best, kind, profile, excluded, model, vocab, lexicon, charset)
            except ExhaustedPositionsError:
                case.exhausted = True
                break
        sentences = [c.apply(best, vocab) for c in cands]
        traces = list(mapper(model.translate, [s.tokens for s in sentences]))
        case.candidates_evaluated += len(cands)
        top = max(range(len(cands)), key=lambda i: (traces[i].loops, -i))
        if traces[top].loops > best_trace.loops:
            best, best_trace = sentences[top], traces[top]
            case.adopted.append(cands[top])
        excluded.add(word)
        case.positions.append(word)
        case.epsilon_used += 1
        case.per_iteration_best_loops.append(best_trace.loops)
    case.perturbed = best
    case.adv_trace = best_trace
    return case


def word_edit_distance(a: TokenSequence, b: TokenSequence) -> int:
    """Positional word differences (every operator preserves word count)."""
    wa, wb = a.word_texts(), b.word_texts()
    if len(wa) != len(wb):
        return max(len(wa), len(wb))
    return sum(1 for u, v in zip(wa, wb) if u != v)
