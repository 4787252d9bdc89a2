import time
from dataclasses import dataclass

import numpy as np
import pytest

from slothbench import corpus
from slothbench.model import ModelConfig, ModelWeights, Seq2Seq
from slothbench.serialize import save_weights
from slothbench.tokenizer import default_lexicon, default_vocabulary, tokenize
from slothbench.training import TrainConfig, encode_pairs, train

REFERENCE_SEED = 7
REFERENCE_PAIRS = 4000
HELDOUT_PAIRS = 200


@dataclass
class Reference:
    model: Seq2Seq
    history: list
    train_seconds: float
    train_pairs: list
    heldout_pairs: list
    weights_path: object


@pytest.fixture(scope="session")
def vocab():
    return default_vocabulary()


@pytest.fixture(scope="session")
def lexicon():
    return default_lexicon()


def small_model(vocab, seed=0, **overrides):
    kw = dict(embed_dim=8, hidden_dim=12, max_length=20, rng_seed=seed)
    kw.update(overrides)
    cfg = ModelConfig(vocab_size=len(vocab), eos_id=vocab.eos_id, sos_id=vocab.sos_id, **kw)
    return Seq2Seq(ModelWeights.init(cfg), cfg)


@pytest.fixture
def tiny(vocab):
    return small_model(vocab)


@pytest.fixture(scope="session")
def reference(vocab, tmp_path_factory):
    """The canonical trained model (reference recipe, trained once per session)."""
    pairs = corpus.gen_synthetic_corpus(REFERENCE_SEED, REFERENCE_PAIRS)
    held = corpus.heldout_pairs(REFERENCE_SEED, HELDOUT_PAIRS, [s for s, _ in pairs])
    hyper = TrainConfig()
    cfg = ModelConfig(vocab_size=len(vocab), eos_id=vocab.eos_id, sos_id=vocab.sos_id, rng_seed=hyper.rng_seed)
    t0 = time.perf_counter()
    weights, history = train(encode_pairs(pairs, vocab), ModelWeights.init(cfg), cfg, hyper)
    elapsed = time.perf_counter() - t0
    path = tmp_path_factory.mktemp("reference") / "reference.nmts"
    save_weights(path, weights, cfg)
    return Reference(Seq2Seq(weights, cfg), history, elapsed, pairs, held, path)


@pytest.fixture(scope="session")
def seeds(reference, vocab):
    """Held-out seed sentences disjoint from the training corpus."""
    return [tokenize(s, vocab) for s, _ in reference.heldout_pairs]


def random_sentence(rng, n_words=None, alphabet=None):
    from slothbench.tokenizer import CHARSET

    chars = alphabet or CHARSET.characters
    n = n_words or int(rng.integers(1, 8))
    return " ".join("".join(chars[i] for i in rng.integers(0, len(chars), size=int(rng.integers(1, 9)))) for _ in range(n))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(test_acceptance.RESULTS):
            terminalreporter.write_line(line)
