import numpy as np
import pytest

from slothbench import corpus
from slothbench.errors import ContractError, TrainingDivergedError
from slothbench.training import TrainConfig, corpus_loss, encode_pairs, heldout_accuracy, train

from .conftest import small_model


class TestCorpus:
    def test_lengths_and_reversal(self):
        for src, tgt in corpus.gen_synthetic_corpus(3, 200):
            s, t = src.split(), tgt.split()
            assert corpus.MIN_WORDS <= len(s) <= corpus.MAX_WORDS
            assert len(t) == len(s)
            assert [corpus.untranslate_word(w) for w in reversed(t)] == s

    def test_deterministic(self):
        assert corpus.gen_synthetic_corpus(5, 50) == corpus.gen_synthetic_corpus(5, 50)
        assert corpus.gen_synthetic_corpus(5, 50) != corpus.gen_synthetic_corpus(6, 50)

    def test_rejects_zero(self):
        with pytest.raises(ValueError):
            corpus.gen_synthetic_corpus(0, 0)

    def test_bijection(self):
        from slothbench.lexicon import content_words

        words = content_words()
        images = {corpus.translate_word(w) for w in words}
        assert images == set(words)
        assert all(corpus.translate_word(w) != w for w in words)

    def test_heldout_disjoint(self):
        train_pairs = corpus.gen_synthetic_corpus(1, 500)
        held = corpus.heldout_pairs(1, 100, [s for s, _ in train_pairs])
        assert len(held) == 100
        assert not {s for s, _ in held} & {s for s, _ in train_pairs}
        assert len({s for s, _ in held}) == 100

    def test_parallel_file_round_trip(self, tmp_path):
        pairs = corpus.gen_synthetic_corpus(2, 20)
        corpus.write_parallel(tmp_path / "c.tsv", pairs)
        assert corpus.read_parallel(tmp_path / "c.tsv") == pairs


def test_encode_pairs_appends_eos(vocab):
    (src, tgt), = encode_pairs(corpus.gen_synthetic_corpus(0, 1), vocab)
    assert tgt[-1] == vocab.eos_id
    assert vocab.eos_id not in src


def test_one_epoch_on_one_pair_lowers_its_loss(vocab):
    model = small_model(vocab)
    data = encode_pairs([("a b", "b a")], vocab)
    before = corpus_loss(model, data)
    weights, _ = train(data, model.weights, model.config, TrainConfig(epochs=1, batch_size=1))
    after = corpus_loss(type(model)(weights, model.config), data)
    assert after < before


def test_train_does_not_mutate_input(vocab):
    model = small_model(vocab)
    snapshot = model.weights.src_embed.copy()
    data = encode_pairs(corpus.gen_synthetic_corpus(0, 8), vocab)
    train(data, model.weights, model.config, TrainConfig(epochs=1))
    assert np.array_equal(model.weights.src_embed, snapshot)


def test_same_seed_bit_identical(vocab):
    model = small_model(vocab)
    data = encode_pairs(corpus.gen_synthetic_corpus(0, 40), vocab)
    hyper = TrainConfig(epochs=2, batch_size=8)
    w1, h1 = train(data, model.weights, model.config, hyper)
    w2, h2 = train(data, model.weights, model.config, hyper)
    assert h1 == h2
    for (_, a), (_, b) in zip(w1.items(), w2.items()):
        assert a.tobytes() == b.tobytes()


def test_small_run_reduces_loss(vocab):
    model = small_model(vocab)
    data = encode_pairs(corpus.gen_synthetic_corpus(0, 64), vocab)
    _, history = train(data, model.weights, model.config, TrainConfig(epochs=4, batch_size=8, learning_rate=0.1))
    assert history[-1] < history[0]


def test_divergence_raises(vocab):
    model = small_model(vocab)
    data = encode_pairs(corpus.gen_synthetic_corpus(0, 8), vocab)
    with pytest.raises(TrainingDivergedError):
        train(data, model.weights, model.config, TrainConfig(epochs=1, batch_size=2, learning_rate=float("nan"), clip_norm=0))


def test_empty_corpus(vocab):
    model = small_model(vocab)
    with pytest.raises(ContractError):
        train([], model.weights, model.config)


def test_reference_recipe_defaults():
    hyper = TrainConfig()
    assert (hyper.epochs, hyper.learning_rate, hyper.batch_size, hyper.rng_seed) == (30, 0.05, 16, 7)


@pytest.mark.slow
def test_reference_model_converges(reference, vocab):
    assert reference.history[-1] < reference.history[0]
    acc, exact = heldout_accuracy(reference.model, encode_pairs(reference.heldout_pairs, vocab))
    assert acc >= 0.95 and exact >= 0.95
