import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp
from scipy.stats import mannwhitneyu

from slothbench.detector import ACCEPT, REJECT, DetectorModel, auc, featurize, runtime_filter, train_detector
from slothbench.errors import ContractError, EmptyInputError, InsufficientDataError, MagicMismatchError
from slothbench.model import EncoderState
from slothbench.serialize import save_weights

rows = hnp.arrays(np.float32, st.tuples(st.integers(1, 8), st.just(6)), elements=st.floats(-3, 3, width=32))


def test_featurize_single_row():
    row = np.arange(4, dtype=np.float32)[None]
    np.testing.assert_array_equal(featurize(EncoderState(row)), row[0])


def test_featurize_identical_rows():
    row = np.array([[1.5, -2.0, 3.0]], dtype=np.float32)
    np.testing.assert_allclose(featurize(EncoderState(np.repeat(row, 2, axis=0))), row[0])


def test_featurize_empty():
    with pytest.raises(EmptyInputError):
        featurize(EncoderState(np.zeros((0, 4))))


@settings(max_examples=50)
@given(rows, st.randoms(use_true_random=False), st.integers(1, 3))
def test_featurize_permutation_and_duplication(H, rnd, k):
    perm = list(range(len(H)))
    rnd.shuffle(perm)
    base = featurize(EncoderState(H))
    np.testing.assert_allclose(featurize(EncoderState(H[perm])), base, atol=1e-5)
    np.testing.assert_allclose(featurize(EncoderState(np.repeat(H, k, axis=0))), base, atol=1e-5)


def test_auc_basic():
    assert auc([2, 3], [0, 1]) == 1.0
    assert auc([1, 1], [1, 1, 1]) == 0.5
    with pytest.raises(ContractError):
        auc([], [1])


def test_auc_matches_rank_statistic():
    rng = np.random.default_rng(0)
    for _ in range(100):
        pos = np.round(rng.normal(0.5, 1, size=int(rng.integers(1, 30))), 1)
        neg = np.round(rng.normal(0, 1, size=int(rng.integers(1, 30))), 1)
        u = mannwhitneyu(pos, neg, alternative="two-sided").statistic
        assert auc(pos, neg) == pytest.approx(u / (len(pos) * len(neg)), abs=1e-12)


def blobs(rng, n, shift):
    normal = rng.normal(0, 0.3, size=(n, 5))
    abnormal = rng.normal(0, 0.3, size=(n, 5))
    abnormal[:, 0] += shift
    return normal, abnormal


def test_separable_blobs_perfect():
    normal, abnormal = blobs(np.random.default_rng(1), 40, 5.0)
    det, m = train_detector(normal, abnormal, split_seed=3)
    assert m["accuracy"] == 1.0 and m["auc"] == 1.0
    assert m["n_train"] == 64 and m["n_test"] == 16


def test_shuffled_labels_near_chance():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(1000, 8))
    labels = rng.permutation(np.repeat([0, 1], 500))
    _, m = train_detector(X[labels == 0], X[labels == 1], split_seed=4)
    assert abs(m["auc"] - 0.5) <= 0.1


def test_deterministic():
    normal, abnormal = blobs(np.random.default_rng(3), 20, 1.0)
    a, ma = train_detector(normal, abnormal, 9)
    b, mb = train_detector(normal, abnormal, 9)
    assert a.weight.tobytes() == b.weight.tobytes() and a.bias == b.bias and ma == mb


def test_insufficient_data():
    with pytest.raises(InsufficientDataError):
        train_detector(np.zeros((4, 3)), np.ones((10, 3)))


@settings(max_examples=50)
@given(
    hnp.arrays(np.float64, 4, elements=st.floats(-5, 5)),
    st.floats(-2, 2),
    st.floats(-1, 1),
    st.floats(0.01, 100),
    hnp.arrays(np.float64, (10, 4), elements=st.floats(-5, 5)),
)
def test_reject_set_scale_invariant(w, b, t, c, X):
    det = DetectorModel(w, b, t)
    scaled = DetectorModel(c * w, c * b, c * t)
    margins = det.margin(X)
    clear = np.abs(margins - t) > 1e-9  # skip boundary points where rounding decides
    a = [det.decide(x) for x in X[clear]]
    s = [scaled.decide(x) for x in X[clear]]
    assert a == s


def test_save_load_round_trip(tmp_path):
    det = DetectorModel(np.linspace(-1, 1, 6), 0.25, -0.5)
    det.save(tmp_path / "d.nmtd", meta={"reports": ["abc"]})
    again, meta = DetectorModel.load(tmp_path / "d.nmtd")
    np.testing.assert_array_equal(again.weight, det.weight.astype(np.float32))
    assert (again.bias, again.threshold, meta) == (0.25, -0.5, {"reports": ["abc"]})


def test_weights_file_is_not_a_detector(tmp_path, tiny):
    save_weights(tmp_path / "w.nmts", tiny.weights, tiny.config)
    with pytest.raises(MagicMismatchError):
        DetectorModel.load(tmp_path / "w.nmts")


def test_runtime_filter(tiny):
    hd = tiny.config.hidden_dim
    reject = runtime_filter([5, 6], tiny, DetectorModel(np.zeros(hd), 1.0, 0.0))
    assert reject.decision == REJECT and reject.trace is None and reject.overhead_ns >= 0
    accept = runtime_filter([5, 6], tiny, DetectorModel(np.zeros(hd), -1.0, 0.0))
    assert accept.decision == ACCEPT
    plain = tiny.translate([5, 6])
    assert accept.trace.output_ids == plain.output_ids and accept.trace.loops == plain.loops


def test_runtime_filter_encodes_once(tiny, monkeypatch):
    from slothbench.model import Seq2Seq

    calls = []
    original = Seq2Seq.encode

    def counting(self, ids):
        calls.append(1)
        return original(self, ids)

    monkeypatch.setattr(Seq2Seq, "encode", counting)
    runtime_filter([5, 6, 7], tiny, DetectorModel(np.zeros(tiny.config.hidden_dim), -1.0))
    assert len(calls) == 1
