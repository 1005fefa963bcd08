import itertools
import random

import pytest
from hypothesis import given, strategies as st

from geotag.metrics import (COLUMNS, InstanceScores, aggregate, evaluate_masks, mean_report, report_from_dict,
                            report_to_dict, reports_to_csv, score_batch, score_instance)
from oracles import metrics_reference

masks = st.integers(0, 12).flatmap(lambda n: st.tuples(st.lists(st.integers(0, 1), min_size=n, max_size=n),
                                                       st.lists(st.integers(0, 1), min_size=n, max_size=n)))


def _as_tuple(s: InstanceScores):
    return (s.precision, s.recall, s.f1, s.hamming_loss, s.jaccard, s.exact_match)


def test_worked_example():
    s = score_instance([0, 0, 0, 0, 0, 1, 1, 1, 1], [0, 0, 0, 0, 1, 0, 0, 1, 1])
    assert s.precision == pytest.approx(2 / 3)
    assert s.recall == 0.5
    assert s.f1 == pytest.approx(4 / 7)
    assert s.hamming_loss == pytest.approx(1 / 3)
    assert s.jaccard == pytest.approx(0.4)
    assert s.exact_match == 0


def test_perfect_prediction_follows_the_formulas():
    s = score_instance([0, 0, 0, 0, 0, 1, 1, 1, 1], [0, 0, 0, 0, 0, 1, 1, 1, 1])
    assert _as_tuple(s) == (1.0, 1.0, 1.0, 0.0, 1.0, 1)


@pytest.mark.parametrize("n", range(0, 7))
def test_exhaustive_oracle(n):
    for y in itertools.product((0, 1), repeat=n):
        for y_hat in itertools.product((0, 1), repeat=n):
            expected = tuple(float(v) for v in metrics_reference(y, y_hat)[:5]) + (metrics_reference(y, y_hat)[5],)
            assert _as_tuple(score_instance(y, y_hat)) == expected


def test_empty_conventions():
    assert _as_tuple(score_instance([0, 0], [0, 0])) == (1.0, 1.0, 1.0, 0.0, 1.0, 1)
    assert _as_tuple(score_instance([0, 0], [1, 0])) == (0.0, 0.0, 0.0, 0.5, 0.0, 0)
    assert _as_tuple(score_instance([0, 1], [0, 0])) == (0.0, 0.0, 0.0, 0.5, 0.0, 0)
    assert _as_tuple(score_instance([], [])) == (1.0, 1.0, 1.0, 0.0, 1.0, 1)


def test_errors():
    with pytest.raises(ValueError):
        score_instance([0, 1], [0, 1, 0])
    with pytest.raises(ValueError):
        score_instance([0, 2], [0, 1])
    with pytest.raises(ValueError):
        aggregate([])


@given(masks)
def test_metric_invariants(pair):
    y, y_hat = pair
    s = score_instance(y, y_hat)
    for v in _as_tuple(s):
        assert 0 <= v <= 1
    assert s.jaccard <= min(s.precision, s.recall) + 1e-15
    assert s.f1 >= s.jaccard - 1e-15
    if s.exact_match:
        assert s.hamming_loss == 0 and s.jaccard == 1
    true = {i for i, v in enumerate(y) if v}
    pred = {i for i, v in enumerate(y_hat) if v}
    if y:
        assert s.hamming_loss == pytest.approx((len(true - pred) + len(pred - true)) / len(y), abs=0)
    if s.precision + s.recall and (true or pred):
        assert s.f1 == pytest.approx(2 * s.precision * s.recall / (s.precision + s.recall), rel=1e-12)


@given(st.lists(st.integers(0, 1), max_size=15))
def test_self_score_is_perfect(y):
    assert _as_tuple(score_instance(y, y)) == (1.0, 1.0, 1.0, 0.0, 1.0, 1)


def test_aggregate():
    one = score_instance([1, 0, 1], [1, 0, 0])
    rep = aggregate([one])
    assert tuple(rep.as_row()) == _as_tuple(one) and rep.count == 1
    two = aggregate([score_instance([1], [1]), score_instance([1], [0])])
    assert two.exact_match == 0.5


@given(st.lists(masks.filter(lambda p: len(p[0]) > 0), min_size=1, max_size=8), st.randoms())
def test_aggregate_permutation_invariant(pairs, rnd):
    scores = [score_instance(a, b) for a, b in pairs]
    shuffled = scores[:]
    rnd.shuffle(shuffled)
    a, b = aggregate(scores), aggregate(shuffled)
    for c in COLUMNS:
        assert getattr(a, c) == pytest.approx(getattr(b, c), rel=1e-12, abs=1e-15)


def test_evaluate_masks_uses_padded_length():
    Y = [[1, 0, 0, 0, 0, 0], [0, 0, 0, 0, 0, 0]]
    Yhat = [[1, 1, 0, 0, 0, 0], [0, 0, 0, 0, 0, 0]]
    rep = evaluate_masks(Y, Yhat)
    assert rep.label_length == 6
    assert rep.hamming_loss == pytest.approx((1 / 6 + 0) / 2)
    assert len(score_batch(Y, Yhat)) == 2


def test_mean_report_and_csv():
    a = aggregate([score_instance([1, 0], [1, 0])], label_length=2)
    b = aggregate([score_instance([1, 0], [0, 1])], label_length=2)
    mean = mean_report([a, b])
    for c in COLUMNS:
        assert getattr(mean, c) == pytest.approx((getattr(a, c) + getattr(b, c)) / 2)
    assert mean.count == 2 and mean.label_length == 2
    text = reports_to_csv([a, b], labels=["x", "y"])
    assert text.splitlines()[0] == "name," + ",".join(COLUMNS) + ",count"
    assert a.to_table().split()[:7] == ["approach", "Precision", "Recall", "F1", "Hamming", "Jaccard", "Exact"]
    assert report_from_dict(report_to_dict(mean)) == mean
