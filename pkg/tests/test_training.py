import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from geotag.config import ModelConfig
from geotag.corpus import AnnotatedTweet, Corpus
from geotag.embedding import build_vocab
from geotag.errors import TrainingError
from geotag.nn_core import backward, forward, init_model
from geotag.training import (AdamState, adam_step, bce_grad_logits, bce_loss, epoch_permutation,
                             grad_check, gradcheck_fixture, relative_error, train)
from oracles import adam_reference, bce_logit_gradient_reference, bce_reference


def test_bce_examples():
    assert bce_loss([1, 0], [1 - 1e-7, 1e-7]) == pytest.approx(2e-7, rel=1e-6)
    assert bce_loss([1], [0.5]) == pytest.approx(math.log(2), abs=1e-12)
    assert bce_loss([1, 0, 1], [0.9, 0.2, 0.8]) == pytest.approx(
        -(math.log(0.9) + math.log(0.8) + math.log(0.8)), abs=1e-12)
    assert bce_loss([1, 0, 1], [0.9, 0.2, 0.8]) == pytest.approx(0.5516, abs=1e-4)


def test_bce_batch_is_mean_of_sums():
    Y = np.array([[1, 0], [0, 0]])
    P = np.array([[0.7, 0.1], [0.3, 0.4]])
    assert bce_loss(Y, P) == pytest.approx((bce_loss(Y[0], P[0]) + bce_loss(Y[1], P[1])) / 2)


@given(st.lists(st.tuples(st.integers(0, 1), st.floats(0, 1)), min_size=1, max_size=12))
@settings(max_examples=100, deadline=None)
def test_bce_nonnegative_and_matches_mpmath(pairs):
    y = [a for a, _ in pairs]
    p = [b for _, b in pairs]
    loss = bce_loss(y, p)
    assert loss >= 0
    assert loss == pytest.approx(float(bce_reference(y, p)), rel=1e-12, abs=1e-14)


@given(st.integers(0, 10_000))
@settings(max_examples=30, deadline=None)
def test_logit_gradient_closed_form(seed):
    rng = np.random.default_rng(seed)
    y = rng.integers(0, 2, size=5)
    z = rng.normal(scale=3, size=5)
    probs = 1 / (1 + np.exp(-z))
    closed = bce_grad_logits(y, probs)
    for k in range(5):
        assert closed[k] == pytest.approx(bce_logit_gradient_reference(y.tolist(), z.tolist(), k), abs=1e-10)


def test_adam_zero_gradient_keeps_params():
    params = {"w": np.array([1.0, -2.0])}
    adam_step(params, {"w": np.zeros(2)}, AdamState(), 0.01)
    assert params["w"].tolist() == [1.0, -2.0]


def test_adam_first_step_is_lr():
    params = {"w": np.array([0.0])}
    state = AdamState()
    adam_step(params, {"w": np.array([1.0])}, state, 0.001)
    assert params["w"][0] == pytest.approx(-0.001, rel=1e-6)
    for _ in range(9):
        adam_step(params, {"w": np.array([1.0])}, state, 0.001)
    assert params["w"][0] == pytest.approx(adam_reference(0.0, [1.0] * 10, 0.001), abs=1e-15)
    assert state.t == 10


@given(st.integers(0, 10_000))
@settings(max_examples=50, deadline=None)
def test_adam_step_bounded(seed):
    rng = np.random.default_rng(seed)
    lr = 0.001
    params = {"w": rng.normal(size=20)}
    state = AdamState()
    for _ in range(15):
        before = params["w"].copy()
        adam_step(params, {"w": rng.normal(scale=10 ** rng.uniform(-6, 3), size=20)}, state, lr)
        assert np.abs(params["w"] - before).max() <= 10 * lr


def test_adam_deterministic():
    def run():
        params = {"w": np.linspace(-1, 1, 5)}
        state = AdamState()
        for g in np.random.default_rng(0).normal(size=(10, 5)):
            adam_step(params, {"w": g}, state, 0.01)
        return params["w"]
    np.testing.assert_array_equal(run(), run())
    with pytest.raises(ValueError):
        AdamState(beta1=1.0)


def test_relative_error_guard():
    assert relative_error(0.0, 0.0) == 0.0
    assert relative_error(2.0, 1.0) == pytest.approx(0.5)


def test_grad_check_reference_model():
    model, example = gradcheck_fixture()
    report = {}
    assert grad_check(model, example, 1e-5, report=report) < 1e-4
    assert set(report) == set(model.params)


def test_grad_check_detects_scaled_gradient():
    model, example = gradcheck_fixture(seed=1)

    def doubled(model, X, Y):
        _, cache = forward(model, X)
        return {k: 2 * v for k, v in backward(model, cache, Y).items()}

    assert grad_check(model, example, 1e-5, grad_fn=doubled) == pytest.approx(0.5, abs=1e-3)


def test_grad_check_needs_dropout_off():
    model, example = gradcheck_fixture()
    model.config = model.config.with_(dropout=0.2)
    with pytest.raises(ValueError):
        grad_check(model, example)


@pytest.mark.parametrize("seed", range(5))
def test_grad_check_other_architectures(seed):
    from geotag.training import REFERENCE_GRADCHECK_CONFIG
    cfg = REFERENCE_GRADCHECK_CONFIG.with_(conv_depth=1 + seed % 3, dense_depth=1 + seed % 3,
                                           filter_widths=(1, 3) if seed % 2 else (2,), pool_window=2 + seed % 3)
    model, example = gradcheck_fixture(cfg, seed)
    assert grad_check(model, example) < 1e-4


def _scaled(**kw):
    base = dict(m=20, K=16, feature_maps=16, filter_widths=(2, 3, 4), dense_hidden=30, batch_size=10,
                epochs=8, seed=5)
    base.update(kw)
    return ModelConfig(**base)


def test_training_reduces_loss(small_corpus):
    cfg = _scaled()
    model = init_model(cfg, build_vocab(small_corpus))
    trained, log = train(model, small_corpus, cfg)
    assert len(log) == cfg.epochs
    assert log.losses[-1] < log.losses[0]
    assert all(math.isfinite(v) for v in log.losses)
    assert log.to_csv().splitlines()[0] == "epoch,mean_loss,seconds"
    assert not np.array_equal(trained.params["output.W"], model.params["output.W"])


def test_training_is_order_invariant_and_deterministic(small_corpus):
    cfg = _scaled(epochs=2)
    vocab = build_vocab(small_corpus)
    a, _ = train(init_model(cfg, vocab), small_corpus, cfg)
    b, _ = train(init_model(cfg, vocab), small_corpus, cfg)
    shuffled = Corpus(tuple(small_corpus[i] for i in np.random.default_rng(0).permutation(len(small_corpus))))
    c, _ = train(init_model(cfg, vocab), shuffled, cfg)
    for name in a.params:
        np.testing.assert_array_equal(a.params[name], b.params[name])
        np.testing.assert_array_equal(a.params[name], c.params[name])


def test_zero_epochs_is_identity(small_corpus):
    cfg = _scaled(epochs=0)
    model = init_model(cfg, build_vocab(small_corpus))
    trained, log = train(model, small_corpus, cfg)
    assert len(log) == 0
    for name in model.params:
        np.testing.assert_array_equal(trained.params[name], model.params[name])


def test_non_finite_loss_is_reported():
    cfg = _scaled(epochs=1, m=6, filter_widths=(2,), dropout=0.0)
    corpus = Corpus((AnnotatedTweet(("a", "b"), (1, 0)),))
    model = init_model(cfg, build_vocab(corpus))
    model.params["output.b"][:] = np.nan
    with pytest.raises(TrainingError, match="epoch 1, batch 1"):
        train(model, corpus, cfg)


def test_epoch_permutation_depends_on_seed_and_epoch():
    assert epoch_permutation(50, 1, 0).tolist() == epoch_permutation(50, 1, 0).tolist()
    assert epoch_permutation(50, 1, 0).tolist() != epoch_permutation(50, 1, 1).tolist()
    assert sorted(epoch_permutation(50, 2, 3)) == list(range(50))
