"""Binary cross-entropy objective, Adam, the mini-batch loop and a gradient checker."""
from __future__ import annotations

import csv
import io
import logging
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from .config import ModelConfig
from .corpus import AnnotatedTweet, Corpus
from .embedding import EncodedTweet, build_vocab, encode, encode_batch
from .errors import TrainingError
from .nn_core import Model, backward, forward, init_model

logger = logging.getLogger(__name__)

CLAMP = 1e-7


def _bce(y, y_hat):
    y_hat = np.asarray(y_hat)
    dtype = np.result_type(y_hat.dtype, np.float64)
    y = np.asarray(y, dtype=dtype)
    p = np.clip(y_hat.astype(dtype), CLAMP, 1.0 - CLAMP)
    per_pos = -(y * np.log(p) + (1.0 - y) * np.log(1.0 - p))
    if per_pos.ndim == 1:
        return per_pos.sum()
    return per_pos.sum(axis=-1).mean()


def bce_loss(y, y_hat) -> float:
    """Summed binary cross-entropy over the label positions.

    For 2-D inputs (batch x labels) the per-example sums are averaged.
    """
    return float(_bce(y, y_hat))


def bce_grad_logits(y, y_hat) -> np.ndarray:
    """d(summed BCE)/d(pre-sigmoid logits) = y_hat - y."""
    return np.asarray(y_hat, dtype=np.float64) - np.asarray(y, dtype=np.float64)


@dataclass
class AdamState:
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    first_moment: dict = field(default_factory=dict)
    second_moment: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1 and self.eps > 0):
            raise ValueError("Adam needs 0 <= beta1, beta2 < 1 and eps > 0")


def adam_step(params: dict, grads: dict, state: AdamState, lr: float, names: Iterable[str] | None = None):
    """One bias-corrected Adam update, in place. Returns ``(params, state)``."""
    state.t += 1
    bc1 = 1.0 - state.beta1 ** state.t
    bc2 = 1.0 - state.beta2 ** state.t
    for k in (params if names is None else names):
        g = grads[k]
        if g.shape != params[k].shape:
            raise ValueError(f"gradient shape {g.shape} != parameter shape {params[k].shape} for {k}")
        if k not in state.first_moment:
            state.first_moment[k] = np.zeros_like(params[k])
            state.second_moment[k] = np.zeros_like(params[k])
        m = state.first_moment[k]
        v = state.second_moment[k]
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * (g * g)
        params[k] -= lr * (m / bc1) / (np.sqrt(v / bc2) + state.eps)
    return params, state


@dataclass
class TrainLog:
    seed: int
    config: ModelConfig
    losses: list = field(default_factory=list)
    seconds: list = field(default_factory=list)

    def __len__(self):
        return len(self.losses)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["epoch", "mean_loss", "seconds"])
        for i, (loss, sec) in enumerate(zip(self.losses, self.seconds), start=1):
            w.writerow([i, repr(loss), f"{sec:.3f}"])
        return buf.getvalue()


def canonical_order(examples: Iterable[AnnotatedTweet]) -> list[AnnotatedTweet]:
    """Sort by content so training never depends on storage order."""
    return sorted(examples, key=lambda ex: (ex.tokens, ex.mask))


def epoch_permutation(n: int, seed: int, epoch: int) -> np.ndarray:
    return np.random.default_rng([seed, 7, epoch]).permutation(n)


def train(
    model: Model,
    corpus: Corpus | Iterable[AnnotatedTweet],
    config: ModelConfig | None = None,
    callback: Callable[[int, float], None] | None = None,
) -> tuple[Model, TrainLog]:
    """Train a copy of `model` with Adam on mini-batches; returns it with the log.

    Examples are put in canonical order, then shuffled each epoch by a
    permutation that depends only on (seed, epoch). The final short batch
    is kept.
    """
    config = config or model.config
    if config != model.config:
        model = Model(config, model.vocab, model.params)
    model = model.copy()
    examples = canonical_order(corpus)
    if not examples:
        raise TrainingError("cannot train on an empty corpus")
    X, Y, _ = encode_batch(examples, model.vocab, config.m)
    Y = Y.astype(np.float64)
    n = len(examples)
    log = TrainLog(seed=config.seed, config=config)
    state = AdamState()
    dropout_rng = np.random.default_rng([config.seed, 2])
    names = model.trainable_names()

    for epoch in range(config.epochs):
        start = time.perf_counter()
        order = epoch_permutation(n, config.seed, epoch)
        total = 0.0
        for batch_no, lo in enumerate(range(0, n, config.batch_size)):
            idx = order[lo:lo + config.batch_size]
            probs, cache = forward(model, X[idx], train=True, rng=dropout_rng)
            loss = bce_loss(Y[idx], probs)
            if not np.isfinite(loss):
                raise TrainingError(f"non-finite loss at epoch {epoch + 1}, batch {batch_no + 1}")
            grads = backward(model, cache, Y[idx])
            adam_step(model.params, grads, state, config.learning_rate, names)
            total += loss * len(idx)
        mean_loss = total / n
        log.losses.append(mean_loss)
        log.seconds.append(time.perf_counter() - start)
        logger.debug("epoch %d loss %.6f", epoch + 1, mean_loss)
        if callback is not None:
            callback(epoch + 1, mean_loss)
    return model, log


def _as_example(model: Model, example):
    if isinstance(example, EncodedTweet):
        return example.indices[None], example.labels[None].astype(np.float64)
    if isinstance(example, AnnotatedTweet):
        X, Y, _ = encode_batch([example], model.vocab, model.config.m)
        return X, Y.astype(np.float64)
    indices, labels = example
    X = np.atleast_2d(np.asarray(indices, dtype=np.int64))
    return X, np.atleast_2d(np.asarray(labels, dtype=np.float64))


def relative_error(analytic, numeric):
    a = np.asarray(analytic, dtype=np.float64)
    n = np.asarray(numeric, dtype=np.float64)
    return np.abs(a - n) / np.maximum(np.maximum(np.abs(a), np.abs(n)), 1e-12)


def grad_check(
    model: Model,
    example,
    eps: float = 1e-5,
    grad_fn: Callable | None = None,
    report: dict | None = None,
) -> float:
    """Largest relative error between analytic and central-difference gradients.

    The finite-difference loss is evaluated on an extended-precision copy
    of the parameters so that round-off does not swamp small gradients;
    each entry of that copy is perturbed and restored in turn. Dropout must
    be disabled (the loss is evaluated in inference mode). `grad_fn`
    replaces the analytic gradient, e.g. for fault injection; `report`
    receives the per-parameter maxima.
    """
    if model.config.dropout != 0:
        raise ValueError("grad_check needs dropout = 0")
    X, Y = _as_example(model, example)

    if grad_fn is None:
        _, cache = forward(model, X, train=False)
        analytic = backward(model, cache, Y)
    else:
        analytic = grad_fn(model, X, Y)

    wide = Model(model.config, model.vocab,
                 {k: v.astype(np.longdouble) for k, v in model.params.items()})
    eps = np.longdouble(eps)

    def loss_at():
        probs, _ = forward(wide, X, train=False)
        return _bce(Y, probs)

    worst = 0.0
    for name in model.trainable_names():
        theta = wide.params[name]
        numeric = np.zeros_like(theta)
        flat = theta.reshape(-1)
        num_flat = numeric.reshape(-1)
        # the padding row is frozen at zero, not a free parameter
        first = theta.shape[1] if name == "embedding" else 0
        for i in range(first, flat.size):
            old = flat[i]
            flat[i] = old + eps
            up = loss_at()
            flat[i] = old - eps
            down = loss_at()
            flat[i] = old
            num_flat[i] = float((up - down) / (2 * eps))
        err = float(relative_error(analytic[name], numeric).max(initial=0.0))
        if report is not None:
            report[name] = err
        worst = max(worst, err)
    return worst


REFERENCE_GRADCHECK_CONFIG = ModelConfig(
    m=8, K=4, filter_widths=(2, 3), feature_maps=4, conv_depth=2, dense_depth=2,
    dense_hidden=8, dropout=0.0, seed=0,
)


def gradcheck_fixture(config: ModelConfig = REFERENCE_GRADCHECK_CONFIG, seed: int = 0):
    """A small random model and one labeled example for `grad_check`.

    Biases are moved off their zero initialization: with zero biases every
    all-padding window sits exactly on the ReLU kink, where finite
    differences are meaningless. The example leaves two padding positions
    so the frozen PAD row is exercised.
    """
    rng = np.random.default_rng([seed, 3])
    words = [f"w{i}" for i in range(10)]
    length = max(1, config.m - 2)
    tokens = tuple(rng.choice(words, size=length))
    mask = tuple(int(v) for v in rng.integers(0, 2, size=length))
    example = AnnotatedTweet(tokens, mask)
    vocab = build_vocab([AnnotatedTweet(tuple(words), (0,) * len(words))])
    model = init_model(config.with_(seed=seed), vocab)
    for name, value in model.params.items():
        if name.endswith(".b"):
            value[:] = rng.uniform(-0.1, 0.1, size=value.shape)
    return model, encode(example, vocab, config.m)
