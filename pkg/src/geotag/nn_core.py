"""Multi-width convolutional tagger with hand-written reverse-mode gradients.

Data flow for a batch of B encoded tweets (indices of shape B x m)::

    lookup rows          (B, m, K)
    per width h: conv -> ReLU, repeated conv_depth times
                         (B, L_h, maps)   L_h = m - conv_depth*(h-1)
    max pool, stride p   (B, ceil(L_h/p), maps)
    concatenate+flatten  (B, flatten_size)
    dense -> ReLU -> dropout, repeated dense_depth times
    output dense -> sigmoid  (B, m)

Parameters live in one ordered dict so the optimizer, the gradient checker
and the serializer all walk them the same way.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .config import ModelConfig, conv_output_length, flatten_size, pooled_length
from .embedding import PAD, EmbeddingMatrix, EncodedTweet, Vocabulary, build_lookup

DTYPE = np.float64
_P_MIN = np.finfo(DTYPE).tiny
_P_MAX = 1.0 - np.finfo(DTYPE).epsneg


def relu(x):
    return np.maximum(x, 0.0)


def sigmoid(x):
    x = np.asarray(x)
    if x.dtype.kind != "f":
        x = x.astype(DTYPE)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    # keep saturated outputs strictly inside (0, 1)
    return np.clip(out, _P_MIN, _P_MAX)


# -- layers ----------------------------------------------------------------


def _windows(x: np.ndarray, h: int) -> np.ndarray:
    """(B, L, C) -> (B, L-h+1, h*C); each row is one h-word window, word-major."""
    B, L, C = x.shape
    win = sliding_window_view(x, h, axis=1)  # (B, L-h+1, C, h)
    return win.transpose(0, 1, 3, 2).reshape(B, L - h + 1, h * C)


def conv_forward(x: np.ndarray, W: np.ndarray, b: np.ndarray):
    """Valid 1-D convolution over the time axis followed by ReLU.

    `x` is (L, C) or (B, L, C); `W` is (maps, h, C). Returns the activated
    map and the pre-activation (needed by the backward pass).
    """
    single = x.ndim == 2
    if single:
        x = x[None]
    maps, h, C = W.shape
    if x.shape[1] < h:
        raise ValueError(f"input of length {x.shape[1]} is shorter than the filter width {h}")
    if x.shape[2] != C:
        raise ValueError(f"filter expects {C} input channels, got {x.shape[2]}")
    cols = _windows(x, h)
    z = cols @ W.reshape(maps, h * C).T + b
    a = relu(z)
    if single:
        return a[0], z[0]
    return a, z


def conv_backward(dz: np.ndarray, x: np.ndarray, W: np.ndarray):
    """Gradients of a valid convolution given dL/d(pre-activation)."""
    maps, h, C = W.shape
    B, Lout, _ = dz.shape
    cols = _windows(x, h).reshape(B * Lout, h * C)
    dz2 = dz.reshape(B * Lout, maps)
    dW = (dz2.T @ cols).reshape(maps, h, C)
    db = dz2.sum(axis=0)
    dcols = (dz2 @ W.reshape(maps, h * C)).reshape(B, Lout, h, C)
    dx = np.zeros_like(x)
    for j in range(h):
        dx[:, j:j + Lout] += dcols[:, :, j]
    return dx, dW, db


def maxpool(c: np.ndarray, p: int):
    """Non-overlapping max pool along time with a partial last window.

    `c` is (L, maps) or (B, L, maps). Returns the pooled map of length
    ceil(L/p) and the absolute time index of each maximum.
    """
    single = c.ndim == 2
    if single:
        c = c[None]
    B, L, maps = c.shape
    if L < 1:
        raise ValueError("cannot pool an empty feature map")
    P = -(-L // p)
    padded = np.full((B, P * p, maps), -np.inf, dtype=c.dtype)
    padded[:, :L] = c
    blocks = padded.reshape(B, P, p, maps)
    arg = blocks.argmax(axis=2)
    pooled = np.take_along_axis(blocks, arg[:, :, None, :], axis=2)[:, :, 0, :]
    where = arg + (np.arange(P) * p)[None, :, None]
    if single:
        return pooled[0], where[0]
    return pooled, where


def maxpool_backward(dpooled: np.ndarray, where: np.ndarray, L: int) -> np.ndarray:
    B, P, maps = dpooled.shape
    dc = np.zeros((B, L, maps), dtype=dpooled.dtype)
    np.put_along_axis(dc, where, dpooled, axis=1)
    return dc


def dropout_mask(shape, rate: float, rng: np.random.Generator) -> np.ndarray:
    """Inverted-dropout multiplier: 0 with probability `rate`, else 1/(1-rate)."""
    keep = rng.random(shape) >= rate
    return keep / (1.0 - rate)


def predict(probabilities, threshold: float = 0.5) -> np.ndarray:
    return (np.asarray(probabilities) >= threshold).astype(np.int64)


# -- model -----------------------------------------------------------------


class ConvBranch(NamedTuple):
    width: int
    weights: list  # per layer, (maps, h, C_in)
    biases: list


class DenseLayer(NamedTuple):
    weights: np.ndarray  # (out, in)
    biases: np.ndarray
    activation: str


def conv_names(h: int, layer: int) -> tuple[str, str]:
    return f"conv{h}_{layer}.W", f"conv{h}_{layer}.b"


def dense_names(j: int) -> tuple[str, str]:
    return f"dense{j}.W", f"dense{j}.b"


def param_shapes(config: ModelConfig, vocab_size: int) -> dict[str, tuple[int, ...]]:
    """Parameter names and shapes in serialization order."""
    shapes = {"embedding": (vocab_size, config.K)}
    for h in config.filter_widths:
        c_in = config.K
        for layer in range(config.conv_depth):
            w, b = conv_names(h, layer)
            shapes[w] = (config.feature_maps, h, c_in)
            shapes[b] = (config.feature_maps,)
            c_in = config.feature_maps
    n_in = flatten_size(config)
    for j in range(config.dense_depth):
        w, b = dense_names(j)
        shapes[w] = (config.dense_hidden, n_in)
        shapes[b] = (config.dense_hidden,)
        n_in = config.dense_hidden
    shapes["output.W"] = (config.m, n_in)
    shapes["output.b"] = (config.m,)
    return shapes


def _glorot(rng, shape, fan_in, fan_out):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


@dataclass
class Model:
    config: ModelConfig
    vocab: Vocabulary
    params: dict[str, np.ndarray]

    @property
    def embedding(self) -> np.ndarray:
        return self.params["embedding"]

    @property
    def branches(self) -> list[ConvBranch]:
        out = []
        for h in self.config.filter_widths:
            names = [conv_names(h, layer) for layer in range(self.config.conv_depth)]
            out.append(ConvBranch(h, [self.params[w] for w, _ in names],
                                  [self.params[b] for _, b in names]))
        return out

    @property
    def dense_stack(self) -> list[DenseLayer]:
        return [DenseLayer(self.params[w], self.params[b], "relu")
                for w, b in map(dense_names, range(self.config.dense_depth))]

    @property
    def output_layer(self) -> DenseLayer:
        return DenseLayer(self.params["output.W"], self.params["output.b"], "sigmoid")

    def trainable_names(self) -> list[str]:
        names = list(self.params)
        if not self.config.embeddings_trainable:
            names.remove("embedding")
        return names

    def copy(self) -> "Model":
        return Model(self.config, self.vocab, {k: v.copy() for k, v in self.params.items()})

    def predict_proba(self, indices) -> np.ndarray:
        probs, _ = forward(self, indices, train=False)
        return probs

    def tag(self, indices) -> np.ndarray:
        return predict(self.predict_proba(indices), self.config.threshold)


def init_model(
    config: ModelConfig,
    vocab: Vocabulary,
    lookup: EmbeddingMatrix | None = None,
    seed: int | None = None,
) -> Model:
    """Fresh parameters: Glorot-uniform weights, zero biases.

    Without `lookup` the embedding table is uniform in +-0.05 (PAD row zero).
    """
    seed = config.seed if seed is None else seed
    rng = np.random.default_rng([seed, 1])
    if lookup is None:
        lookup = build_lookup(vocab, None, seed, K=config.K)
    if lookup.rows.shape != (len(vocab), config.K):
        raise ValueError(
            f"lookup matrix shape {lookup.rows.shape} != ({len(vocab)}, {config.K})"
        )
    params = {}
    for name, shape in param_shapes(config, len(vocab)).items():
        if name == "embedding":
            params[name] = np.array(lookup.rows, dtype=DTYPE)
            params[name][PAD] = 0.0
        elif name.endswith(".b"):
            params[name] = np.zeros(shape, dtype=DTYPE)
        elif name.startswith("conv"):
            maps, h, c_in = shape
            params[name] = _glorot(rng, shape, h * c_in, h * maps)
        else:
            params[name] = _glorot(rng, shape, shape[1], shape[0])
    return Model(config, vocab, params)


def _as_indices(model: Model, x) -> tuple[np.ndarray, bool]:
    single = False
    if isinstance(x, EncodedTweet):
        x, single = x.indices[None], True
    elif isinstance(x, (list, tuple)) and x and isinstance(x[0], EncodedTweet):
        x = np.stack([e.indices for e in x])
    x = np.asarray(x, dtype=np.int64)
    if x.ndim == 1:
        x, single = x[None], True
    if x.shape[1] != model.config.m:
        raise ValueError(f"expected sequences of length {model.config.m}, got {x.shape[1]}")
    if x.size and (x.min() < 0 or x.max() >= len(model.vocab)):
        raise IndexError("token index out of vocabulary range")
    return x, single


def forward(model: Model, x, train: bool = False, rng: np.random.Generator | None = None):
    """Location probabilities for each position, plus the backward cache.

    `x` is an EncodedTweet, a list of them, or an index array (m,) / (B, m).
    Dropout is applied only when `train` is true, and then `rng` is required.
    """
    cfg = model.config
    p = model.params
    X, single = _as_indices(model, x)
    if train and cfg.dropout > 0 and rng is None:
        raise ValueError("train-mode forward with dropout needs an rng")
    B = X.shape[0]

    E = p["embedding"][X]
    cache = {"X": X, "branches": {}, "dense": []}
    flat = []
    for h in cfg.filter_widths:
        a = E
        layers = []
        for layer in range(cfg.conv_depth):
            w, b = conv_names(h, layer)
            a_next, z = conv_forward(a, p[w], p[b])
            layers.append((a, z))
            a = a_next
        pooled, where = maxpool(a, cfg.pool_window)
        cache["branches"][h] = (layers, where, a.shape[1])
        flat.append(pooled.reshape(B, -1))
    act = np.concatenate(flat, axis=1)

    for j in range(cfg.dense_depth):
        w, b = dense_names(j)
        z = act @ p[w].T + p[b]
        out = relu(z)
        mask = None
        if train and cfg.dropout > 0:
            mask = dropout_mask(out.shape, cfg.dropout, rng)
            out = out * mask
        cache["dense"].append((act, z, mask))
        act = out

    logits = act @ p["output.W"].T + p["output.b"]
    probs = sigmoid(logits)
    cache["last"] = act
    cache["logits"] = logits
    cache["probs"] = probs
    return (probs[0] if single else probs), cache


def backward(model: Model, cache: dict, y, dlogits: np.ndarray | None = None) -> dict[str, np.ndarray]:
    """Exact gradients of the batch-mean binary cross-entropy.

    `y` holds the (B, m) 0/1 targets of the cached batch. Passing `dlogits`
    instead backpropagates an arbitrary upstream gradient.
    """
    cfg = model.config
    p = model.params
    X = cache["X"]
    B = X.shape[0]
    if dlogits is None:
        y = np.asarray(y, dtype=DTYPE).reshape(cache["probs"].shape)
        dlogits = (cache["probs"] - y) / B
    grads = {}

    grads["output.W"] = dlogits.T @ cache["last"]
    grads["output.b"] = dlogits.sum(axis=0)
    dact = dlogits @ p["output.W"]

    for j in reversed(range(cfg.dense_depth)):
        w, b = dense_names(j)
        a_in, z, mask = cache["dense"][j]
        if mask is not None:
            dact = dact * mask
        dz = dact * (z > 0)
        grads[w] = dz.T @ a_in
        grads[b] = dz.sum(axis=0)
        dact = dz @ p[w]

    dE = np.zeros((B, cfg.m, cfg.K), dtype=DTYPE)
    offset = 0
    for h in cfg.filter_widths:
        layers, where, L = cache["branches"][h]
        P = where.shape[1]
        size = P * cfg.feature_maps
        dpooled = dact[:, offset:offset + size].reshape(B, P, cfg.feature_maps)
        offset += size
        da = maxpool_backward(dpooled, where, L)
        for layer in reversed(range(cfg.conv_depth)):
            w, b = conv_names(h, layer)
            a_in, z = layers[layer]
            dz = da * (z > 0)
            da, grads[w], grads[b] = conv_backward(dz, a_in, p[w])
        dE += da

    gE = np.zeros_like(p["embedding"])
    if cfg.embeddings_trainable:
        np.add.at(gE, X.ravel(), dE.reshape(-1, cfg.K))
        gE[PAD] = 0.0
    grads["embedding"] = gE
    return {name: grads[name] for name in p}


def check_shapes(model: Model) -> None:
    """Raise if any parameter disagrees with the shapes implied by the config."""
    expected = param_shapes(model.config, len(model.vocab))
    if list(expected) != list(model.params):
        raise ValueError("parameter set does not match the configuration")
    for name, shape in expected.items():
        if model.params[name].shape != shape:
            raise ValueError(f"{name}: shape {model.params[name].shape} != {shape}")


__all__ = [
    "ConvBranch", "DenseLayer", "Model", "backward", "check_shapes", "conv_backward",
    "conv_forward", "conv_output_length", "dropout_mask", "flatten_size", "forward",
    "init_model", "maxpool", "maxpool_backward", "param_shapes", "pooled_length",
    "predict", "relu", "sigmoid",
]
