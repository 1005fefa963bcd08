"""Binary model file.

Layout (all integers and floats little-endian)::

    magic            4 bytes  b"GTAG"
    version          u32      FORMAT_VERSION
    config           m u32, K u32, n_widths u32, widths u32 * n_widths,
                     feature_maps u32, pool_window u32, conv_depth u32,
                     dense_depth u32, dense_hidden u32, dropout f64,
                     learning_rate f64, batch_size u32, epochs u32,
                     threshold f64, embeddings_trainable u8, seed i64
    vocabulary       count u32, then per token: byte length u32 + UTF-8 bytes,
                     in index order
    body length      u64
    body             every parameter as f64, row-major, in this order:
                     embedding rows; for each width (ascending) and each conv
                     layer: weights (maps, h, C_in) then biases; each hidden
                     dense layer: weights (out, in) then biases; output
                     weights then biases
    trailer          u32 CRC32 of the body
"""
from __future__ import annotations

import struct
import zlib
from pathlib import Path

import numpy as np

from .config import ModelConfig
from .embedding import Vocabulary
from .errors import ChecksumError, ConfigError, MagicError, ModelFileError, TruncatedError, VersionError
from .nn_core import Model, param_shapes

MAGIC = b"GTAG"
FORMAT_VERSION = 1
_BODY_DTYPE = np.dtype("<f8")


def _config_bytes(c: ModelConfig) -> bytes:
    widths = c.filter_widths
    return b"".join([
        struct.pack("<III", c.m, c.K, len(widths)),
        struct.pack(f"<{len(widths)}I", *widths),
        struct.pack("<IIIII", c.feature_maps, c.pool_window, c.conv_depth, c.dense_depth, c.dense_hidden),
        struct.pack("<dd", c.dropout, c.learning_rate),
        struct.pack("<II", c.batch_size, c.epochs),
        struct.pack("<dBq", c.threshold, int(c.embeddings_trainable), c.seed),
    ])


def model_to_bytes(model: Model) -> bytes:
    parts = [MAGIC, struct.pack("<I", FORMAT_VERSION), _config_bytes(model.config)]
    parts.append(struct.pack("<I", len(model.vocab)))
    for tok in model.vocab.tokens:
        raw = tok.encode("utf-8")
        parts.append(struct.pack("<I", len(raw)) + raw)
    body = b"".join(np.ascontiguousarray(model.params[name], dtype=_BODY_DTYPE).tobytes()
                    for name in param_shapes(model.config, len(model.vocab)))
    parts.append(struct.pack("<Q", len(body)))
    parts.append(body)
    parts.append(struct.pack("<I", zlib.crc32(body)))
    return b"".join(parts)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise TruncatedError(
                f"model file truncated: needed {n} bytes at offset {self.pos}, "
                f"only {len(self.data) - self.pos} left"
            )
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def model_from_bytes(data: bytes) -> Model:
    r = _Reader(data)
    if len(data) < len(MAGIC) or r.take(len(MAGIC)) != MAGIC:
        raise MagicError("not a model file (bad magic bytes)")
    (version,) = r.unpack("<I")
    if version != FORMAT_VERSION:
        raise VersionError(f"unsupported model format version {version} (expected {FORMAT_VERSION})")

    m, K, n_widths = r.unpack("<III")
    widths = r.unpack(f"<{n_widths}I")
    feature_maps, pool_window, conv_depth, dense_depth, dense_hidden = r.unpack("<IIIII")
    dropout, learning_rate = r.unpack("<dd")
    batch_size, epochs = r.unpack("<II")
    threshold, trainable, seed = r.unpack("<dBq")
    try:
        config = ModelConfig(
            m=m, K=K, filter_widths=widths, feature_maps=feature_maps, pool_window=pool_window,
            conv_depth=conv_depth, dense_depth=dense_depth, dense_hidden=dense_hidden,
            dropout=dropout, learning_rate=learning_rate, batch_size=batch_size, epochs=epochs,
            threshold=threshold, embeddings_trainable=bool(trainable), seed=seed,
        )
    except ConfigError as exc:
        raise ModelFileError(f"model file holds an invalid config: {exc}") from None

    (count,) = r.unpack("<I")
    tokens = []
    for _ in range(count):
        (n,) = r.unpack("<I")
        try:
            tokens.append(r.take(n).decode("utf-8"))
        except UnicodeDecodeError:
            raise ModelFileError("vocabulary token is not valid UTF-8") from None
    try:
        vocab = Vocabulary(tuple(tokens))
    except ValueError as exc:
        raise ModelFileError(f"invalid vocabulary: {exc}") from None

    (body_len,) = r.unpack("<Q")
    body = r.take(body_len)
    (crc,) = r.unpack("<I")
    if zlib.crc32(body) != crc:
        raise ChecksumError("parameter body does not match its CRC32")
    if r.pos != len(data):
        raise ModelFileError(f"{len(data) - r.pos} unexpected trailing bytes")

    shapes = param_shapes(config, len(vocab))
    expected = sum(int(np.prod(s)) for s in shapes.values()) * _BODY_DTYPE.itemsize
    if expected != body_len:
        raise ModelFileError(f"body holds {body_len} bytes, config implies {expected}")
    params = {}
    offset = 0
    for name, shape in shapes.items():
        size = int(np.prod(shape))
        arr = np.frombuffer(body, dtype=_BODY_DTYPE, count=size, offset=offset)
        params[name] = arr.astype(np.float64).reshape(shape)
        offset += size * _BODY_DTYPE.itemsize
    return Model(config, vocab, params)


def save_model(model: Model, path: str | Path) -> None:
    Path(path).write_bytes(model_to_bytes(model))


def load_model(path: str | Path) -> Model:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise ModelFileError(f"cannot read model file {path}: {exc}") from None
    return model_from_bytes(data)
