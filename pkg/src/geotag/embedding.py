"""Vocabulary, pretrained vectors, lookup matrix and tweet encoding."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .corpus import AnnotatedTweet, Corpus
from .errors import EmbeddingFormatError

PAD = 0
OOV = 1
PAD_TOKEN = "<pad>"
OOV_TOKEN = "<unk>"
INIT_RANGE = 0.05


@dataclass(frozen=True)
class Vocabulary:
    """Token-to-index map. Index 0 is padding, index 1 the unknown word."""

    tokens: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        if self.tokens[:2] != (PAD_TOKEN, OOV_TOKEN):
            raise ValueError("vocabulary must start with the PAD and OOV tokens")
        if len(set(self.tokens)) != len(self.tokens):
            raise ValueError("vocabulary tokens must be unique")
        object.__setattr__(self, "_index", {t: i for i, t in enumerate(self.tokens)})

    @property
    def word_to_index(self) -> dict[str, int]:
        return dict(self._index)

    def __len__(self):
        return len(self.tokens)

    def __contains__(self, token):
        return token in self._index

    def index(self, token: str) -> int:
        return self._index.get(token, OOV)


def build_vocab(corpus: Corpus | Iterable[AnnotatedTweet]) -> Vocabulary:
    """PAD, OOV, then every distinct corpus token in lexicographic order."""
    words = set()
    n = 0
    for ex in corpus:
        words.update(ex.tokens)
        n += 1
    if n == 0:
        raise ValueError("cannot build a vocabulary from an empty corpus")
    words.discard(PAD_TOKEN)
    words.discard(OOV_TOKEN)
    return Vocabulary((PAD_TOKEN, OOV_TOKEN, *sorted(words)))


def load_pretrained(
    path: str | Path, K: int, restrict_to: Vocabulary | None = None
) -> dict[str, np.ndarray]:
    """Parse a "token v1 ... vK" text embedding file.

    With `restrict_to`, only words in that vocabulary are kept (arity is
    still checked on every line). The first occurrence of a word wins.
    """
    path = Path(path)
    try:
        fh = path.open(encoding="utf-8")
    except OSError as exc:
        raise EmbeddingFormatError(f"cannot read embedding file {path}: {exc}") from None
    vectors: dict[str, np.ndarray] = {}
    with fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) - 1 != K:
                raise EmbeddingFormatError(
                    f"{path} line {lineno}: expected {K} values, found {len(parts) - 1}"
                )
            word = parts[0]
            if word in vectors or (restrict_to is not None and word not in restrict_to):
                continue
            try:
                vec = np.array([float(v) for v in parts[1:]], dtype=np.float64)
            except ValueError:
                raise EmbeddingFormatError(f"{path} line {lineno}: non-numeric value") from None
            if not np.all(np.isfinite(vec)):
                raise EmbeddingFormatError(f"{path} line {lineno}: non-finite value")
            vectors[word] = vec
    return vectors


@dataclass
class EmbeddingMatrix:
    rows: np.ndarray
    from_pretrained: np.ndarray  # bool per row

    @property
    def K(self) -> int:
        return self.rows.shape[1]

    @property
    def coverage(self) -> float:
        """Fraction of vocabulary rows copied from the pretrained table."""
        return float(self.from_pretrained.mean())


def build_lookup(
    vocab: Vocabulary,
    pretrained: Mapping[str, np.ndarray] | None,
    seed: int,
    K: int | None = None,
) -> EmbeddingMatrix:
    """Lookup matrix: pretrained rows where available, small uniform noise elsewhere, zero PAD."""
    if pretrained:
        dims = {len(v) for v in pretrained.values()}
        if len(dims) != 1:
            raise EmbeddingFormatError(f"pretrained vectors have mixed dimensions {sorted(dims)}")
        (k_pre,) = dims
        if K is not None and K != k_pre:
            raise EmbeddingFormatError(f"pretrained dimension {k_pre} != configured K={K}")
        K = k_pre
    if K is None:
        raise ValueError("K is required when no pretrained vectors are given")

    rng = np.random.default_rng(seed)
    rows = rng.uniform(-INIT_RANGE, INIT_RANGE, size=(len(vocab), K))
    copied = np.zeros(len(vocab), dtype=bool)
    if pretrained:
        for i, tok in enumerate(vocab.tokens):
            if i > OOV and tok in pretrained:
                rows[i] = pretrained[tok]
                copied[i] = True
    rows[PAD] = 0.0
    return EmbeddingMatrix(rows, copied)


@dataclass(frozen=True)
class EncodedTweet:
    indices: np.ndarray  # (m,) int
    labels: np.ndarray  # (m,) 0/1, zero beyond true_length
    true_length: int

    @property
    def m(self) -> int:
        return len(self.indices)


def encode(tweet: AnnotatedTweet, vocab: Vocabulary, m: int) -> EncodedTweet:
    n = min(len(tweet.tokens), m)
    indices = np.full(m, PAD, dtype=np.int64)
    labels = np.zeros(m, dtype=np.int64)
    indices[:n] = [vocab.index(t) for t in tweet.tokens[:n]]
    labels[:n] = tweet.mask[:n]
    return EncodedTweet(indices, labels, n)


def encode_tokens(tokens, vocab: Vocabulary, m: int) -> EncodedTweet:
    """Encode an unlabeled token list (labels are all zero)."""
    return encode(AnnotatedTweet(tuple(tokens), (0,) * len(tokens)), vocab, m)


def encode_batch(tweets: Iterable[AnnotatedTweet], vocab: Vocabulary, m: int):
    """Stack encodings into ``(indices, labels, lengths)`` arrays."""
    encs = [encode(t, vocab, m) for t in tweets]
    if not encs:
        return (np.zeros((0, m), np.int64), np.zeros((0, m), np.int64), np.zeros(0, np.int64))
    return (
        np.stack([e.indices for e in encs]),
        np.stack([e.labels for e in encs]),
        np.array([e.true_length for e in encs], dtype=np.int64),
    )


def embed(enc: EncodedTweet | np.ndarray, lookup: EmbeddingMatrix | np.ndarray) -> np.ndarray:
    """Tweet matrix: row i is the lookup row of token i (m x K)."""
    indices = enc.indices if isinstance(enc, EncodedTweet) else np.asarray(enc)
    rows = lookup.rows if isinstance(lookup, EmbeddingMatrix) else lookup
    if indices.size and (indices.min() < 0 or indices.max() >= rows.shape[0]):
        raise IndexError(
            f"token index out of range for a {rows.shape[0]}-row lookup matrix"
        )
    return rows[indices]
