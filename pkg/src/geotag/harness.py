"""k-fold cross-validation and architecture sweeps."""
from __future__ import annotations

import csv
import io
import itertools
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .config import FIELD_NAMES, ModelConfig, _parse_value, format_value
from .corpus import Corpus
from .embedding import Vocabulary, build_lookup, build_vocab, encode_batch, load_pretrained
from .errors import ConfigError, GeotagError, TrainingError
from .metrics import COLUMNS, MetricsReport, evaluate_masks, format_table, mean_report, reports_to_csv
from .nn_core import Model, init_model
from .training import train

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FoldPlan:
    k: int
    assignments: tuple[int, ...]
    seed: int

    def test_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(np.asarray(self.assignments) == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(np.asarray(self.assignments) != fold)

    def sizes(self) -> list[int]:
        return np.bincount(self.assignments, minlength=self.k).tolist()


def kfold_split(n: int, k: int = 10, seed: int = 0) -> FoldPlan:
    """Shuffle 0..n-1 and deal them round-robin into k folds."""
    if k < 2:
        raise ValueError("k must be at least 2")
    if n < k:
        raise ValueError(f"cannot split {n} examples into {k} folds")
    order = np.random.default_rng([seed, 11]).permutation(n)
    assignments = np.empty(n, dtype=np.int64)
    assignments[order] = np.arange(n) % k
    return FoldPlan(k, tuple(int(a) for a in assignments), seed)


def fit(
    train_set: Corpus,
    config: ModelConfig,
    pretrained: dict | None = None,
    vocab: Vocabulary | None = None,
) -> Model:
    """Vocabulary, lookup matrix, fresh model and training on one split."""
    vocab = vocab or build_vocab(train_set)
    lookup = build_lookup(vocab, pretrained, config.seed, K=config.K)
    model = init_model(config, vocab, lookup)
    model, _ = train(model, train_set, config)
    return model


def evaluate(model: Model, corpus: Corpus) -> MetricsReport:
    """Score thresholded predictions over the full padded length m."""
    X, Y, _ = encode_batch(corpus, model.vocab, model.config.m)
    return evaluate_masks(Y, model.tag(X))


@dataclass
class FoldResult:
    fold: int
    report: MetricsReport
    train_indices: np.ndarray
    test_indices: np.ndarray
    vocabulary: Vocabulary


@dataclass
class CVResult:
    folds: list[FoldResult]
    mean: MetricsReport

    def to_csv(self) -> str:
        labels = [f"fold{f.fold}" for f in self.folds] + ["mean"]
        return reports_to_csv([f.report for f in self.folds] + [self.mean], labels=labels)


def _run_fold(corpus, plan, fold, config, pretrained, paper_vocab):
    tr = corpus.subset(plan.train_indices(fold))
    te = corpus.subset(plan.test_indices(fold))
    vocab = build_vocab(corpus) if paper_vocab else build_vocab(tr)
    try:
        model = fit(tr, config, pretrained, vocab)
    except TrainingError as exc:
        raise TrainingError(f"fold {fold}: {exc}") from None
    return FoldResult(fold, evaluate(model, te), plan.train_indices(fold),
                      plan.test_indices(fold), vocab)


def cross_validate(
    corpus: Corpus,
    config: ModelConfig,
    embeddings_path: str | Path | None = None,
    k: int = 10,
    seed: int | None = None,
    paper_vocab: bool = False,
    workers: int = 1,
    pretrained: dict | None = None,
) -> CVResult:
    """Train and score one model per fold; the mean is unweighted over folds.

    By default each fold's vocabulary comes from its training split only, so
    held-out words are OOV. ``paper_vocab=True`` builds one vocabulary from
    the whole corpus instead.
    """
    seed = config.seed if seed is None else seed
    plan = kfold_split(len(corpus), k, seed)
    if pretrained is None and embeddings_path is not None:
        pretrained = load_pretrained(embeddings_path, config.K, restrict_to=build_vocab(corpus))
    args = [(corpus, plan, f, config, pretrained, paper_vocab) for f in range(k)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            folds = list(pool.map(_run_fold, *zip(*args)))
    else:
        folds = [_run_fold(*a) for a in args]
    for f in folds:
        logger.info("fold %d: f1=%.4f exact=%.4f", f.fold, f.report.f1, f.report.exact_match)
    return CVResult(folds, mean_report([f.report for f in folds]))


# -- sweeps ----------------------------------------------------------------


@dataclass
class SweepSpec:
    variants: list[tuple[str, ModelConfig]] = field(default_factory=list)

    def __post_init__(self):
        for name, cfg in self.variants:
            cfg.validate()

    def __len__(self):
        return len(self.variants)

    def __iter__(self):
        return iter(self.variants)


def _widths_label(widths) -> str:
    return ",".join(str(h) for h in widths)


def filter_grid(base: ModelConfig, widths=(2, 3, 4, 5)) -> SweepSpec:
    """Every non-empty subset of `widths` (15 rows for 2-5)."""
    variants = []
    for r in range(1, len(widths) + 1):
        for combo in itertools.combinations(widths, r):
            variants.append((_widths_label(combo), base.with_(filter_widths=combo)))
    return SweepSpec(variants)


def stacked_filter_grid(base: ModelConfig) -> SweepSpec:
    """Filter-size grid on the 2-CNN + 2-Dense + dropout architecture."""
    return filter_grid(base.with_(conv_depth=2, dense_depth=2, dropout=base.dropout or 0.2))


def dense_grid(base: ModelConfig, dropout: float = 0.2) -> SweepSpec:
    """1-/2-CNN crossed with 1-3 dense layers, with and without dropout."""
    variants = [("1-CNN + 1-Dense", base.with_(conv_depth=1, dense_depth=1, dropout=0.0))]
    for cnn in (1, 2):
        for dense in (1, 2, 3):
            if cnn == 1 and dense == 1:
                continue
            variants.append((f"{cnn}-CNN + {dense}-Dense", base.with_(conv_depth=cnn, dense_depth=dense, dropout=0.0)))
            if dense > 1:
                variants.append((f"{cnn}-CNN + {dense}-Dense + Dropout",
                                 base.with_(conv_depth=cnn, dense_depth=dense, dropout=dropout)))
    return SweepSpec(variants)


def conv_depth_grid(base: ModelConfig, depths=(1, 2, 3, 4), dropout: float = 0.2) -> SweepSpec:
    return SweepSpec([(f"{d}-CNN + 2-Dense + Dropout", base.with_(conv_depth=d, dense_depth=2, dropout=dropout))
                      for d in depths])


def parse_sweep_text(text: str, base: ModelConfig | None = None) -> SweepSpec:
    """Sweep file: config lines where ``|`` separates alternative values.

    The variants are the cartesian product of all alternatives, in file
    order; e.g. ``filter_widths = 2 | 3 | 2,3,4`` with ``conv_depth = 1 | 2``
    gives six variants.
    """
    base = base or ModelConfig()
    keys, options = [], []
    fixed = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"sweep line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in FIELD_NAMES:
            raise ConfigError(f"sweep line {lineno}: unknown key {key!r}")
        try:
            alts = [_parse_value(key, v) for v in value.split("|")]
        except ValueError as exc:
            raise ConfigError(f"sweep line {lineno}: bad value for {key}: {exc}") from None
        if len(alts) == 1:
            fixed[key] = alts[0]
        else:
            keys.append(key)
            options.append(alts)
    base = replace(base, **fixed)
    variants = []
    for combo in itertools.product(*options):
        changes = dict(zip(keys, combo))
        name = " ".join(f"{k}={format_value(v)}" for k, v in changes.items()) or "base"
        variants.append((name, replace(base, **changes)))
    return SweepSpec(variants)


@dataclass
class SweepRow:
    name: str
    config: ModelConfig
    report: MetricsReport | None
    error: str | None = None
    best: bool = False


def _rank_key(row: SweepRow):
    r = row.report
    return (r.f1, r.exact_match, -r.hamming_loss)


@dataclass
class SweepResult:
    rows: list[SweepRow]

    @property
    def best(self) -> SweepRow | None:
        return next((r for r in self.rows if r.best), None)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["variant", *COLUMNS, "count", "best", "error"])
        for row in self.rows:
            vals = [repr(v) for v in row.report.as_row()] + [row.report.count] if row.report else [""] * 7
            w.writerow([row.name, *vals, int(row.best), row.error or ""])
        return buf.getvalue()

    def to_table(self) -> str:
        ok = [(("* " if r.best else "  ") + r.name, r.report) for r in self.rows if r.report]
        text = format_table(ok) if ok else ""
        for r in self.rows:
            if r.error:
                text += f"  {r.name}: FAILED ({r.error})\n"
        return text


def sweep(
    corpus: Corpus,
    spec: SweepSpec,
    embeddings_path: str | Path | None = None,
    k: int = 10,
    seed: int | None = None,
    paper_vocab: bool = False,
    workers: int = 1,
) -> SweepResult:
    """Cross-validate every variant; the best row maximizes F1, then exact
    match, then minimizes Hamming loss. A failing variant is recorded and
    the sweep moves on."""
    if not len(spec):
        raise ValueError("sweep spec has no variants")
    pretrained_cache: dict[int, dict] = {}
    rows = []
    for name, cfg in spec.variants:
        try:
            pretrained = None
            if embeddings_path is not None:
                if cfg.K not in pretrained_cache:
                    pretrained_cache[cfg.K] = load_pretrained(embeddings_path, cfg.K,
                                                              restrict_to=build_vocab(corpus))
                pretrained = pretrained_cache[cfg.K]
            res = cross_validate(corpus, cfg, k=k, seed=seed, paper_vocab=paper_vocab,
                                 workers=workers, pretrained=pretrained)
            rows.append(SweepRow(name, cfg, res.mean))
        except (GeotagError, ValueError) as exc:
            logger.warning("variant %s failed: %s", name, exc)
            rows.append(SweepRow(name, cfg, None, error=str(exc)))
    scored = [r for r in rows if r.report is not None]
    if scored:
        max(scored, key=_rank_key).best = True
    return SweepResult(rows)
