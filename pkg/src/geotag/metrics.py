"""Per-instance multi-label scores and their averages.

Each score is computed as an exact fraction and rounded once, so equal
rational values always give identical floats.

Empty-set conventions: when both the true and the predicted location sets
are empty, precision, recall, F1 and Jaccard are 1. Otherwise any ratio
with a zero denominator is 0, and F1 is 0 whenever precision + recall is 0.
"""
from __future__ import annotations

import csv
import io
from dataclasses import asdict, dataclass, fields
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

COLUMNS = ("precision", "recall", "f1", "hamming_loss", "jaccard", "exact_match")


@dataclass(frozen=True)
class InstanceScores:
    precision: float
    recall: float
    f1: float
    hamming_loss: float
    jaccard: float
    exact_match: int


@dataclass(frozen=True)
class MetricsReport:
    precision: float
    recall: float
    f1: float
    hamming_loss: float
    jaccard: float
    exact_match: float
    count: int
    label_length: int | None = None  # |L| used for Hamming loss; None if it varied

    def as_row(self) -> list[float]:
        return [getattr(self, c) for c in COLUMNS]

    def to_csv(self, header: bool = True) -> str:
        return reports_to_csv([self], header=header)

    def to_table(self, title: str = "") -> str:
        return format_table([(title, self)])


def _as_mask(values) -> np.ndarray:
    arr = np.asarray(values).ravel()
    if arr.size and not np.isin(arr, (0, 1)).all():
        raise ValueError("masks must contain only 0 and 1")
    return arr.astype(bool)


def _ratio(num: int, den: int) -> Fraction:
    return Fraction(num, den) if den else Fraction(0)


def score_instance(y: Sequence[int], y_hat: Sequence[int]) -> InstanceScores:
    """Score one predicted mask against the true mask.

    Hamming loss divides by the mask length, so pass padded masks to score
    over the full output layer.
    """
    y = _as_mask(y)
    y_hat = _as_mask(y_hat)
    if y.shape != y_hat.shape:
        raise ValueError(f"mask lengths differ: {y.size} vs {y_hat.size}")
    n_true = int(y.sum())
    n_pred = int(y_hat.sum())
    inter = int((y & y_hat).sum())
    union = int((y | y_hat).sum())
    wrong = int((y != y_hat).sum())

    if n_true == 0 and n_pred == 0:
        p = r = f1 = jac = Fraction(1)
    else:
        p = _ratio(inter, n_pred)
        r = _ratio(inter, n_true)
        f1 = 2 * p * r / (p + r) if p + r else Fraction(0)
        jac = _ratio(inter, union)
    hl = _ratio(wrong, y.size)
    return InstanceScores(float(p), float(r), float(f1), float(hl), float(jac), int(wrong == 0))


def score_batch(Y, Y_hat) -> list[InstanceScores]:
    """Score each row of two (N, L) mask arrays."""
    Y = np.asarray(Y)
    Y_hat = np.asarray(Y_hat)
    if Y.shape != Y_hat.shape:
        raise ValueError(f"shape mismatch {Y.shape} vs {Y_hat.shape}")
    return [score_instance(a, b) for a, b in zip(Y, Y_hat)]


def aggregate(scores: Iterable[InstanceScores], label_length: int | None = None) -> MetricsReport:
    scores = list(scores)
    if not scores:
        raise ValueError("cannot aggregate an empty set of scores")
    means = {c: float(np.mean([getattr(s, c) for s in scores])) for c in COLUMNS}
    return MetricsReport(**means, count=len(scores), label_length=label_length)


def evaluate_masks(Y, Y_hat) -> MetricsReport:
    """Aggregate scores of padded (N, m) masks; Hamming loss uses |L| = m."""
    Y = np.asarray(Y)
    return aggregate(score_batch(Y, Y_hat), label_length=Y.shape[1])


def mean_report(reports: Sequence[MetricsReport]) -> MetricsReport:
    """Unweighted mean over reports (e.g. cross-validation folds)."""
    if not reports:
        raise ValueError("no reports to average")
    means = {c: float(np.mean([getattr(r, c) for r in reports])) for c in COLUMNS}
    lengths = {r.label_length for r in reports}
    return MetricsReport(
        **means,
        count=sum(r.count for r in reports),
        label_length=lengths.pop() if len(lengths) == 1 else None,
    )


def reports_to_csv(reports: Sequence[MetricsReport], labels: Sequence[str] | None = None,
                   header: bool = True) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    lead = ["name"] if labels is not None else []
    if header:
        w.writerow(lead + list(COLUMNS) + ["count"])
    for i, rep in enumerate(reports):
        row = [labels[i]] if labels is not None else []
        w.writerow(row + [repr(v) for v in rep.as_row()] + [rep.count])
    return buf.getvalue()


def format_table(rows: Sequence[tuple[str, MetricsReport]]) -> str:
    names = [name for name, _ in rows]
    width = max([len("approach")] + [len(n) for n in names])
    heads = ["Precision", "Recall", "F1", "Hamming", "Jaccard", "Exact"]
    lines = ["  ".join([f"{'approach':<{width}}"] + [f"{h:>9}" for h in heads])]
    for name, rep in rows:
        vals = [f"{v:>9.3f}" for v in rep.as_row()]
        lines.append("  ".join([f"{name:<{width}}"] + vals))
    return "\n".join(lines) + "\n"


def report_from_dict(d: dict) -> MetricsReport:
    names = {f.name for f in fields(MetricsReport)}
    return MetricsReport(**{k: v for k, v in d.items() if k in names})


def report_to_dict(r: MetricsReport) -> dict:
    return asdict(r)
