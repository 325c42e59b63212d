"""Deployment diagnostics: class separability, confusion deltas, ranking.

The separability gate answers "is this embedding space safe to suppress
in?" by quantizing all points into anchor cells (k-means) and measuring
pairwise Jaccard overlap of the cell sets each class occupies. Heavily
overlapping classes mean suppression of one class risks eating the other,
so anything above the advisory threshold should be treated as a warning,
not a hard failure.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.stats import rankdata
from sklearn.cluster import KMeans

from .core import EmbeddingVector

__all__ = [
    "JACCARD_WARN_THRESHOLD",
    "DegenerateData",
    "LengthMismatch",
    "SingleClass",
    "LabeledEmbeddingSet",
    "SeparabilityReport",
    "jaccard_separability",
    "separability_warning",
    "ConfusionDelta",
    "confusion_delta",
    "roc_auc",
]

# Advisory bound: above 10% pairwise cell overlap, suppression is risky.
JACCARD_WARN_THRESHOLD = 0.10


class DegenerateData(ValueError):
    """Input admits no meaningful analysis (e.g. all points identical)."""


class LengthMismatch(ValueError):
    """Parallel sequences have different lengths."""


class SingleClass(ValueError):
    """Ranking metrics need both classes present."""


class LabeledEmbeddingSet:
    """A matrix of embeddings with one class label per row."""

    __slots__ = ("points", "labels")

    def __init__(self, points: np.ndarray | Sequence[Sequence[float]], labels: Sequence[str]) -> None:
        arr = np.asarray(points, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
            raise ValueError("points must be a non-empty 2-D array")
        if not np.isfinite(arr).all():
            raise ValueError("points must be finite")
        if arr.shape[0] != len(labels):
            raise LengthMismatch(f"{arr.shape[0]} points vs {len(labels)} labels")
        self.points = arr
        self.labels = tuple(str(l) for l in labels)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[EmbeddingVector | Sequence[float], str]]) -> "LabeledEmbeddingSet":
        vecs, labels = [], []
        for emb, label in pairs:
            vecs.append(emb.values if isinstance(emb, EmbeddingVector) else emb)
            labels.append(label)
        return cls(np.asarray(vecs, dtype=np.float64), labels)

    def class_labels(self) -> tuple[str, ...]:
        return tuple(sorted(set(self.labels)))


@dataclass(frozen=True, eq=False)
class SeparabilityReport:
    """Pairwise Jaccard overlap of class cell-occupancy sets."""

    labels: tuple[str, ...]
    matrix: np.ndarray  # symmetric, unit diagonal, indexed like labels
    jaccard_max: float  # maximum over distinct class pairs
    anchors: np.ndarray  # fitted anchor points, one row per cell
    warning: bool

    def pair(self, a: str, b: str) -> float:
        return float(self.matrix[self.labels.index(a), self.labels.index(b)])

    def to_report(self) -> dict:
        pairs = []
        for i in range(len(self.labels)):
            for j in range(i + 1, len(self.labels)):
                pairs.append(
                    {
                        "class_a": self.labels[i],
                        "class_b": self.labels[j],
                        "jaccard": float(self.matrix[i, j]),
                    }
                )
        return {"jaccard_max": self.jaccard_max, "jaccard_pairs": pairs, "warning": self.warning}


def separability_warning(jaccard_max: float) -> bool:
    """Advisory flag; fires strictly above the 10% overlap threshold."""
    return bool(jaccard_max > JACCARD_WARN_THRESHOLD)


def jaccard_separability(
    data: LabeledEmbeddingSet,
    anchors: int | None = None,
    seed: int = 0,
) -> SeparabilityReport:
    """Quantize points into anchor cells and measure class overlap.

    Anchors come from k-means (k-means++ init, at most 50 iterations) over
    a lexicographically sorted copy of the points, which makes the result
    deterministic under the seed and invariant to input permutation. Each
    class's signature is the set of cells it occupies; overlap is
    ``|A & B| / |A | B|`` per class pair.

    Args:
        data: labeled embeddings; at least two distinct classes.
        anchors: cell count m >= 2; defaults to 4x the number of classes.
        seed: RNG seed for the k-means++ initialization.
    """
    class_labels = data.class_labels()
    if len(class_labels) < 2:
        raise DegenerateData("separability needs at least two distinct classes")
    points = data.points
    if bool(np.all(points == points[0])):
        raise DegenerateData("all points identical; quantization collapses")
    m = 4 * len(class_labels) if anchors is None else int(anchors)
    if m < 2:
        raise ValueError(f"anchors must be >= 2, got {m}")
    m = min(m, points.shape[0])  # k-means cannot place more anchors than points

    order = np.lexsort(points.T[::-1])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # duplicate-heavy inputs trip ConvergenceWarning
        km = KMeans(n_clusters=m, init="k-means++", n_init=1, max_iter=50, random_state=seed)
        km.fit(points[order])
    cells = km.predict(points)

    occupied = {label: set() for label in class_labels}
    for cell, label in zip(cells, data.labels):
        occupied[label].add(int(cell))

    k = len(class_labels)
    matrix = np.ones((k, k), dtype=np.float64)
    jmax = 0.0
    for i in range(k):
        for j in range(i + 1, k):
            a, b = occupied[class_labels[i]], occupied[class_labels[j]]
            value = len(a & b) / len(a | b)
            matrix[i, j] = matrix[j, i] = value
            jmax = max(jmax, value)
    matrix.setflags(write=False)
    return SeparabilityReport(
        labels=class_labels,
        matrix=matrix,
        jaccard_max=jmax,
        anchors=km.cluster_centers_.copy(),
        warning=separability_warning(jmax),
    )


@dataclass(frozen=True)
class ConfusionDelta:
    """Alert-confusion counts before vs after adjustment at one threshold."""

    tp_before: int
    fp_before: int
    tn_before: int
    fn_before: int
    tp_after: int
    fp_after: int
    tn_after: int
    fn_after: int
    f1_orig: float
    f1_new: float
    delta_fp: int
    delta_tp: int

    def to_report(self) -> dict:
        return {
            "f1_orig": self.f1_orig,
            "f1_new": self.f1_new,
            "delta_fp": self.delta_fp,
            "delta_tp": self.delta_tp,
            "fps_orig": self.fp_before,
            "counts": {
                "before": {"tp": self.tp_before, "fp": self.fp_before, "tn": self.tn_before, "fn": self.fn_before},
                "after": {"tp": self.tp_after, "fp": self.fp_after, "tn": self.tn_after, "fn": self.fn_after},
            },
        }


def _f1(tp: int, fp: int, fn: int) -> float:
    denom = 2 * tp + fp + fn
    return 0.0 if denom == 0 else 2 * tp / denom


def _as_truth(truth: Sequence) -> np.ndarray:
    arr = np.asarray(truth)
    if arr.dtype == bool:
        return arr
    values = np.unique(arr)
    if not np.all(np.isin(values, (0, 1))):
        raise ValueError("truth labels must be binary (bool or 0/1)")
    return arr.astype(bool)


def confusion_delta(
    truth: Sequence,
    scores_before: Sequence[float],
    scores_after: Sequence[float],
    alert_threshold: float,
) -> ConfusionDelta:
    """Tabulate how alert decisions moved across the adjustment.

    An event alerts when its score is strictly greater than the threshold.
    F1 is ``2*TP / (2*TP + FP + FN)`` with the empty case defined as 0.
    """
    t = _as_truth(truth)
    before = np.asarray(scores_before, dtype=np.float64)
    after = np.asarray(scores_after, dtype=np.float64)
    if not (len(t) == len(before) == len(after)):
        raise LengthMismatch(f"lengths differ: truth={len(t)} before={len(before)} after={len(after)}")

    def tabulate(scores: np.ndarray) -> tuple[int, int, int, int]:
        pred = scores > alert_threshold
        tp = int(np.sum(pred & t))
        fp = int(np.sum(pred & ~t))
        tn = int(np.sum(~pred & ~t))
        fn = int(np.sum(~pred & t))
        return tp, fp, tn, fn

    tp_b, fp_b, tn_b, fn_b = tabulate(before)
    tp_a, fp_a, tn_a, fn_a = tabulate(after)
    return ConfusionDelta(
        tp_before=tp_b,
        fp_before=fp_b,
        tn_before=tn_b,
        fn_before=fn_b,
        tp_after=tp_a,
        fp_after=fp_a,
        tn_after=tn_a,
        fn_after=fn_a,
        f1_orig=_f1(tp_b, fp_b, fn_b),
        f1_new=_f1(tp_a, fp_a, fn_a),
        delta_fp=fp_a - fp_b,
        delta_tp=tp_a - tp_b,
    )


def roc_auc(truth: Sequence, scores: Sequence[float]) -> float:
    """Area under the ROC curve by rank statistics; ties count one half.

    Invariant under any strictly monotone transform of the scores.
    """
    t = _as_truth(truth)
    s = np.asarray(scores, dtype=np.float64)
    if len(t) != len(s):
        raise LengthMismatch(f"lengths differ: truth={len(t)} scores={len(s)}")
    pos = int(t.sum())
    neg = len(t) - pos
    if pos == 0 or neg == 0:
        raise SingleClass("roc_auc needs both a positive and a negative example")
    ranks = rankdata(s)
    return float((ranks[t].sum() - pos * (pos + 1) / 2.0) / (pos * neg))
