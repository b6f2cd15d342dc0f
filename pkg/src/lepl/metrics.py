"""Multi-label ranking and classification metrics.

One rank convention everywhere: ranks are 1-based on descending scores,
and tied scores are ordered by ascending class index. rank_of is the
single source of truth for it.

Final reductions use math.fsum, so every metric is deterministic and
invariant under instance or class reorderings that should not matter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class MetricsReport:
    """Bundle of the five standard metrics.

    map, lrl, one_error, hamming_risk lie in [0, 1]; coverage_error is a
    mean of 1-based ranks, so it is at least 1.
    """

    map: float
    lrl: float
    coverage_error: float
    one_error: float
    hamming_risk: float

    def __post_init__(self):
        for name in ("map", "lrl", "one_error", "hamming_risk"):
            v = getattr(self, name)
            if not (np.isfinite(v) and 0.0 <= v <= 1.0):
                raise ValueError(f"{name} must lie in [0, 1], got {v!r}")
        if not (np.isfinite(self.coverage_error) and self.coverage_error >= 1.0):
            raise ValueError(f"coverage_error must be >= 1, got {self.coverage_error!r}")

    def as_dict(self) -> dict:
        return {
            "map": float(self.map),
            "lrl": float(self.lrl),
            "coverage_error": float(self.coverage_error),
            "one_error": float(self.one_error),
            "hamming_risk": float(self.hamming_risk),
        }


def _scores_of(pred) -> np.ndarray:
    s = np.asarray(getattr(pred, "values", pred), dtype=np.float64)
    if s.ndim != 2:
        raise ValueError(f"scores must be 2-dimensional, got shape {s.shape}")
    if not np.all(np.isfinite(s)):
        raise ValueError("scores contain non-finite entries")
    return s


def _truth_of(truth) -> np.ndarray:
    y = np.asarray(getattr(truth, "values", truth))
    if y.ndim != 2:
        raise ValueError(f"labels must be 2-dimensional, got shape {y.shape}")
    if not np.isin(y, (0, 1)).all():
        raise ValueError("label entries must be 0 or 1")
    return y.astype(np.int64)


def _pair(pred, truth) -> tuple[np.ndarray, np.ndarray]:
    s = _scores_of(pred)
    y = _truth_of(truth)
    if s.shape != y.shape:
        raise ValueError(
            f"shape mismatch: predictions are {s.shape[0]}x{s.shape[1]}, "
            f"labels are {y.shape[0]}x{y.shape[1]}"
        )
    return s, y


def rank_of(scores, label: int) -> int:
    """1-based rank of scores[label] under descending order.

    Ties are resolved by ascending index: rank = 1 + #{k : s_k > s_label}
    + #{k < label : s_k = s_label}.
    """
    s = np.asarray(scores, dtype=np.float64)
    if s.ndim != 1:
        raise ValueError(f"scores must be 1-dimensional, got shape {s.shape}")
    if not 0 <= label < s.shape[0]:
        raise ValueError(f"label {label} out of range for {s.shape[0]} scores")
    above = int(np.count_nonzero(s > s[label]))
    tied_before = int(np.count_nonzero(s[:label] == s[label]))
    return 1 + above + tied_before


def mean_average_precision(pred, truth) -> float:
    """Macro-averaged AP over classes with at least one positive.

    Per class, instances are ranked by descending score (ties by ascending
    instance index) and AP is the mean of precision-at-rank over the
    positive instances. Classes with no positives are left out of the
    macro mean entirely.
    """
    s, y = _pair(pred, truth)
    n = s.shape[0]
    idx = np.arange(n)
    aps = []
    for c in range(s.shape[1]):
        pos_total = int(y[:, c].sum())
        if pos_total == 0:
            continue
        order = np.lexsort((idx, -s[:, c]))
        y_sorted = y[order, c]
        cum = np.cumsum(y_sorted)
        at = np.flatnonzero(y_sorted)
        precisions = cum[at] / (at + 1)
        aps.append(math.fsum(precisions) / pos_total)
    if not aps:
        raise ValueError("labels contain no positives anywhere; mAP undefined")
    return math.fsum(aps) / len(aps)


def label_ranking_loss(pred, truth) -> float:
    """Fraction of (positive, negative) pairs ranked wrongly, tied pairs
    counted as violations. Instances lacking positives or lacking
    negatives are skipped; all-skipped is an error.
    """
    s, y = _pair(pred, truth)
    per_instance = []
    for i in range(s.shape[0]):
        pos = s[i, y[i] == 1]
        neg = s[i, y[i] == 0]
        if pos.size == 0 or neg.size == 0:
            continue
        violations = int(np.count_nonzero(pos[:, None] <= neg[None, :]))
        per_instance.append(violations / (pos.size * neg.size))
    if not per_instance:
        raise ValueError("every instance was skipped; ranking loss undefined")
    return math.fsum(per_instance) / len(per_instance)


def coverage_error(pred, truth) -> float:
    """Mean over instances of the worst rank among that instance's
    positives (1-based, no correction term). Zero-positive instances are
    skipped; all-skipped is an error.
    """
    s, y = _pair(pred, truth)
    worst = []
    for i in range(s.shape[0]):
        pos = np.flatnonzero(y[i])
        if pos.size == 0:
            continue
        worst.append(max(rank_of(s[i], int(j)) for j in pos))
    if not worst:
        raise ValueError("every instance was skipped; coverage undefined")
    return math.fsum(worst) / len(worst)


def one_error(pred, truth) -> float:
    """Fraction of instances whose top-ranked class (ties to the lowest
    index) is not one of its positives. Zero-positive instances skipped.
    """
    s, y = _pair(pred, truth)
    misses = []
    for i in range(s.shape[0]):
        if not y[i].any():
            continue
        top = int(np.argmax(s[i]))  # first max, i.e. lowest index on ties
        misses.append(0.0 if y[i, top] == 1 else 1.0)
    if not misses:
        raise ValueError("every instance was skipped; one-error undefined")
    return math.fsum(misses) / len(misses)


def hamming_risk(pred, truth) -> float:
    """Mean elementwise disagreement after thresholding at 0.5.

    Real-valued predictions are binarized with ties going to 1; a {0, 1}
    matrix passes through unchanged.
    """
    s = np.asarray(getattr(pred, "values", pred))
    y = _truth_of(truth)
    if s.shape != y.shape:
        raise ValueError(
            f"shape mismatch: predictions are {s.shape}, labels are {y.shape}"
        )
    if np.isin(s, (0, 1)).all():
        b = s.astype(np.int64)
    else:
        s = _scores_of(s)
        b = (s >= 0.5).astype(np.int64)
    return float(np.count_nonzero(b != y) / y.size)


def evaluate(pred, truth) -> MetricsReport:
    """All five metrics in one report."""
    return MetricsReport(
        map=mean_average_precision(pred, truth),
        lrl=label_ranking_loss(pred, truth),
        coverage_error=coverage_error(pred, truth),
        one_error=one_error(pred, truth),
        hamming_risk=hamming_risk(pred, truth),
    )
