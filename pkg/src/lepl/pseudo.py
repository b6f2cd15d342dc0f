"""Class-prior-guided pseudo-label generation.

Class priors estimated on the fully labeled validation split decide how
many positives each class should carry on the training split. Per class,
the observed positives are always kept and the highest-scoring unobserved
instances (by soft label value) are promoted until the prior-implied count
is reached.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import LabelMatrix, _freeze, load_labels, write_labels
from .enhancement import SoftLabelMatrix


@dataclass(frozen=True)
class ClassPriors:
    """Validation-estimated marginal label frequencies and implied counts."""

    C: int
    gamma_hat: np.ndarray  # (C,) float64 in [0, 1]
    k_per_class: np.ndarray  # (C,) int64, k[c] = floor(gamma_hat[c] * n_train)

    def __post_init__(self):
        g = np.asarray(self.gamma_hat, dtype=np.float64)
        k = np.asarray(self.k_per_class, dtype=np.int64)
        if g.shape != (self.C,) or k.shape != (self.C,):
            raise ValueError(f"priors need C={self.C} entries, got {g.shape} and {k.shape}")
        if np.any(g < 0) or np.any(g > 1):
            raise ValueError("gamma_hat entries must lie in [0, 1]")
        if np.any(k < 0):
            raise ValueError("k_per_class entries must be >= 0")
        object.__setattr__(self, "gamma_hat", _freeze(g))
        object.__setattr__(self, "k_per_class", _freeze(k))


@dataclass(frozen=True)
class PseudoLabelMatrix:
    """n x C binary pseudo-label matrix; rows carry any number of positives."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise ValueError(f"pseudo labels need shape (n >= 1, C >= 1), got {v.shape}")
        if not np.isin(v, (0, 1)).all():
            raise ValueError("pseudo label entries must be 0 or 1")
        object.__setattr__(self, "values", _freeze(v.astype(np.int8)))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def C(self) -> int:
        return self.values.shape[1]


def estimate_priors(val_labels: LabelMatrix, n_train: int) -> ClassPriors:
    """Per-class frequency on the validation split, scaled to train counts.

    The count floor(gamma_hat[c] * n_train) is evaluated in integer
    arithmetic (count * n_train // n_val) so it is the exact mathematical
    floor, immune to float rounding like 0.7 * 10 -> 6.999....
    """
    if val_labels.kind != "full":
        raise ValueError(f"priors need full validation labels, got kind={val_labels.kind!r}")
    if n_train < 1:
        raise ValueError("n_train must be >= 1")
    counts = val_labels.values.sum(axis=0, dtype=np.int64)
    gamma = counts / val_labels.n
    k = counts * n_train // val_labels.n
    return ClassPriors(C=val_labels.C, gamma_hat=gamma, k_per_class=k)


def generate(
    d: SoftLabelMatrix, priors: ClassPriors, observed: LabelMatrix
) -> PseudoLabelMatrix:
    """Promote top-scoring unobserved instances per class.

    For class c the final positive count is exactly max(k_per_class[c],
    observed count): observed positives are never dropped, and promotion
    fills the remainder by descending soft label value with ties broken by
    ascending instance index.
    """
    if observed.kind != "partial":
        raise ValueError(f"expected partial observed labels, got kind={observed.kind!r}")
    if d.n != observed.n or d.C != observed.C:
        raise ValueError(
            f"soft labels are {d.n}x{d.C} but observed labels are {observed.n}x{observed.C}"
        )
    if priors.C != observed.C:
        raise ValueError(f"priors cover C={priors.C} classes, labels have C={observed.C}")
    scores = d.values
    out = observed.values.astype(np.int8).copy()
    idx = np.arange(observed.n)
    for c in range(observed.C):
        obs = out[:, c] == 1
        need = int(priors.k_per_class[c]) - int(obs.sum())
        if need <= 0:
            continue
        cand = idx[~obs]
        order = np.lexsort((cand, -scores[~obs, c]))
        out[cand[order[:need]], c] = 1
    return PseudoLabelMatrix(out)


def unreliability(pseudo, truth) -> float:
    """Worst per-class disagreement rate between two label matrices.

    Empirical plug-in for the pseudo-label unreliability degree: the max
    over classes of the mean elementwise mismatch. Symmetric in its two
    arguments and always inside [0, 1].
    """
    a = np.asarray(getattr(pseudo, "values", pseudo))
    b = np.asarray(getattr(truth, "values", truth))
    if a.shape != b.shape:
        raise ValueError(f"label matrices differ in shape: {a.shape} vs {b.shape}")
    if a.ndim != 2:
        raise ValueError(f"label matrices must be 2-dimensional, got shape {a.shape}")
    mismatch = (a != b).sum(axis=0, dtype=np.int64)
    return float((mismatch / a.shape[0]).max())


def single_label_pseudo(observed: LabelMatrix) -> PseudoLabelMatrix:
    """Reinterpret the observed single positives as-is (the naive baseline)."""
    if observed.kind != "partial":
        raise ValueError(f"expected partial observed labels, got kind={observed.kind!r}")
    return PseudoLabelMatrix(observed.values.copy())


# --------------------------------------------------------------------------
# pseudo label files (label format with kind=pseudo)


def write_pseudo_labels(p: PseudoLabelMatrix, path) -> None:
    write_labels(LabelMatrix(p.values, "pseudo"), path)


def load_pseudo_labels(path) -> PseudoLabelMatrix:
    return PseudoLabelMatrix(load_labels(path, "pseudo").values)
