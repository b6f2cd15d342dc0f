"""Contrastive label enhancement.

Turns single-positive observations into soft label distributions. Each
instance's label distribution is parameterized through a sigmoid so every
entry stays in (0, 1], with the observed positive hard-clamped at exactly 1.
A contrastive objective over the cosine similarities of the distributions
pulls each instance toward its feature-space nearest neighbors and away
from everything else:

    loss = mean_i -log( sum_{j in P(i)} exp(sim(D_i, D_j) / tau)
                        / sum_{k != i} exp(sim(D_i, D_k) / tau) )

where P(i) is the full set of K nearest neighbors of instance i under
cosine similarity of the raw feature rows. Minimized by plain full-batch
gradient descent on the unclamped logits; gradients are analytic.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .data import FeatureMatrix, LabelMatrix, _freeze

# sigmoid(40) rounds to exactly 1.0 in float64, so clamped entries hold
# an exact 1 while still living on the logit scale
CLAMP_LOGIT = 40.0


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


@dataclass(frozen=True)
class SoftLabelMatrix:
    """Soft label distributions D, stored on the logit scale.

    values = sigmoid(logits) elementwise; entries under clamped_mask are
    pinned at logit CLAMP_LOGIT and therefore have value exactly 1.
    """

    logits: np.ndarray
    clamped_mask: np.ndarray

    def __post_init__(self):
        z = np.asarray(self.logits, dtype=np.float64)
        m = np.asarray(self.clamped_mask, dtype=bool)
        if z.ndim != 2 or z.shape[0] < 1 or z.shape[1] < 1:
            raise ValueError(f"logits need shape (n >= 1, C >= 1), got {z.shape}")
        if m.shape != z.shape:
            raise ValueError(f"clamped_mask shape {m.shape} does not match logits {z.shape}")
        if not np.all(np.isfinite(z)):
            raise ValueError("logits contain non-finite entries")
        if not np.all(_sigmoid(z[m]) == 1.0):
            raise ValueError("clamped entries must sit at value exactly 1")
        object.__setattr__(self, "logits", _freeze(z))
        object.__setattr__(self, "clamped_mask", _freeze(m))

    @property
    def values(self) -> np.ndarray:
        return _sigmoid(self.logits)

    @property
    def n(self) -> int:
        return self.logits.shape[0]

    @property
    def C(self) -> int:
        return self.logits.shape[1]


@dataclass(frozen=True)
class NeighborIndex:
    """Per-instance nearest neighbor lists (self excluded)."""

    K: int
    neighbors: np.ndarray  # (n, min(K, n - 1)) int64

    def __post_init__(self):
        nb = np.asarray(self.neighbors, dtype=np.int64)
        if self.K < 1:
            raise ValueError("K must be >= 1")
        if nb.ndim != 2:
            raise ValueError(f"neighbors must be 2-dimensional, got shape {nb.shape}")
        n = nb.shape[0]
        if nb.shape[1] != min(self.K, n - 1):
            raise ValueError(
                f"neighbor lists must have min(K, n-1) = {min(self.K, n - 1)} entries, got {nb.shape[1]}"
            )
        if np.any(nb < 0) or np.any(nb >= n):
            raise ValueError("neighbor index out of range")
        if np.any(nb == np.arange(n)[:, None]):
            raise ValueError("an instance cannot be its own neighbor")
        object.__setattr__(self, "neighbors", _freeze(nb))

    @property
    def n(self) -> int:
        return self.neighbors.shape[0]


@dataclass(frozen=True)
class LeConfig:
    """Label enhancement hyperparameters.

    init_bg None means "use 1/C", resolved when the class count is known.
    """

    tau: float = 0.5
    K: int = 10
    steps: int = 200
    lr: float = 0.1
    init_bg: float | None = None
    seed: int = 0

    def __post_init__(self):
        if not (np.isfinite(self.tau) and self.tau > 0):
            raise ValueError("tau must be finite and > 0")
        if self.K < 1:
            raise ValueError("K must be >= 1")
        if self.steps < 0:
            raise ValueError("steps must be >= 0")
        if not (np.isfinite(self.lr) and self.lr > 0):
            raise ValueError("lr must be finite and > 0")
        if self.init_bg is not None and not (0.0 < self.init_bg < 1.0):
            raise ValueError("init_bg must lie strictly inside (0, 1)")


def build_knn(x: FeatureMatrix, K: int) -> NeighborIndex:
    """K nearest neighbors per instance under cosine similarity.

    Ordered by descending similarity, ties broken by ascending index; the
    instance itself is excluded. Requires every row to have nonzero norm.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    n = x.n
    if n < 2:
        raise ValueError("need at least 2 instances to build a neighbor index")
    norms = np.linalg.norm(x.values, axis=1)
    zero = np.flatnonzero(norms == 0)
    if zero.size:
        raise ValueError(f"feature row {int(zero[0])} has zero norm; cosine similarity undefined")
    xn = x.values / norms[:, None]
    sims = xn @ xn.T
    np.fill_diagonal(sims, -np.inf)
    k_eff = min(K, n - 1)
    idx = np.arange(n)
    out = np.empty((n, k_eff), dtype=np.int64)
    for i in range(n):
        order = np.lexsort((idx, -sims[i]))
        out[i] = order[:k_eff]
    return NeighborIndex(K=K, neighbors=out)


def init_soft_labels(observed: LabelMatrix, init_bg: float) -> SoftLabelMatrix:
    """Start D at a flat background with the observed positive clamped to 1."""
    if observed.kind != "partial":
        raise ValueError(f"expected partial labels, got kind={observed.kind!r}")
    if not 0.0 < init_bg < 1.0:
        raise ValueError("init_bg must lie strictly inside (0, 1)")
    bg_logit = math.log(init_bg) - math.log1p(-init_bg)
    logits = np.full((observed.n, observed.C), bg_logit, dtype=np.float64)
    mask = observed.values == 1
    logits[mask] = CLAMP_LOGIT
    return SoftLabelMatrix(logits=logits, clamped_mask=mask)


def _loss_terms(values: np.ndarray, nbr: NeighborIndex, tau: float):
    """Shared forward pass: cosine matrix plus stabilized softmax pieces."""
    n = values.shape[0]
    norms = np.linalg.norm(values, axis=1)
    zero = np.flatnonzero(norms == 0)
    if zero.size:
        raise ValueError(f"soft label row {int(zero[0])} has zero norm; cosine undefined")
    vn = values / norms[:, None]
    sims = vn @ vn.T
    z = sims / tau
    np.fill_diagonal(z, -np.inf)
    m = z.max(axis=1)
    z -= m[:, None]
    e = np.exp(z, out=z)  # diagonal becomes exp(-inf) = 0
    pmask = np.zeros((n, n), dtype=bool)
    pmask[np.arange(n)[:, None], nbr.neighbors] = True
    den = e.sum(axis=1)
    num = (e * pmask).sum(axis=1)
    return norms, vn, sims, e, den, num


def _check_pair(d: SoftLabelMatrix, nbr: NeighborIndex, tau: float) -> None:
    if not (np.isfinite(tau) and tau > 0):
        raise ValueError("tau must be finite and > 0")
    if d.n < 2:
        raise ValueError("contrastive loss needs at least 2 instances")
    if nbr.n != d.n:
        raise ValueError(f"neighbor index built for n={nbr.n}, soft labels have n={d.n}")


def le_loss(d: SoftLabelMatrix, nbr: NeighborIndex, tau: float) -> float:
    """Contrastive enhancement loss; nonnegative, 0 when P(i) covers all k != i."""
    _check_pair(d, nbr, tau)
    *_, den, num = _loss_terms(d.values, nbr, tau)
    per_instance = np.log(den) - np.log(num)
    if not np.all(np.isfinite(per_instance)):
        raise ValueError("contrastive loss is not finite; tau is likely degenerate")
    return math.fsum(per_instance) / d.n


def le_grad(d: SoftLabelMatrix, nbr: NeighborIndex, tau: float) -> np.ndarray:
    """Analytic gradient of le_loss with respect to the unclamped logits.

    Clamped entries get exactly zero gradient. Derivation: the loss sees
    the logits through sigmoid values and then pairwise cosines, so the
    chain is softmax weights -> cosine -> sigmoid.
    """
    _check_pair(d, nbr, tau)
    values = d.values
    terms = _loss_terms(values, nbr, tau)
    grad = _grad_from_terms(terms, nbr, tau, d.n)
    grad *= values * (1.0 - values)
    grad[d.clamped_mask] = 0.0
    if not np.all(np.isfinite(grad)):
        raise ValueError("contrastive gradient is not finite; tau is likely degenerate")
    return grad


def _grad_from_terms(terms, nbr: NeighborIndex, tau: float, n: int) -> np.ndarray:
    """Cosine-space gradient from a precomputed forward pass."""
    norms, vn, sims, e, den, num = terms
    g = e / den[:, None]
    rows = np.arange(n)[:, None]
    g[rows, nbr.neighbors] -= np.take_along_axis(e, nbr.neighbors, axis=1) / num[:, None]
    g /= n * tau
    t = g + g.T
    rowdot = np.einsum("ij,ij->i", t, sims)
    return (t @ vn - rowdot[:, None] * vn) / norms[:, None]


def enhance(x: FeatureMatrix, observed: LabelMatrix, cfg: LeConfig) -> SoftLabelMatrix:
    """Run the full enhancement stage: init, KNN, gradient descent.

    Deterministic for a fixed (x, observed, cfg). The loss is monitored
    each step; an increase at the default learning rate signals a step
    size too large for the local curvature and is surfaced as a warning
    rather than an error.
    """
    if x.n != observed.n:
        raise ValueError(f"features have n={x.n} but labels have n={observed.n}")
    init_bg = cfg.init_bg if cfg.init_bg is not None else 1.0 / observed.C
    d = init_soft_labels(observed, init_bg)
    if x.n < 2 or cfg.steps == 0:
        return d
    nbr = build_knn(x, cfg.K)
    n = x.n
    logits = d.logits.copy()
    mask = d.clamped_mask
    values = _sigmoid(logits)
    prev = None
    warned = False

    def loss_of(den, num):
        per_instance = np.log(den) - np.log(num)
        if not np.all(np.isfinite(per_instance)):
            raise ValueError("contrastive loss is not finite; tau is likely degenerate")
        return math.fsum(per_instance) / n

    def check_monotone(cur):
        # allow float-level wobble near convergence before warning
        nonlocal prev, warned
        if prev is not None and not warned and cur > prev + 1e-12 * max(1.0, abs(prev)):
            warnings.warn(
                f"enhancement loss increased ({prev:.6g} -> {cur:.6g}); "
                f"lr={cfg.lr} may be too large",
                stacklevel=3,
            )
            warned = True
        prev = cur

    # loss and gradient share one forward pass per step; the loop is the
    # budget owner of the whole pipeline, so nothing is computed twice
    for _ in range(cfg.steps):
        terms = _loss_terms(values, nbr, cfg.tau)
        check_monotone(loss_of(terms[-2], terms[-1]))
        grad = _grad_from_terms(terms, nbr, cfg.tau, n)
        grad *= values * (1.0 - values)
        grad[mask] = 0.0
        if not np.all(np.isfinite(grad)):
            raise ValueError("contrastive gradient is not finite; tau is likely degenerate")
        logits -= cfg.lr * grad
        logits[mask] = CLAMP_LOGIT
        values = _sigmoid(logits)
    *_, den, num = _loss_terms(values, nbr, cfg.tau)
    check_monotone(loss_of(den, num))
    return SoftLabelMatrix(logits=logits, clamped_mask=mask)


# --------------------------------------------------------------------------
# soft label files


def write_soft_labels(d: SoftLabelMatrix, path) -> None:
    from . import data

    header = f"#lepl-softlabels v1 n={d.n} c={d.C}"
    vals = d.values
    rows = (" ".join(data.format_float(v) for v in row) for row in vals)
    data.write_text_matrix(path, header, rows)


def load_soft_labels(path) -> SoftLabelMatrix:
    """Read back a soft label file.

    The file stores values only; entries at exactly 1 are treated as
    clamped and everything else is mapped back to the logit scale.
    """
    from . import data

    lines = data.read_lines(path)
    n, c = data.parse_header(
        path, lines, r"#lepl-softlabels v1 n=(\d+) c=(\d+)", "#lepl-softlabels v1"
    )
    body = data.check_row_count(path, lines, n)
    vals = np.empty((n, c), dtype=np.float64)
    for i, line in enumerate(body):
        row = data.parse_float_row(path, i + 2, line, c)
        for j, v in enumerate(row):
            if not 0.0 <= v <= 1.0:
                raise data.FormatError(path, i + 2, f"soft label value {v!r} outside [0, 1]")
        vals[i] = row
    mask = vals == 1.0
    with np.errstate(divide="ignore"):
        logits = np.log(vals) - np.log1p(-vals)
    logits[mask] = CLAMP_LOGIT
    logits[vals == 0.0] = -CLAMP_LOGIT * 20  # sigmoid(-800) underflows to exactly 0
    return SoftLabelMatrix(logits=logits, clamped_mask=mask)
