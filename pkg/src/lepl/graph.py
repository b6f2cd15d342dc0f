"""Label co-occurrence graph and the classifier-generating GCN.

The graph over classes has edge weights equal to empirical co-occurrence
frequencies on the validation split. After symmetric degree normalization
it drives a two-layer graph convolution over label embeddings:

    H1 = relu(A_hat @ E @ W0)
    W  = A_hat @ H1 @ W1

The output W holds one d-dimensional classifier per class; instance
predictions are sigmoid(X @ W.T) (see trainer). Backward passes are
analytic, with the relu subgradient taken as 0 at 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import data
from .data import LabelMatrix, _freeze

DEGREE_EPS = 1e-6  # diagonal regularizer for labels with zero degree


@dataclass(frozen=True)
class CoOccurrenceGraph:
    """C x C symmetric nonnegative co-occurrence matrix, plus normalization.

    Q and A_hat are None until normalize() has run. Q holds the row sums
    (degrees) of A after any zero-degree regularization; A_hat is the
    symmetric normalization A / sqrt(outer(Q, Q)).
    """

    C: int
    A: np.ndarray
    Q: np.ndarray | None = None
    A_hat: np.ndarray | None = None

    def __post_init__(self):
        a = np.asarray(self.A, dtype=np.float64)
        if a.shape != (self.C, self.C):
            raise ValueError(f"A must be {self.C}x{self.C}, got {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("A contains non-finite entries")
        if np.any(a < 0):
            raise ValueError("A entries must be >= 0")
        if not np.array_equal(a, a.T):
            raise ValueError("A must be exactly symmetric")
        object.__setattr__(self, "A", _freeze(a))
        if self.Q is not None:
            q = np.asarray(self.Q, dtype=np.float64)
            if q.shape != (self.C,):
                raise ValueError(f"Q must have {self.C} entries, got {q.shape}")
            object.__setattr__(self, "Q", _freeze(q))
        if self.A_hat is not None:
            ah = np.asarray(self.A_hat, dtype=np.float64)
            if ah.shape != (self.C, self.C):
                raise ValueError(f"A_hat must be {self.C}x{self.C}, got {ah.shape}")
            object.__setattr__(self, "A_hat", _freeze(ah))

    @property
    def normalized(self) -> bool:
        return self.A_hat is not None


@dataclass(frozen=True)
class LabelEmbeddings:
    """C x d_e embedding matrix, one row per class."""

    E: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.E, dtype=np.float64)
        if e.ndim != 2 or e.shape[0] < 1 or e.shape[1] < 1:
            raise ValueError(f"embeddings need shape (C >= 1, d_e >= 1), got {e.shape}")
        if not np.all(np.isfinite(e)):
            raise ValueError("embeddings contain non-finite entries")
        object.__setattr__(self, "E", _freeze(e))

    @property
    def C(self) -> int:
        return self.E.shape[0]

    @property
    def d_e(self) -> int:
        return self.E.shape[1]


@dataclass(frozen=True)
class GcnParameters:
    """GCN weights plus forward caches.

    H1 and W are set by gcn_forward; while present they satisfy
    W = A_hat @ relu(A_hat @ E @ W0) @ W1 for the inputs the forward pass
    saw. A hand-built instance without caches cannot feed gcn_backward.
    """

    W0: np.ndarray
    W1: np.ndarray
    H1: np.ndarray | None = None
    W: np.ndarray | None = None

    def __post_init__(self):
        w0 = np.asarray(self.W0, dtype=np.float64)
        w1 = np.asarray(self.W1, dtype=np.float64)
        if w0.ndim != 2 or w1.ndim != 2:
            raise ValueError("W0 and W1 must be 2-dimensional")
        if w0.shape[1] != w1.shape[0]:
            raise ValueError(
                f"hidden widths disagree: W0 is {w0.shape}, W1 is {w1.shape}"
            )
        if not (np.all(np.isfinite(w0)) and np.all(np.isfinite(w1))):
            raise ValueError("weights contain non-finite entries")
        object.__setattr__(self, "W0", _freeze(w0))
        object.__setattr__(self, "W1", _freeze(w1))
        for name in ("H1", "W"):
            v = getattr(self, name)
            if v is not None:
                object.__setattr__(self, name, _freeze(np.asarray(v, dtype=np.float64)))

    @property
    def fresh(self) -> bool:
        return self.H1 is not None and self.W is not None


class GcnGradients(NamedTuple):
    dW0: np.ndarray
    dW1: np.ndarray
    dE: np.ndarray


def cooccurrence(val_labels: LabelMatrix) -> CoOccurrenceGraph:
    """Empirical label co-occurrence frequencies on the validation split.

    A[i, j] is the fraction of validation instances carrying both label i
    and label j; the diagonal therefore equals the class priors. Counting
    is integer-exact, so A is exactly symmetric.
    """
    if val_labels.kind != "full":
        raise ValueError(f"co-occurrence needs full labels, got kind={val_labels.kind!r}")
    y = val_labels.values.astype(np.int64)
    counts = y.T @ y
    a = counts / val_labels.n
    return CoOccurrenceGraph(C=val_labels.C, A=a)


def normalize(graph: CoOccurrenceGraph) -> CoOccurrenceGraph:
    """Symmetric degree normalization A_hat = Q^-1/2 A Q^-1/2.

    Labels with zero degree (never seen on the validation split) first get
    DEGREE_EPS added on their diagonal entry so the normalization stays
    defined; their normalized diagonal then equals 1 and their off-diagonal
    entries stay 0. Invariant under positive rescaling of A.
    """
    a = graph.A.copy()
    degrees = a.sum(axis=1)
    dead = np.flatnonzero(degrees == 0)
    if dead.size:
        a[dead, dead] += DEGREE_EPS
    q = a.sum(axis=1)
    a_hat = a / np.sqrt(np.outer(q, q))
    return CoOccurrenceGraph(C=graph.C, A=a, Q=q, A_hat=a_hat)


def random_embeddings(C: int, d_e: int, seed: int) -> LabelEmbeddings:
    """Standard normal embeddings; the frozen default when none are supplied."""
    rng = np.random.default_rng(seed)
    return LabelEmbeddings(rng.standard_normal((C, d_e)))


def gcn_forward(
    graph: CoOccurrenceGraph, emb: LabelEmbeddings, W0: np.ndarray, W1: np.ndarray
) -> GcnParameters:
    """Two-layer graph convolution producing per-class classifiers."""
    if not graph.normalized:
        raise ValueError("graph is not normalized; call normalize() first")
    w0 = np.asarray(W0, dtype=np.float64)
    w1 = np.asarray(W1, dtype=np.float64)
    if emb.C != graph.C:
        raise ValueError(f"embeddings cover C={emb.C} classes, graph has C={graph.C}")
    if w0.ndim != 2 or w0.shape[0] != emb.d_e:
        raise ValueError(f"W0 must be ({emb.d_e}, d_hidden), got {w0.shape}")
    if w1.ndim != 2 or w1.shape[0] != w0.shape[1]:
        raise ValueError(f"W1 must be ({w0.shape[1]}, d_out), got {w1.shape}")
    z = graph.A_hat @ emb.E @ w0
    h1 = np.maximum(z, 0.0)
    w = graph.A_hat @ h1 @ w1
    return GcnParameters(W0=w0, W1=w1, H1=h1, W=w)


def gcn_backward(
    graph: CoOccurrenceGraph,
    emb: LabelEmbeddings,
    params: GcnParameters,
    upstream: np.ndarray,
) -> GcnGradients:
    """Analytic gradients of a scalar loss through the GCN.

    upstream is dLoss/dW evaluated at params.W. Requires fresh forward
    caches produced by gcn_forward on the same graph and embeddings.
    """
    if not graph.normalized:
        raise ValueError("graph is not normalized; call normalize() first")
    if not params.fresh:
        raise ValueError("stale GCN cache: run gcn_forward before gcn_backward")
    u = np.asarray(upstream, dtype=np.float64)
    if params.H1.shape != (graph.C, params.W0.shape[1]):
        raise ValueError("stale GCN cache: H1 does not match this graph and W0")
    if emb.C != graph.C or params.W0.shape[0] != emb.d_e:
        raise ValueError("embeddings do not match the cached forward pass")
    if u.shape != params.W.shape:
        raise ValueError(f"upstream must match W shape {params.W.shape}, got {u.shape}")
    a_hat = graph.A_hat
    d_w1 = (a_hat @ params.H1).T @ u
    d_h1 = a_hat.T @ u @ params.W1.T
    d_z = np.where(params.H1 > 0, d_h1, 0.0)  # relu subgradient, 0 at 0
    ae = a_hat @ emb.E
    d_w0 = ae.T @ d_z
    d_e = a_hat.T @ d_z @ params.W0.T
    return GcnGradients(dW0=d_w0, dW1=d_w1, dE=d_e)


# --------------------------------------------------------------------------
# embedding and co-occurrence files


def write_embeddings(emb: LabelEmbeddings, path) -> None:
    header = f"#lepl-embeddings v1 c={emb.C} d={emb.d_e}"
    rows = (" ".join(data.format_float(v) for v in row) for row in emb.E)
    data.write_text_matrix(path, header, rows)


def load_embeddings(path) -> LabelEmbeddings:
    lines = data.read_lines(path)
    c, d_e = data.parse_header(
        path, lines, r"#lepl-embeddings v1 c=(\d+) d=(\d+)", "#lepl-embeddings v1"
    )
    body = data.check_row_count(path, lines, c)
    out = np.empty((c, d_e), dtype=np.float64)
    for i, line in enumerate(body):
        out[i] = data.parse_float_row(path, i + 2, line, d_e)
    return LabelEmbeddings(out)


def write_cooccurrence(graph: CoOccurrenceGraph, path, normalized: bool = False) -> None:
    m = graph.A_hat if normalized else graph.A
    if m is None:
        raise ValueError("graph is not normalized; no A_hat to write")
    header = f"#lepl-cooc v1 c={graph.C}"
    rows = (" ".join(data.format_float(v) for v in row) for row in m)
    data.write_text_matrix(path, header, rows)


def load_cooccurrence(path) -> CoOccurrenceGraph:
    lines = data.read_lines(path)
    (c,) = data.parse_header(path, lines, r"#lepl-cooc v1 c=(\d+)", "#lepl-cooc v1")
    body = data.check_row_count(path, lines, c)
    out = np.empty((c, c), dtype=np.float64)
    for i, line in enumerate(body):
        out[i] = data.parse_float_row(path, i + 2, line, c)
    if not np.array_equal(out, out.T):
        raise data.FormatError(path, 1, "co-occurrence matrix is not symmetric")
    return CoOccurrenceGraph(C=c, A=out)
