"""Classifier training on pseudo-labels, and end-to-end orchestration.

The classifier for class c is the c-th row of W; instance scores are
sigmoid(X @ W.T). With the GCN component enabled, W is generated from the
label graph (see graph module) and gradients flow through it; with the
GCN ablated, W is a plain trainable matrix. Optimization is full-batch
gradient descent on a binary cross-entropy averaged over instances and
summed over classes, computed in its numerically stable logit form.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import data as data_mod
from . import enhancement, graph as graph_mod, metrics as metrics_mod, pseudo as pseudo_mod
from .data import FeatureMatrix, LabelMatrix, _freeze
from .graph import CoOccurrenceGraph, GcnParameters, LabelEmbeddings
from .seeding import stage_seed

ABLATION_COMPONENTS = frozenset({"enhancement", "prior_pseudo", "gcn"})

# default GCN shape when the caller supplies no embeddings; the hidden
# layer is deliberately wider than the class count so gradient descent
# reliably keeps enough live relu units
EMBED_WIDTH = 32
HIDDEN_WIDTH = 64

_P_MIN = np.nextafter(0.0, 1.0)
_P_MAX = np.nextafter(1.0, 0.0)


@dataclass(frozen=True)
class TrainConfig:
    """Training hyperparameters.

    ablation holds the names of the ENABLED pipeline components; the full
    method enables all three. Removing "gcn" trains a plain weight matrix,
    removing "prior_pseudo" trains on the observed single positives, and
    removing "enhancement" skips the contrastive refinement of D.
    """

    epochs: int = 5000
    lr: float = 0.5
    seed: int = 0
    freeze_embeddings: bool = True
    ablation: frozenset = ABLATION_COMPONENTS

    def __post_init__(self):
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if not (np.isfinite(self.lr) and self.lr > 0):
            raise ValueError("lr must be finite and > 0")
        abl = frozenset(self.ablation)
        unknown = abl - ABLATION_COMPONENTS
        if unknown:
            raise ValueError(f"unknown ablation components: {sorted(unknown)}")
        object.__setattr__(self, "ablation", abl)


@dataclass(frozen=True)
class PredictionMatrix:
    """n x C prediction scores, stored on the logit scale.

    values = sigmoid(logits), saturated into the open interval (0, 1) so
    downstream log-losses stay finite.
    """

    logits: np.ndarray

    def __post_init__(self):
        z = np.asarray(self.logits, dtype=np.float64)
        if z.ndim != 2 or z.shape[0] < 1 or z.shape[1] < 1:
            raise ValueError(f"prediction logits need shape (n >= 1, C >= 1), got {z.shape}")
        if not np.all(np.isfinite(z)):
            raise ValueError("prediction logits contain non-finite entries")
        object.__setattr__(self, "logits", _freeze(z))

    @property
    def values(self) -> np.ndarray:
        return np.clip(enhancement._sigmoid(self.logits), _P_MIN, _P_MAX)

    @property
    def n(self) -> int:
        return self.logits.shape[0]

    @property
    def C(self) -> int:
        return self.logits.shape[1]


@dataclass(frozen=True)
class TrainResult:
    """What train() hands back: final parameters plus loss bookkeeping."""

    params: GcnParameters
    embeddings: LabelEmbeddings
    initial_loss: float
    final_loss: float


def init_gcn_weights(d_e: int, d_hidden: int, d_out: int, seed: int):
    """Seeded scaled-normal initial weights, scale 1/sqrt(fan_in)."""
    rng = np.random.default_rng(seed)
    w0 = rng.standard_normal((d_e, d_hidden)) / math.sqrt(d_e)
    w1 = rng.standard_normal((d_hidden, d_out)) / math.sqrt(d_hidden)
    return w0, w1


def init_linear_weights(C: int, d: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.standard_normal((C, d)) / math.sqrt(d)


def predict_linear(W: np.ndarray, x: FeatureMatrix) -> PredictionMatrix:
    """Scores sigmoid(X @ W.T) for an explicit classifier matrix."""
    w = np.asarray(W, dtype=np.float64)
    if w.ndim != 2 or w.shape[1] != x.d:
        raise ValueError(f"classifier matrix must be (C, d={x.d}), got {w.shape}")
    return PredictionMatrix(x.values @ w.T)


def predict(
    params: GcnParameters,
    x: FeatureMatrix,
    graph: CoOccurrenceGraph | None = None,
    emb: LabelEmbeddings | None = None,
) -> PredictionMatrix:
    """Scores from GCN-generated classifiers.

    Uses the cached W when the parameters are fresh; otherwise recomputes
    the forward pass, which requires the graph and embeddings.
    """
    if params.fresh:
        w = params.W
    else:
        if graph is None or emb is None:
            raise ValueError("stale parameters: pass graph and embeddings to recompute W")
        w = graph_mod.gcn_forward(graph, emb, params.W0, params.W1).W
    return predict_linear(w, x)


def bce_loss(pred: PredictionMatrix, targets) -> float:
    """Binary cross-entropy, averaged over instances, summed over classes.

    Evaluated from the logits as max(z, 0) - z*y + log1p(exp(-|z|)), which
    never overflows and never takes log of 0.
    """
    y = np.asarray(getattr(targets, "values", targets), dtype=np.float64)
    z = pred.logits
    if y.shape != z.shape:
        raise ValueError(f"targets shape {y.shape} does not match predictions {z.shape}")
    per_entry = np.maximum(z, 0.0) - z * y + np.log1p(np.exp(-np.abs(z)))
    return math.fsum(per_entry.sum(axis=1)) / z.shape[0]


def _bce_grad_logits(logits: np.ndarray, y: np.ndarray) -> np.ndarray:
    # d(bce)/d(logit) = sigmoid(logit) - y, divided by n for the mean
    return (enhancement._sigmoid(logits) - y) / logits.shape[0]


def train(
    x: FeatureMatrix,
    targets,
    label_graph: CoOccurrenceGraph,
    emb: LabelEmbeddings,
    W0_init: np.ndarray,
    W1_init: np.ndarray,
    cfg: TrainConfig,
) -> TrainResult:
    """Full-batch gradient descent on BCE through the GCN.

    Embeddings stay frozen under cfg.freeze_embeddings (the default);
    otherwise they receive updates too. The loss is monitored and a final
    loss above the initial one is surfaced as a warning.
    """
    y = np.asarray(getattr(targets, "values", targets), dtype=np.float64)
    if y.shape != (x.n, label_graph.C):
        raise ValueError(f"targets must be ({x.n}, {label_graph.C}), got {y.shape}")
    w0 = np.asarray(W0_init, dtype=np.float64).copy()
    w1 = np.asarray(W1_init, dtype=np.float64).copy()
    e = emb
    params = graph_mod.gcn_forward(label_graph, e, w0, w1)
    initial = bce_loss(predict_linear(params.W, x), y)
    for _ in range(cfg.epochs):
        logits = x.values @ params.W.T
        d_logits = _bce_grad_logits(logits, y)
        upstream = d_logits.T @ x.values  # dLoss/dW, C x d
        grads = graph_mod.gcn_backward(label_graph, e, params, upstream)
        w0 -= cfg.lr * grads.dW0
        w1 -= cfg.lr * grads.dW1
        if not cfg.freeze_embeddings:
            e = LabelEmbeddings(e.E - cfg.lr * grads.dE)
        params = graph_mod.gcn_forward(label_graph, e, w0, w1)
    final = bce_loss(predict_linear(params.W, x), y)
    if final > initial:
        warnings.warn(
            f"training loss went up ({initial:.6g} -> {final:.6g}); lr={cfg.lr} too large",
            stacklevel=2,
        )
    return TrainResult(params=params, embeddings=e, initial_loss=initial, final_loss=final)


def train_plain(x: FeatureMatrix, targets, W_init: np.ndarray, cfg: TrainConfig) -> np.ndarray:
    """Gradient descent on BCE for a plain classifier matrix (GCN ablated)."""
    y = np.asarray(getattr(targets, "values", targets), dtype=np.float64)
    w = np.asarray(W_init, dtype=np.float64).copy()
    if y.shape != (x.n, w.shape[0]):
        raise ValueError(f"targets must be ({x.n}, {w.shape[0]}), got {y.shape}")
    initial = bce_loss(predict_linear(w, x), y)
    for _ in range(cfg.epochs):
        logits = x.values @ w.T
        d_logits = _bce_grad_logits(logits, y)
        w -= cfg.lr * (d_logits.T @ x.values)
    final = bce_loss(predict_linear(w, x), y)
    if final > initial:
        warnings.warn(
            f"training loss went up ({initial:.6g} -> {final:.6g}); lr={cfg.lr} too large",
            stacklevel=2,
        )
    return w


def run_pipeline(
    train_x: FeatureMatrix,
    train_partial: LabelMatrix,
    val_x: FeatureMatrix | None,
    val_full: LabelMatrix,
    test_x: FeatureMatrix,
    test_full: LabelMatrix,
    le_cfg: enhancement.LeConfig,
    train_cfg: TrainConfig,
    emb: LabelEmbeddings | None = None,
):
    """Run enhancement, pseudo-labeling, graph building, training, scoring.

    Honors train_cfg.ablation; see TrainConfig. Returns the test-split
    predictions together with their MetricsReport against test_full.
    All stage seeds derive from train_cfg.seed, so one (inputs, config)
    pair maps to exactly one output.
    """
    C = train_partial.C
    if val_full.C != C or test_full.C != C:
        raise ValueError("all label matrices must share the class count")
    if val_x is not None and val_x.n != val_full.n:
        raise ValueError(f"val features have n={val_x.n} but labels have n={val_full.n}")
    abl = train_cfg.ablation

    if "enhancement" in abl:
        d = enhancement.enhance(train_x, train_partial, le_cfg)
    else:
        bg = le_cfg.init_bg if le_cfg.init_bg is not None else 1.0 / C
        d = enhancement.init_soft_labels(train_partial, bg)

    if "prior_pseudo" in abl:
        priors = pseudo_mod.estimate_priors(val_full, train_x.n)
        targets = pseudo_mod.generate(d, priors, train_partial)
    else:
        targets = pseudo_mod.single_label_pseudo(train_partial)

    if "gcn" in abl:
        g = graph_mod.normalize(graph_mod.cooccurrence(val_full))
        if emb is None:
            emb = graph_mod.random_embeddings(C, EMBED_WIDTH, stage_seed(train_cfg.seed, "embeddings"))
        w0, w1 = init_gcn_weights(emb.d_e, HIDDEN_WIDTH, train_x.d, stage_seed(train_cfg.seed, "train"))
        result = train(train_x, targets, g, emb, w0, w1, train_cfg)
        preds = predict(result.params, test_x)
    else:
        w_init = init_linear_weights(C, train_x.d, stage_seed(train_cfg.seed, "train"))
        w = train_plain(train_x, targets, w_init, train_cfg)
        preds = predict_linear(w, test_x)

    report = metrics_mod.evaluate(preds, test_full)
    return preds, report


# --------------------------------------------------------------------------
# prediction and report files


def write_predictions(pred: PredictionMatrix, path) -> None:
    header = f"#lepl-predictions v1 n={pred.n} c={pred.C}"
    vals = pred.values
    rows = (" ".join(data_mod.format_float(v) for v in row) for row in vals)
    data_mod.write_text_matrix(path, header, rows)


def load_predictions(path) -> PredictionMatrix:
    lines = data_mod.read_lines(path)
    n, c = data_mod.parse_header(
        path, lines, r"#lepl-predictions v1 n=(\d+) c=(\d+)", "#lepl-predictions v1"
    )
    body = data_mod.check_row_count(path, lines, n)
    vals = np.empty((n, c), dtype=np.float64)
    for i, line in enumerate(body):
        row = data_mod.parse_float_row(path, i + 2, line, c)
        for v in row:
            if not 0.0 < v < 1.0:
                raise data_mod.FormatError(
                    path, i + 2, f"prediction {v!r} outside the open interval (0, 1)"
                )
        vals[i] = row
    with np.errstate(divide="ignore"):
        logits = np.log(vals) - np.log1p(-vals)
    return PredictionMatrix(logits)


def write_report(report: metrics_mod.MetricsReport, text_path, json_path) -> None:
    """Persist a metrics report as flat key = value text and as JSON."""
    items = report.as_dict()
    with open(text_path, "w", encoding="utf-8", newline="\n") as fh:
        for key, val in items.items():
            fh.write(f"{key} = {data_mod.format_float(val)}\n")
    with open(json_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(items, fh, indent=2)
        fh.write("\n")


def load_report(json_path) -> metrics_mod.MetricsReport:
    with open(json_path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    return metrics_mod.MetricsReport(**raw)
