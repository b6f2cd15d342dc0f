"""Learnability calculator and the pseudo-vs-single risk experiment.

The sample-size calculator answers: given a hypothesis class capacity,
a class count, and a bound xi on how unreliable the pseudo-labels are,
how many pseudo-labeled examples suffice for (epsilon, delta) learning.
The margin factor is

    theta = C * ln(2 / (1 + xi)),

positive exactly when xi < 1, and the bound is

    n0 = (4 / (theta * eps)) * (d_H * (ln(4 d_H) + 2 C ln C
         + ln(1 / (theta * eps))) + ln(1 / delta) + 1).

compare_risks runs the matching empirical experiment on the synthetic
benchmark: train one classifier on prior-guided pseudo-labels and an
identically initialized one on the raw single positives, and compare
held-out Hamming risk alongside the measured unreliability of both
target matrices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from . import enhancement, graph as graph_mod, pseudo as pseudo_mod, trainer as trainer_mod
from .data import SynthConfig, synth_generate
from .metrics import hamming_risk
from .seeding import stage_seed


@dataclass(frozen=True)
class TheoryParams:
    """Inputs of the sample-size bound."""

    xi: float
    d_H: int
    epsilon: float
    delta: float
    C: int

    def __post_init__(self):
        if not (np.isfinite(self.xi) and 0.0 <= self.xi < 1.0):
            raise ValueError(f"xi must lie in [0, 1), got {self.xi!r}")
        if self.d_H < 1:
            raise ValueError("d_H must be >= 1")
        if not (np.isfinite(self.epsilon) and 0.0 < self.epsilon < 1.0):
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon!r}")
        if not (np.isfinite(self.delta) and 0.0 < self.delta < 1.0):
            raise ValueError(f"delta must lie in (0, 1), got {self.delta!r}")
        if self.C < 1:
            raise ValueError("C must be >= 1")

    @property
    def theta(self) -> float:
        return theta(self.xi, self.C)


def theta(xi: float, C: int) -> float:
    """Margin factor C * ln(2 / (1 + xi)); > 0 iff xi < 1."""
    if not (np.isfinite(xi) and 0.0 <= xi < 1.0):
        raise ValueError(f"xi must lie in [0, 1), got {xi!r}")
    if C < 1:
        raise ValueError("C must be >= 1")
    return C * math.log(2.0 / (1.0 + xi))


def sample_complexity(p: TheoryParams) -> float:
    """Sufficient pseudo-labeled sample size n0.

    Strictly increasing in xi, strictly decreasing in epsilon and delta.
    """
    te = p.theta * p.epsilon
    inner = p.d_H * (math.log(4.0 * p.d_H) + 2.0 * p.C * math.log(p.C) + math.log(1.0 / te))
    return (4.0 / te) * (inner + math.log(1.0 / p.delta) + 1.0)


@dataclass(frozen=True)
class RiskComparison:
    """Outcome of the paired pseudo-vs-single training experiment.

    Lists are indexed by seed position; wins_pseudo counts seeds where the
    pseudo-labeled model had strictly lower held-out Hamming risk.
    """

    seeds: int
    seed_values: tuple
    risks_pseudo: tuple
    risks_single: tuple
    xi_pseudo: tuple
    xi_single: tuple
    wins_pseudo: int

    def __post_init__(self):
        for name in ("seed_values", "risks_pseudo", "risks_single", "xi_pseudo", "xi_single"):
            v = tuple(getattr(self, name))
            if len(v) != self.seeds:
                raise ValueError(f"{name} must have {self.seeds} entries, got {len(v)}")
            object.__setattr__(self, name, v)
        if not 0 <= self.wins_pseudo <= self.seeds:
            raise ValueError("wins_pseudo must lie in [0, seeds]")


def compare_risks(
    cfg: SynthConfig,
    le_cfg: enhancement.LeConfig | None = None,
    train_cfg: trainer_mod.TrainConfig | None = None,
    seeds: Sequence[int] = tuple(range(10)),
) -> RiskComparison:
    """Paired experiment behind the risk-ordering claim.

    Per seed: draw the benchmark, build the prior-guided pseudo-labels via
    enhancement, then train two classifiers that share everything (graph,
    embeddings, initial weights) except the target matrix, and score both
    on the held-out test split. Arm order cannot matter because the arms
    share all inputs and touch nothing global.
    """
    if le_cfg is None:
        le_cfg = enhancement.LeConfig()
    if train_cfg is None:
        train_cfg = trainer_mod.TrainConfig()
    seeds = tuple(int(s) for s in seeds)
    if not seeds:
        raise ValueError("need at least one seed")
    risks_p, risks_s, xis_p, xis_s = [], [], [], []
    for seed in seeds:
        splits = synth_generate(replace(cfg, seed=seed))
        d = enhancement.enhance(
            splits.train_x, splits.train_partial, replace(le_cfg, seed=stage_seed(seed, "enhance"))
        )
        priors = pseudo_mod.estimate_priors(splits.val_full, splits.train_x.n)
        pseudo_targets = pseudo_mod.generate(d, priors, splits.train_partial)
        single_targets = pseudo_mod.single_label_pseudo(splits.train_partial)

        g = graph_mod.normalize(graph_mod.cooccurrence(splits.val_full))
        emb = graph_mod.random_embeddings(
            cfg.C, trainer_mod.EMBED_WIDTH, stage_seed(seed, "embeddings")
        )
        w0, w1 = trainer_mod.init_gcn_weights(
            emb.d_e, trainer_mod.HIDDEN_WIDTH, cfg.d, stage_seed(seed, "train")
        )
        tcfg = replace(train_cfg, seed=seed)

        def held_out_risk(targets):
            result = trainer_mod.train(splits.train_x, targets, g, emb, w0, w1, tcfg)
            preds = trainer_mod.predict(result.params, splits.test_x)
            return hamming_risk(preds, splits.test_full)

        risks_p.append(held_out_risk(pseudo_targets))
        risks_s.append(held_out_risk(single_targets))
        xis_p.append(pseudo_mod.unreliability(pseudo_targets, splits.train_true))
        xis_s.append(pseudo_mod.unreliability(single_targets, splits.train_true))

    wins = sum(1 for rp, rs in zip(risks_p, risks_s) if rp < rs)
    return RiskComparison(
        seeds=len(seeds),
        seed_values=seeds,
        risks_pseudo=tuple(risks_p),
        risks_single=tuple(risks_s),
        xi_pseudo=tuple(xis_p),
        xi_single=tuple(xis_s),
        wins_pseudo=wins,
    )
