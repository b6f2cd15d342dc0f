"""Weakly-supervised multi-label learning toolkit.

Pipeline stages: contrastive label enhancement over a semantic KNN graph,
class-prior-guided pseudo-label generation, and a label-correlation GCN
that generates the per-class classifier weights. Includes ranking metrics,
a sample-complexity calculator, and a deterministic synthetic benchmark.
"""

__version__ = "0.1.0"

from . import data, enhancement, graph, metrics, pseudo, theory, trainer

__all__ = [
    "data",
    "enhancement",
    "pseudo",
    "graph",
    "trainer",
    "metrics",
    "theory",
    "__version__",
]
