"""Deterministic seed derivation for pipeline stages.

Every run is driven by a single master seed. Each randomized stage gets its
own child seed derived from the master seed and a fixed stage label, so
adding or removing one stage never perturbs the random stream of another.
"""

from __future__ import annotations

import hashlib

import numpy as np


def stage_seed(master: int, stage: str) -> int:
    """Derive a stable child seed for a named stage.

    The derivation hashes the stage label together with the master seed, so
    it depends only on those two values (not on platform or process state).
    """
    if not isinstance(master, (int, np.integer)):
        raise ValueError(f"master seed must be an integer, got {type(master).__name__}")
    payload = f"{stage}:{int(master)}".encode("utf-8")
    digest = hashlib.sha256(payload).digest()
    return int.from_bytes(digest[:8], "big")


def stage_rng(master: int, stage: str) -> np.random.Generator:
    """Generator seeded by ``stage_seed(master, stage)``."""
    return np.random.default_rng(stage_seed(master, stage))
