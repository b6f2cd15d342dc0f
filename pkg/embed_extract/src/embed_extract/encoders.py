"""Sentence encoders: one fixed-width vector per input line.

Two families are supported. `hash:<dim>` is a dependency-free hashing
encoder: every whitespace token contributes a signed unit spike at a
sha256-derived coordinate, spikes are mean-pooled over the line, and the
result is L2-normalized. It is deterministic across platforms and mainly
exists so the tool and its tests run without model downloads.

Any other name is treated as a sentence-transformers model (a hub name
or a local checkpoint directory). Bare transformer checkpoints are
wrapped with mean pooling over final-layer token states. Requires the
optional sentence-transformers dependency.
"""

from __future__ import annotations

import hashlib
import re

import numpy as np


class EncoderError(Exception):
    """An encoder that cannot be resolved or loaded."""

    def __init__(self, name: str, message: str):
        self.name = name
        super().__init__(f"encoder {name!r}: {message}")


class HashingEncoder:
    def __init__(self, name: str, dim: int):
        if dim <= 0:
            raise EncoderError(name, "width must be a positive integer")
        self.name = name
        self.width = dim

    def encode(self, lines) -> np.ndarray:
        out = np.zeros((len(lines), self.width), dtype=np.float64)
        for i, line in enumerate(lines):
            tokens = line.split()
            row = out[i]
            for tok in tokens:
                digest = hashlib.sha256(tok.encode("utf-8")).digest()
                idx = int.from_bytes(digest[:8], "big") % self.width
                row[idx] += 1.0 if digest[8] & 1 else -1.0
            row /= len(tokens)
            norm = np.linalg.norm(row)
            if norm > 0.0:  # opposite-sign collisions can cancel a row out
                row /= norm
        return out


class SentenceTransformerEncoder:
    """Wrapper around sentence_transformers.SentenceTransformer.

    The model runs in inference mode (no grad, eval), so repeated calls
    on one checkpoint produce identical vectors.
    """

    def __init__(self, name: str):
        try:
            from sentence_transformers import SentenceTransformer
        except ImportError as exc:
            raise EncoderError(
                name,
                "sentence-transformers is not installed; "
                "use hash:<dim> or install the 'transformers' extra",
            ) from exc
        try:
            self._model = SentenceTransformer(name)
        except Exception as exc:
            raise EncoderError(name, f"load failed: {exc}") from exc
        self.name = name
        # renamed upstream in 5.x; keep the old spelling as a fallback
        get_width = getattr(
            self._model, "get_embedding_dimension", None
        ) or self._model.get_sentence_embedding_dimension
        width = get_width()
        if not width:
            raise EncoderError(name, "model does not declare an output width")
        self.width = int(width)

    def encode(self, lines) -> np.ndarray:
        vecs = self._model.encode(
            list(lines), convert_to_numpy=True, show_progress_bar=False
        )
        return np.asarray(vecs, dtype=np.float64)


HASH_NAME = re.compile(r"hash:(\d+)")


def resolve_encoder(name: str):
    """Map an encoder name to a ready encoder instance."""
    if name.startswith("hash:"):
        m = HASH_NAME.fullmatch(name)
        if m is None:
            raise EncoderError(name, "expected hash:<positive width>")
        return HashingEncoder(name, int(m.group(1)))
    return SentenceTransformerEncoder(name)
