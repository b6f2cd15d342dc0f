"""Corpus to feature-file conversion."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import read_corpus
from .encoders import resolve_encoder


class EncodingMismatch(Exception):
    """Encoder output that contradicts its own declared contract."""


@dataclass(frozen=True)
class ExtractResult:
    n: int
    d: int
    encoder: str
    out_path: str


def write_features(rows: np.ndarray, path) -> None:
    """Write a `#lepl-features v1` file.

    Matches the format the lepl toolkit reads: a header declaring the
    shape, then one space-separated row per instance, floats printed with
    repr so a read-back is bit-exact.
    """
    n, d = rows.shape
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"#lepl-features v1 n={n} d={d}\n")
        for row in rows:
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")


def extract(corpus_path, encoder_name: str, out_path) -> ExtractResult:
    """Encode every corpus line and write the feature file.

    Row i of the output is the embedding of line i. Raises CorpusError
    for an unusable corpus and EncoderError when the encoder cannot be
    loaded; nothing is written in either case.
    """
    corpus = read_corpus(corpus_path)
    encoder = resolve_encoder(encoder_name)
    rows = np.asarray(encoder.encode(corpus.lines), dtype=np.float64)
    if rows.shape != (corpus.n, encoder.width):
        raise EncodingMismatch(
            f"encoder {encoder_name!r} returned shape {rows.shape}, "
            f"expected ({corpus.n}, {encoder.width})"
        )
    if not np.isfinite(rows).all():
        raise EncodingMismatch(f"encoder {encoder_name!r} produced non-finite values")
    write_features(rows, out_path)
    return ExtractResult(corpus.n, encoder.width, encoder_name, str(out_path))
