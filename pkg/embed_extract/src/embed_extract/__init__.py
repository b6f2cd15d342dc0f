"""Text-to-features bridge for the lepl toolkit.

Reads a prompt file (one UTF-8 prompt per line), encodes every line with
a fixed-width sentence encoder, and writes a `#lepl-features v1` file
whose row i is the embedding of line i. The two packages communicate
only through that file format; nothing here imports lepl.
"""

from .corpus import CorpusError, TextCorpus, read_corpus
from .encoders import EncoderError, resolve_encoder
from .extract import ExtractResult, extract

__all__ = [
    "CorpusError",
    "EncoderError",
    "ExtractResult",
    "TextCorpus",
    "extract",
    "read_corpus",
    "resolve_encoder",
]
