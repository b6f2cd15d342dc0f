"""Prompt corpus loading and validation."""

from __future__ import annotations

from dataclasses import dataclass


class CorpusError(Exception):
    """A corpus file that cannot be encoded as-is."""

    def __init__(self, path, line: int | None, message: str):
        self.path = str(path)
        self.line = line
        self.message = message
        where = self.path if line is None else f"{self.path}:{line}"
        super().__init__(f"{where}: {message}")


@dataclass(frozen=True)
class TextCorpus:
    """Ordered prompt lines; one embedding row will be produced per line.

    Blank lines are rejected at construction: a prompt with no visible
    content has no tokens to pool, and a silent skip would desynchronize
    line numbers from feature rows.
    """

    lines: tuple[str, ...]
    path: str = "<memory>"

    def __post_init__(self):
        if not self.lines:
            raise CorpusError(self.path, None, "corpus is empty")
        for i, line in enumerate(self.lines):
            if not line.strip():
                raise CorpusError(self.path, i + 1, "blank line")

    @property
    def n(self) -> int:
        return len(self.lines)


def read_corpus(path) -> TextCorpus:
    """Read one prompt per line from a UTF-8 text file.

    A final trailing newline is allowed and does not count as a line;
    interior blank lines are errors with their 1-based line number.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        text = fh.read()
    raw = text.split("\n")
    if raw and raw[-1] == "":  # the terminator of the last line, not a line
        raw.pop()
    return TextCorpus(tuple(ln.rstrip("\r") for ln in raw), path=str(path))
