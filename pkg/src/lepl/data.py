"""Data types, text file formats, annotation aggregation, and synthesis.

All interchange files are UTF-8 text with LF line endings and a single
header line:

    #lepl-features v1 n=<n> d=<d>        n rows of d floats
    #lepl-labels v1 n=<n> c=<C> kind=<k> n rows of C digits, k in
                                         {partial, full, pseudo}
    #lepl-votes v1 n=<n> c=<C> a=<A>     n*A rows of C digits, grouped by
                                         instance (annotators in order)

Floats are written as shortest round-trip decimals, so loading a written
file reproduces the array bit-exactly.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable

import numpy as np

LABEL_KINDS = ("partial", "full", "pseudo")


class FormatError(Exception):
    """A data file violates its documented format.

    Carries the offending path and 1-based line number so callers can point
    at the exact spot.
    """

    def __init__(self, path, line: int, message: str):
        self.path = str(path)
        self.line = int(line)
        self.message = message
        super().__init__(f"{self.path}:{self.line}: {message}")


def _freeze(a: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(a)
    if out is a:
        out = a.copy()
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class FeatureMatrix:
    """Dense n x d feature matrix, finite float64, n >= 1, d >= 1."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2:
            raise ValueError(f"features must be 2-dimensional, got shape {v.shape}")
        if v.shape[0] < 1 or v.shape[1] < 1:
            raise ValueError(f"features need n >= 1 and d >= 1, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("features contain non-finite entries")
        object.__setattr__(self, "values", _freeze(v))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class LabelMatrix:
    """n x C binary label matrix with a declared kind.

    kind "partial": exactly one positive per row (the observed label).
    kind "full":    at least one positive per row (ground truth).
    kind "pseudo":  no per-row constraint.
    """

    values: np.ndarray
    kind: str

    def __post_init__(self):
        if self.kind not in LABEL_KINDS:
            raise ValueError(f"unknown label kind {self.kind!r}")
        v = np.asarray(self.values)
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise ValueError(f"labels need shape (n >= 1, C >= 1), got {v.shape}")
        if not np.isin(v, (0, 1)).all():
            raise ValueError("label entries must be 0 or 1")
        v = v.astype(np.int8)
        rows = v.sum(axis=1, dtype=np.int64)
        if self.kind == "partial" and not np.all(rows == 1):
            bad = int(np.flatnonzero(rows != 1)[0])
            raise ValueError(
                f"partial labels need exactly one positive per row; row {bad} has {int(rows[bad])}"
            )
        if self.kind == "full" and not np.all(rows >= 1):
            bad = int(np.flatnonzero(rows < 1)[0])
            raise ValueError(f"full labels need at least one positive per row; row {bad} has none")
        object.__setattr__(self, "values", _freeze(v))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def C(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class AnnotationTensor:
    """n x A x C binary votes: A annotators each give a label subset."""

    votes: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.votes)
        if v.ndim != 3 or min(v.shape) < 1:
            raise ValueError(f"votes need shape (n >= 1, A >= 1, C >= 1), got {v.shape}")
        if not np.isin(v, (0, 1)).all():
            raise ValueError("vote entries must be 0 or 1")
        object.__setattr__(self, "votes", _freeze(v.astype(np.int8)))

    @property
    def n(self) -> int:
        return self.votes.shape[0]

    @property
    def A(self) -> int:
        return self.votes.shape[1]

    @property
    def C(self) -> int:
        return self.votes.shape[2]


@dataclass(frozen=True)
class SynthConfig:
    """Configuration of the deterministic synthetic benchmark."""

    n_train: int = 2000
    n_val: int = 500
    n_test: int = 500
    C: int = 10
    d: int = 16
    max_active: int = 3
    noise_sigma: float = 0.05
    seed: int = 0

    def __post_init__(self):
        for name in ("n_train", "n_val", "n_test"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.C < 1:
            raise ValueError("C must be >= 1")
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if not 1 <= self.max_active <= self.C:
            raise ValueError(f"max_active must be in [1, C={self.C}], got {self.max_active}")
        if not (np.isfinite(self.noise_sigma) and self.noise_sigma >= 0):
            raise ValueError("noise_sigma must be finite and >= 0")


@dataclass(frozen=True)
class SynthSplits:
    """Bundle produced by synth_generate.

    The training split carries both the single observed label per instance
    (train_partial) and the hidden ground truth (train_true) used only for
    evaluation of pseudo-label quality.
    """

    train_x: FeatureMatrix
    train_partial: LabelMatrix
    train_true: LabelMatrix
    val_x: FeatureMatrix
    val_full: LabelMatrix
    test_x: FeatureMatrix
    test_full: LabelMatrix


# --------------------------------------------------------------------------
# text format plumbing, shared by the other modules' writers


def format_float(x: float) -> str:
    # repr of a Python float is the shortest decimal that round-trips
    return repr(float(x))


def write_text_matrix(path, header: str, rows: Iterable[str]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(row + "\n")


def read_lines(path) -> list[str]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        text = fh.read()
    lines = text.split("\n")
    # a well-formed file ends with a final newline; drop trailing blanks
    while lines and lines[-1] == "":
        lines.pop()
    return [ln.rstrip("\r") for ln in lines]


def parse_header(path, lines: list[str], pattern: str, what: str) -> tuple[int, ...]:
    if not lines:
        raise FormatError(path, 1, f"empty file, expected a {what} header")
    m = re.fullmatch(pattern, lines[0])
    if m is None:
        raise FormatError(path, 1, f"malformed header: expected {what!r} form, got {lines[0]!r}")
    return tuple(int(g) for g in m.groups() if g is not None and g.isdigit())


def check_row_count(path, lines: list[str], declared: int) -> list[str]:
    body = lines[1:]
    if len(body) != declared:
        # point at the first extra row, or just past the last line if short
        line = declared + 2 if len(body) > declared else len(lines) + 1
        raise FormatError(
            path,
            line,
            f"row-count mismatch: header declares {declared} rows, file has {len(body)}",
        )
    return body


def parse_float_row(path, line_no: int, line: str, width: int) -> list[float]:
    toks = line.split()
    if len(toks) != width:
        raise FormatError(path, line_no, f"expected {width} values, got {len(toks)}")
    out = []
    for tok in toks:
        try:
            val = float(tok)
        except ValueError:
            raise FormatError(path, line_no, f"non-numeric token {tok!r}") from None
        if not np.isfinite(val):
            raise FormatError(path, line_no, f"non-finite value {tok!r}")
        out.append(val)
    return out


def parse_binary_row(path, line_no: int, line: str, width: int) -> list[int]:
    toks = line.split()
    if len(toks) != width:
        raise FormatError(path, line_no, f"expected {width} entries, got {len(toks)}")
    out = []
    for tok in toks:
        if tok == "0":
            out.append(0)
        elif tok == "1":
            out.append(1)
        else:
            raise FormatError(path, line_no, f"label entry {tok!r} outside {{0, 1}}")
    return out


# --------------------------------------------------------------------------
# feature files


def write_features(m: FeatureMatrix, path) -> None:
    header = f"#lepl-features v1 n={m.n} d={m.d}"
    rows = (" ".join(format_float(v) for v in row) for row in m.values)
    write_text_matrix(path, header, rows)


def load_features(path) -> FeatureMatrix:
    lines = read_lines(path)
    n, d = parse_header(path, lines, r"#lepl-features v1 n=(\d+) d=(\d+)", "#lepl-features v1")
    body = check_row_count(path, lines, n)
    out = np.empty((n, d), dtype=np.float64)
    for i, line in enumerate(body):
        out[i] = parse_float_row(path, i + 2, line, d)
    return FeatureMatrix(out)


# --------------------------------------------------------------------------
# label files


def write_labels(m: LabelMatrix, path) -> None:
    header = f"#lepl-labels v1 n={m.n} c={m.C} kind={m.kind}"
    rows = (" ".join(str(int(v)) for v in row) for row in m.values)
    write_text_matrix(path, header, rows)


def load_labels(path, expected_kind: str) -> LabelMatrix:
    """Load a label file, insisting on the expected kind.

    The kind in the header and the per-row structure must both agree with
    expected_kind; any disagreement is a FormatError with a line number.
    """
    if expected_kind not in LABEL_KINDS:
        raise ValueError(f"unknown label kind {expected_kind!r}")
    lines = read_lines(path)
    n, c = parse_header(
        path,
        lines,
        r"#lepl-labels v1 n=(\d+) c=(\d+) kind=(partial|full|pseudo)",
        "#lepl-labels v1",
    )
    kind = lines[0].rsplit("kind=", 1)[1]
    if kind != expected_kind:
        raise FormatError(path, 1, f"kind mismatch: file declares kind={kind}, expected {expected_kind}")
    body = check_row_count(path, lines, n)
    out = np.empty((n, c), dtype=np.int8)
    for i, line in enumerate(body):
        row = parse_binary_row(path, i + 2, line, c)
        total = sum(row)
        if expected_kind == "partial" and total != 1:
            raise FormatError(path, i + 2, f"partial row must have exactly one positive, found {total}")
        if expected_kind == "full" and total == 0:
            raise FormatError(path, i + 2, "full row has no positive label")
        out[i] = row
    return LabelMatrix(out, expected_kind)


# --------------------------------------------------------------------------
# vote files


def write_votes(t: AnnotationTensor, path) -> None:
    header = f"#lepl-votes v1 n={t.n} c={t.C} a={t.A}"

    def rows():
        for i in range(t.n):
            for a in range(t.A):
                yield " ".join(str(int(v)) for v in t.votes[i, a])

    write_text_matrix(path, header, rows())


def load_votes(path) -> AnnotationTensor:
    lines = read_lines(path)
    n, c, a = parse_header(
        path, lines, r"#lepl-votes v1 n=(\d+) c=(\d+) a=(\d+)", "#lepl-votes v1"
    )
    body = check_row_count(path, lines, n * a)
    out = np.empty((n, a, c), dtype=np.int8)
    for k, line in enumerate(body):
        out[k // a, k % a] = parse_binary_row(path, k + 2, line, c)
    return AnnotationTensor(out)


# --------------------------------------------------------------------------
# annotation aggregation


def majority_vote(annotations: AnnotationTensor) -> LabelMatrix:
    """Aggregate annotator votes into full labels by strict majority.

    A class is kept when strictly more than half of the annotators marked
    it. Rows where no class wins a majority fall back to the designated
    catch-all class, which by convention is the last one (index C - 1).
    """
    counts = annotations.votes.sum(axis=1, dtype=np.int64)  # n x C
    out = (2 * counts > annotations.A).astype(np.int8)
    empty = out.sum(axis=1) == 0
    out[empty, annotations.C - 1] = 1
    return LabelMatrix(out, "full")


# --------------------------------------------------------------------------
# synthetic benchmark

# classes come in correlation groups of roughly this many members
GROUP_TARGET = 3
# offset scale inside a group; smaller means tighter prototype clusters
PROTO_SPREAD = 0.4
# co-label sampling weight for classes sharing the primary's group; must
# stay well above HEAD_BIAS**2 or popular out-group heads would out-draw
# a group's own rare members
IN_GROUP_WEIGHT = 30.0
# each step down a group's member list divides the class frequency by this
HEAD_BIAS = 4.0


def synth_groups(C: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-class group id and sampling popularity.

    Classes form contiguous blocks of about GROUP_TARGET members. Within a
    block the first class is the head; each later member is HEAD_BIAS
    times rarer than the one before it, so every group has common and
    rare classes.
    """
    n_groups = max(1, round(C / GROUP_TARGET))
    gid = np.empty(C, dtype=np.int64)
    pop = np.empty(C, dtype=np.float64)
    for g, block in enumerate(np.array_split(np.arange(C), n_groups)):
        gid[block] = g
        pop[block] = HEAD_BIAS ** -np.arange(block.size, dtype=np.float64)
    return gid, pop


def synth_generate(cfg: SynthConfig) -> SynthSplits:
    """Deterministic group-correlated prototype generator.

    Classes are partitioned into contiguous correlation groups. Each class
    prototype is its group center plus a scaled private offset, normalized
    to unit length, so classes in a group are geometrically similar. Each
    instance activates 1..max_active classes: a primary class drawn by
    popularity (group heads are common, later members exponentially
    rarer), plus extras sampled with weight IN_GROUP_WEIGHT times their
    popularity for the primary's group mates and plain popularity
    elsewhere. Co-occurrence therefore concentrates inside groups, rare
    classes co-occur mostly with their own group's head, and co-occurring
    classes have similar optimal classifiers.

    The feature vector is the mean of the active prototypes plus isotropic
    Gaussian noise. Ground-truth labels are the active set; the single
    observed training label is the most salient active class, i.e. the one
    whose prototype is closest in cosine to the instance feature (ties to
    the lowest index). Similar in-group prototypes make that observation
    genuinely ambiguous, which is the regime the pipeline targets.

    Draw order is fixed: group centers, class offsets, then splits in the
    order train, val, test, with per-instance draws of active count,
    primary class, extras, noise. A given (cfg, seed) pair therefore
    reproduces the exact same arrays.
    """
    rng = np.random.default_rng(cfg.seed)
    gid, pop = synth_groups(cfg.C)
    centers = rng.standard_normal((gid.max() + 1, cfg.d))
    offsets = rng.standard_normal((cfg.C, cfg.d))
    protos = centers[gid] + PROTO_SPREAD * offsets
    norms = np.linalg.norm(protos, axis=1)
    norms[norms == 0] = 1.0  # zero draw is measure-zero; keep well-defined
    protos = protos / norms[:, None]
    p_primary = pop / pop.sum()

    def draw(count: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        x = np.empty((count, cfg.d))
        full = np.zeros((count, cfg.C), dtype=np.int8)
        salient = np.zeros(count, dtype=np.int64)
        for i in range(count):
            k = int(rng.integers(1, cfg.max_active + 1))
            primary = int(rng.choice(cfg.C, p=p_primary))
            if k > 1:
                pool = np.delete(np.arange(cfg.C), primary)
                w = np.where(gid[pool] == gid[primary], IN_GROUP_WEIGHT, 1.0) * pop[pool]
                extras = rng.choice(pool, size=k - 1, replace=False, p=w / w.sum())
                active = np.sort(np.append(extras, primary))
            else:
                active = np.array([primary])
            xi = protos[active].mean(axis=0) + rng.normal(0.0, cfg.noise_sigma, size=cfg.d)
            x[i] = xi
            full[i, active] = 1
            xn = np.linalg.norm(xi)
            if xn == 0.0:
                salient[i] = active[0]
            else:
                cos = protos[active] @ xi / xn  # prototypes are unit norm
                salient[i] = active[int(np.argmax(cos))]
        return x, full, salient

    train_x, train_full, train_salient = draw(cfg.n_train)
    val_x, val_full, _ = draw(cfg.n_val)
    test_x, test_full, _ = draw(cfg.n_test)

    partial = np.zeros((cfg.n_train, cfg.C), dtype=np.int8)
    partial[np.arange(cfg.n_train), train_salient] = 1

    return SynthSplits(
        train_x=FeatureMatrix(train_x),
        train_partial=LabelMatrix(partial, "partial"),
        train_true=LabelMatrix(train_full, "full"),
        val_x=FeatureMatrix(val_x),
        val_full=LabelMatrix(val_full, "full"),
        test_x=FeatureMatrix(test_x),
        test_full=LabelMatrix(test_full, "full"),
    )
