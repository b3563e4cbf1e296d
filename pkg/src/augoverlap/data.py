"""Data model and text file I/O for embeddings, labels, multi-view sets and positive pairs.

File formats (UTF-8, LF line endings):

* EMB:   ``EMB v1`` / ``n=<N> dim=<m>`` / N rows of m space-separated floats.
* VIEWS: ``VIEWS v1`` / ``n=<N> c=<C> dim=<m>`` / N*C rows, anchor-major.
* LAB:   ``LAB v1`` / ``n=<N> k=<K>`` / N rows of one integer in [0, K).
* PAIRS: two EMB files of identical shape, passed as a pair of paths.

Floats are serialized with 9 significant digits, so canonical files round-trip
byte-identically. Loaders never normalize; call :func:`normalize` explicitly.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateInputError, ParseError

_FLOAT_FMT = "%.9g"


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class EmbeddingSet:
    """An n x m matrix of feature vectors, one sample per row."""

    values: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        v = self.values
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise ValueError(f"embedding matrix must be 2-D and non-empty, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("embedding matrix contains non-finite values")
        object.__setattr__(self, "values", _freeze(v))
        if self.normalized:
            norms = np.linalg.norm(self.values, axis=1)
            if not np.allclose(norms, 1.0, atol=1e-6):
                raise ValueError("normalized flag set but rows are not unit-norm")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def m(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class LabelSet:
    """Integer class labels in [0, k) for n samples."""

    labels: np.ndarray
    k: int

    def __post_init__(self):
        lab = np.asarray(self.labels, dtype=np.int64)
        if lab.ndim != 1 or lab.shape[0] < 1:
            raise ValueError("labels must be a non-empty 1-D array")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if lab.min() < 0 or lab.max() >= self.k:
            bad = int(lab[(lab < 0) | (lab >= self.k)][0])
            raise ValueError(f"label {bad} out of range [0, {self.k})")
        lab.flags.writeable = False
        object.__setattr__(self, "labels", lab)

    @property
    def n(self) -> int:
        return self.labels.shape[0]


@dataclass(frozen=True)
class ViewSet:
    """n anchors x c views x m dims, stored as an (n*c) x m matrix, anchor-major."""

    values: np.ndarray
    n: int
    c: int
    normalized: bool = False

    def __post_init__(self):
        v = self.values
        if self.c < 1 or self.n < 1:
            raise ValueError("n and c must be >= 1")
        if v.ndim != 2 or v.shape[0] != self.n * self.c:
            raise ValueError(f"expected {self.n * self.c} rows, got {v.shape[0]}")
        if not np.all(np.isfinite(v)):
            raise ValueError("view matrix contains non-finite values")
        object.__setattr__(self, "values", _freeze(v))
        if self.normalized:
            norms = np.linalg.norm(self.values, axis=1)
            if not np.allclose(norms, 1.0, atol=1e-6):
                raise ValueError("normalized flag set but rows are not unit-norm")

    @property
    def m(self) -> int:
        return self.values.shape[1]

    def stacked(self) -> np.ndarray:
        """The views as an (n, c, m) array."""
        return self.values.reshape(self.n, self.c, self.m)

    def views_of(self, i: int) -> np.ndarray:
        return self.values[i * self.c : (i + 1) * self.c]


@dataclass(frozen=True)
class PositivePairs:
    """Row-aligned positive pairs (x_i, x_i+), optionally labeled per side."""

    left: EmbeddingSet
    right: EmbeddingSet
    left_labels: LabelSet | None = None
    right_labels: LabelSet | None = None

    def __post_init__(self):
        if self.left.values.shape != self.right.values.shape:
            raise ValueError(
                f"pair sides have mismatched shapes {self.left.values.shape} "
                f"vs {self.right.values.shape}"
            )
        for side, lab in (("left", self.left_labels), ("right", self.right_labels)):
            if lab is not None and lab.n != self.left.n:
                raise ValueError(f"{side} labels have n={lab.n}, pairs have n={self.left.n}")

    @property
    def n(self) -> int:
        return self.left.n

    @property
    def labeled(self) -> bool:
        return self.left_labels is not None and self.right_labels is not None


def normalize(e: EmbeddingSet) -> EmbeddingSet:
    """Project every row onto the unit sphere. Idempotent; rejects zero rows."""
    norms = np.linalg.norm(e.values, axis=1)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise DegenerateInputError(f"row {zero[0]} has zero norm and cannot be normalized")
    return EmbeddingSet(e.values / norms[:, None], normalized=True)


def normalize_views(v: ViewSet) -> ViewSet:
    norms = np.linalg.norm(v.values, axis=1)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise DegenerateInputError(f"row {zero[0]} has zero norm and cannot be normalized")
    return ViewSet(v.values / norms[:, None], n=v.n, c=v.c, normalized=True)


# ---------------------------------------------------------------------------
# parsing helpers


def _read_lines(path) -> list[str]:
    text = Path(path).read_text(encoding="utf-8")
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    return lines


def _parse_header(line: str, lineno: int, pattern: str, names: tuple[str, ...]) -> tuple[int, ...]:
    m = re.fullmatch(pattern, line)
    if m is None:
        raise ParseError(f"line {lineno}: malformed header {line!r}")
    return tuple(int(m.group(name)) for name in names)


def _parse_matrix(lines: list[str], start: int, rows: int, cols: int, path) -> np.ndarray:
    if len(lines) - start < rows:
        raise ParseError(f"{path}: line {len(lines) + 1}: expected {rows} data rows, found {len(lines) - start}")
    if len(lines) - start > rows:
        raise ParseError(f"{path}: line {start + rows + 1}: trailing data beyond declared {rows} rows")
    out = np.empty((rows, cols), dtype=np.float64)
    for r in range(rows):
        lineno = start + r + 1
        fields = lines[start + r].split()
        if len(fields) != cols:
            raise ParseError(f"{path}: line {lineno}: expected {cols} values, found {len(fields)}")
        try:
            row = np.array([float(f) for f in fields])
        except ValueError as exc:
            raise ParseError(f"{path}: line {lineno}: {exc}") from None
        if not np.all(np.isfinite(row)):
            raise ParseError(f"{path}: line {lineno}: non-finite value")
        out[r] = row
    return out


def load_embeddings(path) -> EmbeddingSet:
    lines = _read_lines(path)
    if not lines or lines[0] != "EMB v1":
        raise ParseError(f"{path}: line 1: expected 'EMB v1' header")
    n, m = _parse_header(lines[1] if len(lines) > 1 else "", 2, r"n=(?P<n>\d+) dim=(?P<m>\d+)", ("n", "m"))
    values = _parse_matrix(lines, 2, n, m, path)
    return EmbeddingSet(values, normalized=False)


def load_views(path) -> ViewSet:
    lines = _read_lines(path)
    if not lines or lines[0] != "VIEWS v1":
        raise ParseError(f"{path}: line 1: expected 'VIEWS v1' header")
    n, c, m = _parse_header(
        lines[1] if len(lines) > 1 else "", 2, r"n=(?P<n>\d+) c=(?P<c>\d+) dim=(?P<m>\d+)", ("n", "c", "m")
    )
    values = _parse_matrix(lines, 2, n * c, m, path)
    return ViewSet(values, n=n, c=c)


def load_labels(path) -> LabelSet:
    lines = _read_lines(path)
    if not lines or lines[0] != "LAB v1":
        raise ParseError(f"{path}: line 1: expected 'LAB v1' header")
    n, k = _parse_header(lines[1] if len(lines) > 1 else "", 2, r"n=(?P<n>\d+) k=(?P<k>\d+)", ("n", "k"))
    if len(lines) - 2 != n:
        raise ParseError(f"{path}: line {len(lines) + 1}: expected {n} label rows, found {len(lines) - 2}")
    labels = np.empty(n, dtype=np.int64)
    for r in range(n):
        lineno = r + 3
        field = lines[r + 2].strip()
        try:
            labels[r] = int(field)
        except ValueError:
            raise ParseError(f"{path}: line {lineno}: expected an integer, got {field!r}") from None
        if not 0 <= labels[r] < k:
            raise ParseError(f"{path}: line {lineno}: label {labels[r]} out of range [0, {k})")
    return LabelSet(labels, k=k)


def load_pairs(path_left, path_right, labels_left=None, labels_right=None) -> PositivePairs:
    left = load_embeddings(path_left)
    right = load_embeddings(path_right)
    ll = load_labels(labels_left) if labels_left is not None else None
    rl = load_labels(labels_right) if labels_right is not None else None
    return PositivePairs(left, right, ll, rl)


# ---------------------------------------------------------------------------
# writers


def _format_matrix(values: np.ndarray) -> str:
    return "\n".join(" ".join(_FLOAT_FMT % v for v in row) for row in values)


def save_embeddings(e: EmbeddingSet, path) -> None:
    body = f"EMB v1\nn={e.n} dim={e.m}\n{_format_matrix(e.values)}\n"
    Path(path).write_text(body, encoding="utf-8", newline="\n")


def save_views(v: ViewSet, path) -> None:
    body = f"VIEWS v1\nn={v.n} c={v.c} dim={v.m}\n{_format_matrix(v.values)}\n"
    Path(path).write_text(body, encoding="utf-8", newline="\n")


def save_labels(lab: LabelSet, path) -> None:
    body = f"LAB v1\nn={lab.n} k={lab.k}\n" + "\n".join(str(x) for x in lab.labels) + "\n"
    Path(path).write_text(body, encoding="utf-8", newline="\n")
