"""Sparse label matrix: construction, file formats, and summary statistics.

A label matrix holds the votes of m weak labeling sources on n data
points. Each stored entry is -1 or +1; abstentions are never stored and
densify to 0. Two on-disk formats are supported:

* dense:  CSV, one row per data point, m integers in {-1, 0, 1}, no header
* sparse: header line "n,m", then one "row,col,label" triplet per stored
  entry with label in {-1, 1}

Gold labels are one value in {-1, 1} per line. Lines starting with '#'
are treated as comments in every format.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import IO, Iterable, Iterator, Sequence

import numpy as np

from .errors import (
    DomainError,
    DuplicateEntryError,
    EmptyMatrixError,
    ParseError,
)

__all__ = [
    "LabelMatrix",
    "GoldLabels",
    "MatrixStats",
    "class_counts",
    "stats",
    "load_matrix",
    "save_matrix",
    "load_gold",
    "save_gold",
]


@dataclass(frozen=True, eq=False)
class LabelMatrix:
    """Immutable sparse matrix of source votes over {-1, +1}, 0 = abstain.

    Entries are kept as parallel arrays sorted lexicographically by
    (row, col), which makes the representation canonical: two matrices
    with the same votes compare equal and serialize identically.
    """

    n: int
    m: int
    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray

    def __post_init__(self) -> None:
        if self.n < 0 or self.m < 0:
            raise DomainError(f"matrix shape ({self.n}, {self.m}) must be nonnegative")
        rows = np.asarray(self.rows, dtype=np.int64)
        cols = np.asarray(self.cols, dtype=np.int64)
        vals = np.asarray(self.vals, dtype=np.int8)
        if not (rows.shape == cols.shape == vals.shape) or rows.ndim != 1:
            raise DomainError("entry arrays must be 1-d and of equal length")
        if rows.size:
            if rows.min(initial=0) < 0 or (rows >= self.n).any():
                raise DomainError(f"row index out of range [0, {self.n})")
            if cols.min(initial=0) < 0 or (cols >= self.m).any():
                raise DomainError(f"col index out of range [0, {self.m})")
            if not np.isin(vals, (-1, 1)).all():
                raise DomainError("stored labels must be -1 or +1")
            order = np.lexsort((cols, rows))
            rows, cols, vals = rows[order], cols[order], vals[order]
            keys = rows * self.m + cols
            if np.unique(keys).size != keys.size:
                dup = int(np.flatnonzero(np.diff(keys) == 0)[0])
                raise DuplicateEntryError(
                    f"duplicate entry at (row={int(rows[dup])}, col={int(cols[dup])})"
                )
        for name, arr in (("rows", rows), ("cols", cols), ("vals", vals)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def from_entries(
        cls, n: int, m: int, entries: Iterable[tuple[int, int, int]]
    ) -> "LabelMatrix":
        """Build from (row, col, label) triplets; abstains (0) are dropped."""
        kept = [(r, c, v) for r, c, v in entries if v != 0]
        if kept:
            r, c, v = (np.array(x) for x in zip(*kept))
        else:
            r = c = v = np.array([], dtype=np.int64)
        return cls(n, m, r, c, v)

    @classmethod
    def from_dense(cls, array: Sequence[Sequence[int]] | np.ndarray) -> "LabelMatrix":
        arr = np.asarray(array)
        if arr.ndim != 2:
            raise DomainError("dense label array must be 2-d")
        if arr.size and not np.isin(arr, (-1, 0, 1)).all():
            bad = arr[~np.isin(arr, (-1, 0, 1))].flat[0]
            raise DomainError(f"label value {bad!r} outside {{-1, 0, 1}}")
        r, c = np.nonzero(arr)
        return cls(arr.shape[0], arr.shape[1], r, c, arr[r, c])

    @cached_property
    def dense(self) -> np.ndarray:
        """The n-by-m dense view with 0 for abstentions (read-only)."""
        out = np.zeros((self.n, self.m), dtype=np.int8)
        out[self.rows, self.cols] = self.vals
        out.setflags(write=False)
        return out

    def to_dense(self) -> np.ndarray:
        return self.dense

    @property
    def num_entries(self) -> int:
        return int(self.vals.size)

    def row(self, i: int) -> np.ndarray:
        return self.dense[i]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LabelMatrix):
            return NotImplemented
        return (
            self.n == other.n
            and self.m == other.m
            and np.array_equal(self.rows, other.rows)
            and np.array_equal(self.cols, other.cols)
            and np.array_equal(self.vals, other.vals)
        )

    def __repr__(self) -> str:
        return f"LabelMatrix(n={self.n}, m={self.m}, entries={self.num_entries})"


@dataclass(frozen=True, eq=False)
class GoldLabels:
    """Held-out true labels, one value in {-1, +1} per data point."""

    labels: np.ndarray

    def __post_init__(self) -> None:
        labels = np.asarray(self.labels, dtype=np.int8)
        if labels.ndim != 1:
            raise DomainError("gold labels must be a 1-d vector")
        if labels.size and not np.isin(labels, (-1, 1)).all():
            raise DomainError("gold labels must be -1 or +1")
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return int(self.labels.size)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GoldLabels):
            return NotImplemented
        return np.array_equal(self.labels, other.labels)


@dataclass(frozen=True)
class MatrixStats:
    """Row-level coverage statistics and per-column vote counts.

    density   mean number of non-abstain labels per row
    coverage  fraction of rows with at least one label
    overlap   fraction of rows with at least two labels
    conflict  fraction of rows carrying both a -1 and a +1
    """

    density: float
    coverage: float
    overlap: float
    conflict: float
    column_pos_counts: np.ndarray
    column_neg_counts: np.ndarray


def class_counts(row: Sequence[int] | np.ndarray) -> tuple[int, int]:
    """Count (+1, -1) votes in one label row; abstains are ignored."""
    arr = np.asarray(row)
    return int((arr == 1).sum()), int((arr == -1).sum())


def stats(matrix: LabelMatrix) -> MatrixStats:
    """Summary statistics of a label matrix; raises on n = 0."""
    if matrix.n == 0:
        raise EmptyMatrixError("cannot compute statistics of an empty matrix")
    n = matrix.n
    per_row = np.bincount(matrix.rows, minlength=n)
    pos_rows = np.bincount(matrix.rows[matrix.vals == 1], minlength=n)
    neg_rows = per_row - pos_rows
    return MatrixStats(
        density=float(matrix.num_entries) / n,
        coverage=float((per_row >= 1).mean()),
        overlap=float((per_row >= 2).mean()),
        conflict=float(((pos_rows > 0) & (neg_rows > 0)).mean()),
        column_pos_counts=np.bincount(
            matrix.cols[matrix.vals == 1], minlength=matrix.m
        ),
        column_neg_counts=np.bincount(
            matrix.cols[matrix.vals == -1], minlength=matrix.m
        ),
    )


def _iter_content_lines(stream: IO[str]) -> Iterator[tuple[int, str]]:
    """Yield (1-based line number, stripped line), skipping comments/blanks."""
    for lineno, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        yield lineno, line


def _open_source(source: str | Path | IO[str]) -> tuple[IO[str], bool]:
    if hasattr(source, "read"):
        return source, False  # type: ignore[return-value]
    return open(source, "r", encoding="utf-8"), True


def _parse_int(token: str, lineno: int, what: str) -> int:
    try:
        return int(token.strip())
    except ValueError:
        raise ParseError(f"line {lineno}: cannot parse {what} from {token.strip()!r}")


def load_matrix(source: str | Path | IO[str], format: str = "dense") -> LabelMatrix:
    """Read a label matrix from a path or text stream.

    format is "dense" or "sparse" (see module docstring). Malformed lines
    raise ParseError with the offending line number; out-of-alphabet
    values raise DomainError; repeated sparse triplets raise
    DuplicateEntryError.
    """
    stream, owned = _open_source(source)
    try:
        if format == "dense":
            return _load_dense(stream)
        if format == "sparse":
            return _load_sparse(stream)
        raise DomainError(f"unknown matrix format {format!r}")
    finally:
        if owned:
            stream.close()


def _load_dense(stream: IO[str]) -> LabelMatrix:
    rows: list[list[int]] = []
    width = None
    for lineno, line in _iter_content_lines(stream):
        tokens = line.split(",")
        if width is None:
            width = len(tokens)
        elif len(tokens) != width:
            raise ParseError(
                f"line {lineno}: expected {width} columns, found {len(tokens)}"
            )
        values = [_parse_int(t, lineno, "label") for t in tokens]
        for v in values:
            if v not in (-1, 0, 1):
                raise DomainError(f"line {lineno}: label value {v} outside {{-1, 0, 1}}")
        rows.append(values)
    if width is None:
        raise ParseError("line 1: dense matrix input is empty")
    return LabelMatrix.from_dense(np.array(rows, dtype=np.int8))


def _load_sparse(stream: IO[str]) -> LabelMatrix:
    lines = _iter_content_lines(stream)
    try:
        lineno, header = next(lines)
    except StopIteration:
        raise ParseError("line 1: sparse matrix input is empty")
    tokens = header.split(",")
    if len(tokens) != 2:
        raise ParseError(f"line {lineno}: sparse header must be 'n,m'")
    n = _parse_int(tokens[0], lineno, "n")
    m = _parse_int(tokens[1], lineno, "m")
    entries: list[tuple[int, int, int]] = []
    seen: set[tuple[int, int]] = set()
    for lineno, line in lines:
        tokens = line.split(",")
        if len(tokens) != 3:
            raise ParseError(f"line {lineno}: triplet must be 'row,col,label'")
        r = _parse_int(tokens[0], lineno, "row")
        c = _parse_int(tokens[1], lineno, "col")
        v = _parse_int(tokens[2], lineno, "label")
        if v not in (-1, 1):
            raise DomainError(f"line {lineno}: sparse label {v} outside {{-1, 1}}")
        if not (0 <= r < n) or not (0 <= c < m):
            raise DomainError(f"line {lineno}: index ({r}, {c}) outside ({n}, {m})")
        if (r, c) in seen:
            raise DuplicateEntryError(f"line {lineno}: duplicate entry ({r}, {c})")
        seen.add((r, c))
        entries.append((r, c, v))
    return LabelMatrix.from_entries(n, m, entries)


def save_matrix(
    matrix: LabelMatrix,
    target: str | Path | IO[str],
    format: str = "dense",
    header_lines: Sequence[str] = (),
) -> None:
    """Write a matrix in the named format; header_lines become '#' comments."""
    buf = io.StringIO()
    for line in header_lines:
        buf.write(f"# {line}\n")
    if format == "dense":
        dense = matrix.dense
        for i in range(matrix.n):
            buf.write(",".join(str(int(v)) for v in dense[i]))
            buf.write("\n")
    elif format == "sparse":
        buf.write(f"{matrix.n},{matrix.m}\n")
        for r, c, v in zip(matrix.rows, matrix.cols, matrix.vals):
            buf.write(f"{int(r)},{int(c)},{int(v)}\n")
    else:
        raise DomainError(f"unknown matrix format {format!r}")
    _write_text(target, buf.getvalue())


def load_gold(source: str | Path | IO[str]) -> GoldLabels:
    stream, owned = _open_source(source)
    try:
        values = []
        for lineno, line in _iter_content_lines(stream):
            v = _parse_int(line, lineno, "gold label")
            if v not in (-1, 1):
                raise DomainError(f"line {lineno}: gold label {v} outside {{-1, 1}}")
            values.append(v)
    finally:
        if owned:
            stream.close()
    return GoldLabels(np.array(values, dtype=np.int8))


def save_gold(
    gold: GoldLabels, target: str | Path | IO[str], header_lines: Sequence[str] = ()
) -> None:
    text = "".join(f"# {line}\n" for line in header_lines)
    text += "".join(f"{int(v)}\n" for v in gold.labels)
    _write_text(target, text)


def _write_text(target: str | Path | IO[str], text: str) -> None:
    if hasattr(target, "write"):
        target.write(text)  # type: ignore[union-attr]
    else:
        Path(target).write_text(text, encoding="utf-8")
