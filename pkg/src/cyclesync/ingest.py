"""Quarterly level series: CSV parsing, growth rates and aligned panels.

Quarters are carried as integer indices ``year * 4 + (quarter - 1)`` so that
alignment and window arithmetic are exact.
"""

from __future__ import annotations

import csv
import io
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DataError

_QUARTER_RE = re.compile(r"^\s*(\d{4})\s*[Qq]([1-4])\s*$")


def parse_quarter(tag: str) -> int:
    """``"1980Q1"`` -> integer quarter index."""
    match = _QUARTER_RE.match(tag)
    if match is None:
        raise DataError(f"malformed quarter tag {tag!r} (expected YYYYQn)")
    return int(match.group(1)) * 4 + int(match.group(2)) - 1


def format_quarter(index: int) -> str:
    year, q = divmod(int(index), 4)
    return f"{year}Q{q + 1}"


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class QuarterlySeries:
    """One country's consecutive quarterly observations."""

    label: str
    start: int
    values: np.ndarray

    def __post_init__(self):
        values = _frozen(self.values)
        if values.ndim != 1 or values.size == 0:
            raise DataError(f"series {self.label!r} must be a non-empty 1-d sequence")
        if not np.all(np.isfinite(values)):
            raise DataError(f"series {self.label!r} has non-finite values")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "start", int(self.start))

    def __len__(self) -> int:
        return self.values.size

    @property
    def end(self) -> int:
        return self.start + self.values.size - 1

    def quarters(self) -> list[str]:
        return [format_quarter(self.start + k) for k in range(len(self))]

    def scaled(self, factor: float) -> "QuarterlySeries":
        return QuarterlySeries(self.label, self.start, self.values * factor)

    def __eq__(self, other):
        if not isinstance(other, QuarterlySeries):
            return NotImplemented
        return (
            self.label == other.label
            and self.start == other.start
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None


@dataclass(frozen=True)
class Panel:
    """Aligned N x T matrix of growth rates.

    ``start`` is the quarter of the first column. ``standardized`` panels
    have every row centred and scaled to unit population variance.
    """

    labels: tuple[str, ...]
    start: int
    data: np.ndarray
    standardized: bool = False

    def __post_init__(self):
        data = _frozen(self.data)
        labels = tuple(str(x) for x in self.labels)
        if data.ndim != 2:
            raise DataError("panel data must be a 2-d array")
        n, t = data.shape
        if n != len(labels):
            raise DataError(f"{len(labels)} labels for {n} rows")
        if n < 2 or t < 2:
            raise DataError(f"panel needs N >= 2 and T >= 2, got N={n}, T={t}")
        if len(set(labels)) != n:
            raise DataError("duplicate labels in panel")
        if not np.all(np.isfinite(data)):
            raise DataError("panel has non-finite entries")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "start", int(self.start))

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def t(self) -> int:
        return self.data.shape[1]

    @property
    def end(self) -> int:
        return self.start + self.t - 1

    def select(self, labels: Sequence[str] | None) -> "Panel":
        """Rows for ``labels`` in the requested order (all rows if None)."""
        if labels is None:
            return self
        labels = list(labels)
        missing = [x for x in labels if x not in self.labels]
        if missing:
            raise DataError(f"unknown label(s): {', '.join(missing)}")
        rows = [self.labels.index(x) for x in labels]
        return Panel(tuple(labels), self.start, self.data[rows], self.standardized)


def parse_csv(text: str | Iterable[str]) -> list[QuarterlySeries]:
    """Read a wide CSV of quarterly levels (first column ``YYYYQn``).

    Each data column becomes one series covering its contiguous run of
    non-missing cells. Gaps between row dates count as missing cells.
    Errors carry the 1-based line number.
    """
    if isinstance(text, str):
        text = io.StringIO(text)
    reader = csv.reader(text)
    try:
        header = next(reader)
    except StopIteration:
        raise DataError("empty CSV input") from None
    labels = [h.strip() for h in header[1:]]
    if not labels:
        raise DataError("line 1: no data columns")
    if any(not x for x in labels):
        raise DataError("line 1: empty column label")
    if len(set(labels)) != len(labels):
        raise DataError("line 1: duplicate column labels")

    rows: list[tuple[int, list[float]]] = []
    previous = None
    for line_no, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(header):
            raise DataError(f"line {line_no}: expected {len(header)} fields, got {len(row)}")
        try:
            quarter = parse_quarter(row[0])
        except DataError as exc:
            raise DataError(f"line {line_no}: {exc}") from None
        if previous is not None and quarter <= previous:
            raise DataError(
                f"line {line_no}: {format_quarter(quarter)} is out of order "
                f"(follows {format_quarter(previous)})"
            )
        previous = quarter
        cells = []
        for label, cell in zip(labels, row[1:]):
            cell = cell.strip()
            if not cell:
                cells.append(math.nan)
                continue
            try:
                value = float(cell)
            except ValueError:
                raise DataError(f"line {line_no}: non-numeric value {cell!r} in column {label!r}") from None
            if not math.isfinite(value):
                raise DataError(f"line {line_no}: non-finite value {cell!r} in column {label!r}")
            cells.append(value)
        rows.append((quarter, cells))

    if not rows:
        raise DataError("CSV has a header but no data rows")
    first = rows[0][0]
    grid = np.full((rows[-1][0] - first + 1, len(labels)), np.nan)
    for quarter, cells in rows:
        grid[quarter - first] = cells

    series = []
    for j, label in enumerate(labels):
        present = np.flatnonzero(~np.isnan(grid[:, j]))
        if present.size == 0:
            raise DataError(f"column {label!r} has no observations")
        lo, hi = present[0], present[-1]
        if present.size != hi - lo + 1:
            raise DataError(f"column {label!r} has missing values inside its sample")
        series.append(QuarterlySeries(label, first + lo, grid[lo : hi + 1, j]))
    return series


def to_csv(series: Sequence[QuarterlySeries], date_header: str = "date") -> str:
    """Inverse of :func:`parse_csv` (floats written with ``repr`` precision)."""
    if not series:
        raise DataError("nothing to write")
    first = min(s.start for s in series)
    last = max(s.end for s in series)
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow([date_header] + [s.label for s in series])
    for q in range(first, last + 1):
        row = [format_quarter(q)]
        for s in series:
            row.append(repr(float(s.values[q - s.start])) if s.start <= q <= s.end else "")
        writer.writerow(row)
    return out.getvalue()


def _check_levels(series: QuarterlySeries, lag: int) -> None:
    if len(series) < lag + 1:
        raise DataError(
            f"series {series.label!r} has {len(series)} observations; growth needs at least {lag + 1}"
        )
    if np.any(series.values <= 0):
        raise DataError(f"series {series.label!r} has non-positive levels")


def yoy_growth(series: QuarterlySeries, lag: int = 4) -> QuarterlySeries:
    """Percent change on the same quarter a year earlier: 100 (x_t / x_{t-4} - 1)."""
    _check_levels(series, lag)
    x = series.values
    return QuarterlySeries(series.label, series.start + lag, 100.0 * (x[lag:] / x[:-lag] - 1.0))


def log_growth(series: QuarterlySeries, lag: int = 4) -> QuarterlySeries:
    """Log-difference variant, 100 ln(x_t / x_{t-4}), for sensitivity checks."""
    _check_levels(series, lag)
    x = series.values
    return QuarterlySeries(series.label, series.start + lag, 100.0 * np.log(x[lag:] / x[:-lag]))


GROWTH_METHODS = {"yoy-percent": yoy_growth, "log-diff": log_growth}


def standardize_rows(data: np.ndarray, labels: Sequence[str] | None = None) -> np.ndarray:
    """Centre each row and scale it to unit population variance (divide by T)."""
    data = np.asarray(data, dtype=float)
    mean = data.mean(axis=1, keepdims=True)
    centred = data - mean
    std = np.sqrt(np.mean(centred * centred, axis=1, keepdims=True))
    flat = std[:, 0] <= 1e-12 * np.maximum(1.0, np.abs(mean[:, 0]))
    if flat.any():
        names = [labels[i] if labels else str(i) for i in np.flatnonzero(flat)]
        raise DataError(f"zero-variance row(s), cannot standardize: {', '.join(names)}")
    return centred / std


def build_panel(
    series: Sequence[QuarterlySeries],
    subset: Sequence[str] | None = None,
    standardize: bool = True,
) -> Panel:
    """Stack growth series on their common sample.

    ``subset`` picks and orders the rows (default: all, input order).
    """
    by_label = {}
    for s in series:
        if s.label in by_label:
            raise DataError(f"duplicate series label {s.label!r}")
        by_label[s.label] = s
    if subset is None:
        subset = [s.label for s in series]
    subset = list(subset)
    missing = [x for x in subset if x not in by_label]
    if missing:
        raise DataError(f"unknown label(s): {', '.join(missing)}")
    if len(set(subset)) != len(subset):
        raise DataError("subset lists a label twice")
    chosen = [by_label[x] for x in subset]
    if len(chosen) < 2:
        raise DataError("a panel needs at least two series")

    start = max(s.start for s in chosen)
    end = min(s.end for s in chosen)
    if end - start + 1 < 2:
        raise DataError(
            f"common sample of {', '.join(subset)} is too short "
            f"({format_quarter(start)}..{format_quarter(end)})"
        )
    data = np.vstack([s.values[start - s.start : end - s.start + 1] for s in chosen])
    if standardize:
        data = standardize_rows(data, subset)
    return Panel(tuple(subset), start, data, standardize)


def read_growth_csv(path, method: str = "yoy-percent") -> list[QuarterlySeries]:
    """Parse a levels CSV file and convert every column to growth rates.

    Errors are re-raised with the file path prepended.
    """
    path = Path(path)
    if method not in GROWTH_METHODS:
        raise DataError(f"unknown growth method {method!r}")
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"{path}: {exc.strerror or exc}") from None
    try:
        return [GROWTH_METHODS[method](s) for s in parse_csv(text)]
    except DataError as exc:
        raise DataError(f"{path}: {exc}") from None
