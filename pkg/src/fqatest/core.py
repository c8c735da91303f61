"""Data model for densely observed functional time series.

A functional time series of length ``T`` observed on ``p`` evenly spaced
points of [0, 1] is stored as a ``T x p`` matrix, one curve per row.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class ValidationError(ValueError):
    """Raised when input data violate the curve-matrix invariants."""

    def __init__(self, message, problems=None):
        super().__init__(message)
        self.problems = list(problems or [])


@dataclass(frozen=True)
class EvalGrid:
    """Evenly spaced evaluation points ``u_1 = 0 < ... < u_p = 1``."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 1 or pts.size < 2:
            raise ValidationError("grid needs at least 2 points")
        if pts[0] != 0.0 or pts[-1] != 1.0:
            raise ValidationError("grid must start at 0 and end at 1")
        spacing = 1.0 / (pts.size - 1)
        if np.max(np.abs(np.diff(pts) - spacing)) > 1e-12 * max(1.0, spacing):
            raise ValidationError("grid points are not evenly spaced")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @classmethod
    def uniform(cls, p):
        return cls(np.linspace(0.0, 1.0, int(p)))

    @property
    def p(self):
        return self.points.size

    @property
    def spacing(self):
        return 1.0 / (self.p - 1)


@dataclass(frozen=True)
class CurveMatrix:
    """Immutable ``T x p`` matrix of curve values; row ``t`` is the curve at time ``t``.

    Construction validates the invariants (T >= 2, p >= 2, all finite); use
    :func:`validate` to get the full list of violations.
    """

    values: np.ndarray
    _grid: EvalGrid | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        arr = np.array(self.values, dtype=np.float64, copy=True)
        problems = _invariant_problems(arr)
        if problems:
            raise ValidationError("; ".join(problems), problems)
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def T(self):
        return self.values.shape[0]

    @property
    def p(self):
        return self.values.shape[1]

    @property
    def shape(self):
        return self.values.shape

    @property
    def grid(self):
        if self._grid is None:
            object.__setattr__(self, "_grid", EvalGrid.uniform(self.p))
        return self._grid

    def __eq__(self, other):
        if not isinstance(other, CurveMatrix):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self.values, other.values))

    def __hash__(self):
        return hash((self.shape, self.values.tobytes()))


def _invariant_problems(arr, max_report=20):
    problems = []
    if arr.ndim != 2:
        return [f"expected a 2-d matrix, got {arr.ndim} dimension(s)"]
    T, p = arr.shape
    if T < 2:
        problems.append(f"series too short: T={T} (need T >= 2)")
    if p < 2:
        problems.append(f"grid too small: p={p} (need p >= 2)")
    bad = np.argwhere(~np.isfinite(arr))
    for r, c in bad[:max_report]:
        # 1-based (row, column) to match spreadsheet / CSV line numbering
        problems.append(f"non-finite value {float(arr[r, c])!r} at ({r + 1},{c + 1})")
    if len(bad) > max_report:
        problems.append(f"... and {len(bad) - max_report} more non-finite values")
    return problems


def validate(m):
    """Return ``m`` unchanged if every invariant holds, else raise ValidationError.

    Accepts a :class:`CurveMatrix` or any array-like; positions in error
    messages are 1-based ``(row, column)``.
    """
    arr = m.values if isinstance(m, CurveMatrix) else np.asarray(m, dtype=np.float64)
    problems = _invariant_problems(arr)
    if problems:
        raise ValidationError("; ".join(problems), problems)
    return m if isinstance(m, CurveMatrix) else CurveMatrix(arr)


def load_csv(path, has_header=False):
    """Read one curve per line from a comma-separated file."""
    path = Path(path)
    rows = []
    width = None
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        for lineno, record in enumerate(reader, start=1):
            if has_header and lineno == 1:
                continue
            if not record or all(not cell.strip() for cell in record):
                continue
            if width is None:
                width = len(record)
            elif len(record) != width:
                raise ValidationError(
                    f"ragged row at line {lineno}: {len(record)} fields, expected {width}"
                )
            row = []
            for col, cell in enumerate(record, start=1):
                try:
                    row.append(float(cell))
                except ValueError:
                    raise ValidationError(
                        f"non-numeric value {cell.strip()!r} at line {lineno}, column {col}"
                    ) from None
            rows.append(row)
    if not rows:
        raise ValidationError(f"no data rows in {path}")
    return CurveMatrix(np.array(rows, dtype=np.float64))


def save_csv(m, path, header=None):
    """Write ``m`` in the format read by :func:`load_csv` (full float precision)."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if header is not None:
            writer.writerow(header)
        for row in m.values:
            writer.writerow([repr(float(x)) for x in row])
    return path


def log_returns(prices):
    """Intraday log-returns ``ln P_t(u_{j+1}) - ln P_t(u_j)``.

    The ``p - 1`` returns are re-indexed onto an evenly spaced grid of
    [0, 1]. A CurveMatrix in gives a CurveMatrix out; a bare array (for
    instance a single price curve) gives a bare array.
    """
    wrap = isinstance(prices, CurveMatrix)
    vals = prices.values if wrap else np.atleast_2d(np.asarray(prices, dtype=np.float64))
    if vals.ndim != 2 or vals.shape[1] < 2:
        raise ValidationError("need at least 2 price points per curve")
    bad = np.argwhere(~(vals > 0))
    if bad.size:
        r, c = bad[0]
        raise ValidationError(f"non-positive price {float(vals[r, c])!r} at ({r + 1},{c + 1})")
    bad = np.argwhere(~np.isfinite(vals))
    if bad.size:
        r, c = bad[0]
        raise ValidationError(f"non-finite price {float(vals[r, c])!r} at ({r + 1},{c + 1})")
    out = np.diff(np.log(vals), axis=1)
    if not wrap:
        return out[0] if np.ndim(prices) == 1 else out
    return CurveMatrix(out)
