"""Pointwise empirical quantile curves and excursion-set fractions."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import CurveMatrix, ValidationError
from .kernels import excursion_counts

# Levels and thresholds are given in decimal (0.05, 0.15, ...), and products
# like 0.15 * 200 land a few ulps away from the intended integer. Every
# order-index and threshold comparison is shifted by this tolerance,
# which is far below the 1/p or 1/T resolution of the counts themselves.
LEVEL_TOL = 1e-9


def order_index(tau, T):
    """1-based index ``ceil(tau * T)`` of the order statistic for level ``tau``."""
    return min(T, max(1, math.ceil(tau * T - LEVEL_TOL)))


def below(fractions, beta):
    """Boolean ``fractions <= beta`` with the decimal-level tolerance."""
    return np.asarray(fractions) <= beta + LEVEL_TOL


def check_levels(levels, name="levels"):
    lv = np.array(levels, dtype=np.float64).ravel()
    if lv.size == 0:
        raise ValidationError(f"{name} must be non-empty")
    if np.any(~np.isfinite(lv)) or np.any(lv <= 0.0) or np.any(lv >= 1.0):
        raise ValidationError(f"{name} must lie strictly inside (0, 1): {lv.tolist()}")
    if np.any(np.diff(lv) <= 0.0):
        raise ValidationError(f"{name} must be strictly ascending: {lv.tolist()}")
    return lv


@dataclass(frozen=True)
class QuantileCurveSet:
    """Estimated quantile curves, row ``i`` is the level-``levels[i]`` curve."""

    levels: np.ndarray
    curves: np.ndarray

    @property
    def P(self):
        return self.levels.size

    @property
    def p(self):
        return self.curves.shape[1]

    def curve(self, tau):
        return self.curves[self.level_index(tau)]

    def level_index(self, tau):
        hits = np.flatnonzero(np.abs(self.levels - tau) <= LEVEL_TOL)
        if hits.size == 0:
            raise KeyError(f"level {tau} not among {self.levels.tolist()}")
        return int(hits[0])


@dataclass(frozen=True)
class ExcursionTable:
    """Excursion fractions ``#{j : X_t(u_j) <= q_tau(u_j)} / p`` for every curve and level.

    ``counts`` holds the exact integer numerators; ``fractions`` is derived.
    """

    counts: np.ndarray
    levels: np.ndarray
    source_T: int
    source_p: int

    @property
    def fractions(self):
        return self.counts / self.source_p

    @property
    def T(self):
        return self.counts.shape[0]

    def level_index(self, tau):
        hits = np.flatnonzero(np.abs(self.levels - tau) <= LEVEL_TOL)
        if hits.size == 0:
            raise KeyError(f"level {tau} not among {self.levels.tolist()}")
        return int(hits[0])

    def column(self, tau):
        return self.fractions[:, self.level_index(tau)]

    def indicators(self, level_idx, beta):
        """0/1 series ``1{fraction_t <= beta}`` for the level at ``level_idx``."""
        return below(self.fractions[:, level_idx], beta).astype(np.uint8)

    def reversed(self):
        """The table of the time-reversed series."""
        return ExcursionTable(self.counts[::-1].copy(), self.levels, self.source_T, self.source_p)


def ecdf_at(sample, x):
    """Empirical CDF of ``sample`` evaluated at ``x``."""
    s = np.asarray(sample, dtype=np.float64).ravel()
    if s.size == 0:
        raise ValidationError("empty sample")
    return np.count_nonzero(s <= x) / s.size


def quantile_curves(m, levels):
    """Generalized-inverse ECDF quantile curves, one per level.

    At each grid point the level-``tau`` value is the ``ceil(tau * T)``-th
    order statistic of that column.
    """
    lv = check_levels(levels)
    vals = m.values if isinstance(m, CurveMatrix) else np.asarray(m, dtype=np.float64)
    T = vals.shape[0]
    idx = np.array([order_index(t, T) - 1 for t in lv])
    part = np.partition(vals, np.unique(idx), axis=0)
    curves = part[idx]
    lv.setflags(write=False)
    curves.setflags(write=False)
    return QuantileCurveSet(lv, curves)


def excursion_fraction(curve, qcurve):
    """Fraction of grid points where ``curve`` lies at or below ``qcurve``."""
    c = np.asarray(curve, dtype=np.float64).ravel()
    q = np.asarray(qcurve, dtype=np.float64).ravel()
    if c.shape != q.shape:
        raise ValidationError(f"length mismatch: curve has {c.size} points, quantile curve {q.size}")
    return np.count_nonzero(c <= q) / c.size


def excursion_table(m, q):
    vals = m.values if isinstance(m, CurveMatrix) else np.atleast_2d(np.asarray(m, dtype=np.float64))
    if vals.shape[1] != q.p:
        raise ValidationError(f"grid-size mismatch: data p={vals.shape[1]}, quantile curves p={q.p}")
    counts = excursion_counts(vals, q.curves)
    counts.setflags(write=False)
    return ExcursionTable(counts, q.levels, vals.shape[0], vals.shape[1])
