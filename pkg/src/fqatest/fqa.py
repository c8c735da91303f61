"""Sample functional quantile autocorrelation and the omnibus statistic.

For quantile levels ``(tau, tau')``, thresholds ``(beta, beta')`` and lag
``l`` the sample FQA is the correlation between the indicator series
``1{fraction_tau(t) <= beta}`` and ``1{fraction_tau'(t + l) <= beta'}``,
computed from full-sample marginal frequencies. The omnibus statistic is the
sum of squared FQA values over a grid of cells.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .core import ValidationError
from .kernels import lagged_joint_counts
from .quantiles import LEVEL_TOL, below, check_levels

DEFAULT_LEVELS = tuple(round(0.05 * k, 2) for k in range(1, 20))

# rounding slack absorbed by the clamp to [-1, 1]
_CLAMP_TOL = 1e-12


class DegenerateCellError(ValueError):
    """A marginal excursion probability is 0 or 1, so the FQA is undefined."""


@dataclass(frozen=True)
class FqaParams:
    tau: float
    tau_prime: float
    lag: int
    beta: float
    beta_prime: float

    def __post_init__(self):
        for name in ("tau", "tau_prime", "beta", "beta_prime"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValidationError(f"{name}={v} must lie strictly inside (0, 1)")
        if int(self.lag) != self.lag or self.lag < 1:
            raise ValidationError(f"lag must be a positive integer, got {self.lag}")


@dataclass(frozen=True)
class FqaGrid:
    """Quantile levels and thresholds over which FQA cells are enumerated.

    In reduced mode the thresholds coincide with the levels and only the
    ``P**2`` cells ``(tau_i, tau_j, tau_i, tau_j)`` are used. Otherwise all
    ``P**2 * B**2`` cells are enumerated in lexicographic ``(i, j, k, l)``
    order.
    """

    levels: tuple = DEFAULT_LEVELS
    thresholds: tuple | None = None
    reduced: bool = True

    def __post_init__(self):
        lv = tuple(float(x) for x in check_levels(self.levels))
        object.__setattr__(self, "levels", lv)
        if self.reduced:
            if self.thresholds is not None and not np.allclose(self.thresholds, lv, atol=LEVEL_TOL, rtol=0):
                raise ValidationError("reduced grid requires thresholds equal to levels")
            object.__setattr__(self, "thresholds", lv)
        else:
            th = lv if self.thresholds is None else self.thresholds
            object.__setattr__(self, "thresholds", tuple(float(x) for x in check_levels(th, "thresholds")))

    @property
    def P(self):
        return len(self.levels)

    @property
    def B(self):
        return len(self.thresholds)

    @property
    def size(self):
        return self.P ** 2 if self.reduced else self.P ** 2 * self.B ** 2

    def cells(self):
        """Cell keys in the frozen order: ``(i, j)`` if reduced, else ``(i, j, k, l)``."""
        if self.reduced:
            return list(itertools.product(range(self.P), repeat=2))
        return list(itertools.product(range(self.P), range(self.P), range(self.B), range(self.B)))

    def cell_params(self, key, lag):
        if self.reduced:
            i, j = key
            return FqaParams(self.levels[i], self.levels[j], lag, self.levels[i], self.levels[j])
        i, j, k, l = key
        return FqaParams(self.levels[i], self.levels[j], lag, self.thresholds[k], self.thresholds[l])

    def to_dict(self):
        return {"levels": list(self.levels), "thresholds": list(self.thresholds), "reduced": self.reduced}


@dataclass(frozen=True)
class FqaVector:
    """Stacked FQA estimates at one lag.

    Degenerate cells carry ``nan`` in ``values`` and ``True`` in ``mask``.
    """

    values: np.ndarray
    mask: np.ndarray
    grid: FqaGrid
    lag: int
    T: int
    cell_index: dict = field(repr=False, compare=False, default_factory=dict)

    @property
    def masked_cells(self):
        return int(np.count_nonzero(self.mask))

    @property
    def active(self):
        return self.values[~self.mask]

    def to_dict(self):
        return {
            "values": [None if m else float(v) for v, m in zip(self.values, self.mask)],
            "mask": [bool(m) for m in self.mask],
            "grid": self.grid.to_dict(),
            "lag": int(self.lag),
            "T": int(self.T),
            "masked_cells": self.masked_cells,
            "masking_policy": "cells with marginal probability 0 or 1 are excluded",
        }


def marginal_prob(fractions, beta):
    """Share of time points whose excursion fraction is at most ``beta``."""
    f = np.asarray(fractions, dtype=np.float64).ravel()
    if f.size == 0:
        raise ValidationError("empty fraction column")
    return np.count_nonzero(below(f, beta)) / f.size


def joint_prob(frac_tau, frac_tau_prime, lag, beta, beta_prime):
    """Lagged joint frequency, summed over ``T - lag`` pairs and divided by ``T``."""
    a = np.asarray(frac_tau, dtype=np.float64).ravel()
    b = np.asarray(frac_tau_prime, dtype=np.float64).ravel()
    T = a.size
    if b.size != T:
        raise ValidationError("fraction columns differ in length")
    if int(lag) != lag or not 1 <= lag <= T - 1:
        raise ValidationError(f"lag {lag} out of range 1..{T - 1}")
    lag = int(lag)
    both = below(a[: T - lag], beta) & below(b[lag:], beta_prime)
    return np.count_nonzero(both) / T


def _correlation(joint, pa, pb):
    # grouped so that swapping the two roles gives bit-identical results
    den = np.sqrt((pa * (1.0 - pa)) * (pb * (1.0 - pb)))
    rho = (joint - pa * pb) / den
    # Only rounding overshoot is clamped. Below -1 can be genuine: the joint
    # sum has T - lag terms, so for large lags and extreme marginals the
    # estimate leaves [-1, 1] by O(lag / T).
    snap = (np.abs(rho) > 1.0) & (np.abs(rho) - 1.0 <= _CLAMP_TOL)
    return np.where(snap, np.sign(rho), rho)


def fqa_hat(table, params):
    """Sample FQA for one cell of an :class:`~fqatest.quantiles.ExcursionTable`."""
    T = table.T
    if params.lag > T - 1:
        raise ValidationError(f"lag {params.lag} out of range for T={T}")
    fa = table.column(params.tau)
    fb = table.column(params.tau_prime)
    pa = marginal_prob(fa, params.beta)
    pb = marginal_prob(fb, params.beta_prime)
    if pa in (0.0, 1.0) or pb in (0.0, 1.0):
        raise DegenerateCellError(
            f"degenerate cell {params}: marginal probabilities {pa:.4g}, {pb:.4g}"
        )
    joint = joint_prob(fa, fb, params.lag, params.beta, params.beta_prime)
    return float(_correlation(joint, pa, pb))


def cell_columns(table, grid):
    """Indicator matrix and, per cell, the two column indices it correlates.

    Columns are the distinct (level, threshold) pairs used by ``grid``.
    """
    try:
        lidx = [table.level_index(t) for t in grid.levels]
    except KeyError as exc:
        raise ValidationError(f"grid level not in excursion table: {exc}") from None
    if grid.reduced:
        pairs = [(lidx[i], grid.levels[i]) for i in range(grid.P)]
        cols = np.array(grid.cells(), dtype=np.intp).reshape(-1, 2)
        left, right = cols[:, 0], cols[:, 1]
    else:
        B = grid.B
        pairs = [(lidx[i], grid.thresholds[k]) for i in range(grid.P) for k in range(B)]
        cols = np.array(grid.cells(), dtype=np.intp).reshape(-1, 4)
        left = cols[:, 0] * B + cols[:, 2]
        right = cols[:, 1] * B + cols[:, 3]
    ind = np.empty((table.T, len(pairs)), dtype=np.uint8)
    for c, (li, beta) in enumerate(pairs):
        ind[:, c] = table.indicators(li, beta)
    return ind, left, right


def fqa_vector(table, grid, lag):
    """FQA estimates over every cell of ``grid``; degenerate cells are masked."""
    T = table.T
    if int(lag) != lag or not 1 <= lag <= T - 1:
        raise ValidationError(f"lag {lag} out of range 1..{T - 1}")
    lag = int(lag)
    ind, left, right = cell_columns(table, grid)
    marg = ind.sum(axis=0, dtype=np.int64) / T
    joint = lagged_joint_counts(ind, lag) / T
    pa, pb = marg[left], marg[right]
    mask = (pa == 0.0) | (pa == 1.0) | (pb == 0.0) | (pb == 1.0)
    values = np.full(left.size, np.nan)
    ok = ~mask
    values[ok] = _correlation(joint[left[ok], right[ok]], pa[ok], pb[ok])
    values.setflags(write=False)
    mask.setflags(write=False)
    index = {key: pos for pos, key in enumerate(grid.cells())}
    return FqaVector(values, mask, grid, lag, T, index)


def omnibus_stat(v, scaled=False):
    """Sum of squared unmasked FQA values; ``scaled=True`` multiplies by ``T``.

    ``v`` may also be a bare array, with ``nan`` marking masked cells.
    """
    if isinstance(v, FqaVector):
        active = v.active
    else:
        if scaled:
            raise ValidationError("scaling needs the series length; pass an FqaVector")
        arr = np.asarray(v, dtype=np.float64).ravel()
        active = arr[~np.isnan(arr)]
    if active.size == 0:
        raise DegenerateCellError("all FQA cells are degenerate (masked)")
    s = float(np.sum(active * active))
    return v.T * s if scaled else s
