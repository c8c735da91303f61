"""Null calibration and decisions for the FQA tests.

The omnibus test compares ``T * S_T(l)`` with a weighted sum of independent
chi-square(1) variables whose weights are the eigenvalues of an estimate of
the asymptotic covariance of ``sqrt(T) * rho_hat``. The covariance is
estimated from the per-time-point indicator products with a Bartlett lag
window, and the weighted chi-square law is sampled by Monte Carlo.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

from .core import CurveMatrix, ValidationError, validate
from .fqa import (
    DegenerateCellError,
    FqaGrid,
    FqaParams,
    cell_columns,
    fqa_hat,
    fqa_vector,
    omnibus_stat,
)
from .quantiles import excursion_table, quantile_curves

DEFAULT_M = 10000
MIN_OMEGA_ROWS = 10
# Monte Carlo draws are generated in fixed-size blocks, each from its own
# counter-based stream, so the sample does not depend on the worker count.
MC_BLOCK = 2048


@dataclass(frozen=True)
class SummandMatrix:
    """Standardized centred indicator products, one column per active cell.

    ``rows[t, c] = (X_t - p_c)(Y_{t+l} - q_c) / sqrt(p_c(1-p_c) q_c(1-q_c))``.
    """

    rows: np.ndarray
    cells: tuple
    lag: int
    T: int

    @property
    def d(self):
        return self.rows.shape[1]


@dataclass(frozen=True)
class NullSpec:
    eigenvalues: np.ndarray
    M: int
    seed: int
    bandwidth: int

    def __post_init__(self):
        if self.M < 1000:
            raise ValidationError(f"M={self.M}: the weighted chi-square null needs M >= 1000")
        if np.any(np.asarray(self.eigenvalues) < 0):
            raise ValidationError("eigenvalues must be nonnegative")


@dataclass(frozen=True)
class TestResult:
    """Outcome of one omnibus test; ``runtime_seconds`` is excluded from equality."""

    __test__ = False  # not a pytest class

    statistic: float
    lag: int
    p_value: float
    critical_values: dict
    masked_cells: int
    null_spec: NullSpec = field(repr=False, compare=False)
    T: int = 0
    runtime_seconds: float = field(default=0.0, compare=False)

    def reject(self, alpha):
        return self.statistic > self.critical_values[_alpha_key(alpha)]

    @property
    def eigenvalue_count(self):
        return int(self.null_spec.eigenvalues.size)

    def to_dict(self, include_runtime=True):
        out = {
            "statistic": self.statistic,
            "lag": self.lag,
            "p_value": self.p_value,
            "critical_values": dict(self.critical_values),
            "eigenvalue_count": self.eigenvalue_count,
            "masked_cells": self.masked_cells,
            "seed": self.null_spec.seed,
            "M": self.null_spec.M,
            "bandwidth": self.null_spec.bandwidth,
            "T": self.T,
        }
        if include_runtime:
            out["runtime_seconds"] = self.runtime_seconds
        return out

    def to_json(self, include_runtime=True):
        return json.dumps(self.to_dict(include_runtime), sort_keys=True)


@dataclass(frozen=True)
class FixedCellResult:
    __test__ = False

    rho: float
    z: float
    p_value: float
    ci: tuple
    sigma: float
    alpha: float
    T: int
    sigma_mode: str

    def reject(self):
        return self.p_value < self.alpha

    def to_dict(self):
        return asdict(self)


def _alpha_key(alpha):
    return f"{float(alpha):g}"


# Under the null the summands are serially uncorrelated, so the lag-0 term is
# already the full long-run covariance; extra window terms only add noise to a
# d x d estimate built from about T rows (d = 361 > T = 200 by default), which
# widens the simulated null. The Bartlett window stays available via "auto".
DEFAULT_BANDWIDTH = 0


def default_bandwidth(T):
    """Bartlett lag-window half-width ``floor(T ** (1/3))``."""
    # nudge so exact cubes (T = 1000) are not lost to cbrt rounding
    return int(math.floor(T ** (1.0 / 3.0) + 1e-9))


def indicator_summands(table, grid, lag):
    """Per-time-point summands whose mean approximates each active FQA cell."""
    T = table.T
    if int(lag) != lag or not 1 <= lag <= T - 1:
        raise ValidationError(f"lag {lag} out of range 1..{T - 1}")
    lag = int(lag)
    ind, left, right = cell_columns(table, grid)
    marg = ind.sum(axis=0, dtype=np.int64) / T
    pa, pb = marg[left], marg[right]
    ok = ~((pa == 0.0) | (pa == 1.0) | (pb == 0.0) | (pb == 1.0))
    keys = grid.cells()
    cells = tuple(k for k, good in zip(keys, ok) if good)
    left, right, pa, pb = left[ok], right[ok], pa[ok], pb[ok]
    den = np.sqrt((pa * (1.0 - pa)) * (pb * (1.0 - pb)))
    centred = ind.astype(np.float64) - marg
    lead = centred[: T - lag][:, left]
    trail = centred[lag:][:, right]
    rows = lead * trail / den
    return SummandMatrix(rows, cells, lag, T)


def estimate_omega(s, bandwidth=0):
    """Lag-window long-run covariance of the summand rows, projected to PSD.

    ``Gamma_0 + sum_{r=1..h} (1 - r/(h+1)) (Gamma_r + Gamma_r^T)`` with
    mean-centred autocovariances normalized by the row count; negative
    eigenvalues are clamped to zero.
    """
    rows = s.rows if isinstance(s, SummandMatrix) else np.asarray(s, dtype=np.float64)
    n, d = rows.shape
    if n < MIN_OMEGA_ROWS:
        raise ValidationError(f"only {n} summand rows; need at least {MIN_OMEGA_ROWS}")
    h = int(bandwidth)
    if h < 0:
        raise ValidationError("bandwidth must be nonnegative")
    if d == 0:
        return np.zeros((0, 0))
    z = rows - rows.mean(axis=0)
    omega = z.T @ z / n
    for r in range(1, min(h, n - 1) + 1):
        gam = z[r:].T @ z[:-r] / n
        omega += (1.0 - r / (h + 1.0)) * (gam + gam.T)
    omega = 0.5 * (omega + omega.T)
    w, v = np.linalg.eigh(omega)
    if w.size and w[0] < 0.0:
        w = np.clip(w, 0.0, None)
        omega = (v * w) @ v.T
        omega = 0.5 * (omega + omega.T)
    return omega


def eigenvalues(omega):
    """Spectrum of a symmetric matrix, negatives clamped to 0, descending."""
    a = np.asarray(omega, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {a.shape}")
    if a.size == 0:
        return np.zeros(0)
    scale = max(1.0, float(np.max(np.abs(a))))
    if np.max(np.abs(a - a.T)) > 1e-10 * scale:
        raise ValidationError("matrix is not symmetric")
    w = np.linalg.eigvalsh(a)
    return np.clip(w, 0.0, None)[::-1].copy()


def _mc_block(lam, size, seed, block):
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(block,))))
    y = rng.standard_normal((size, lam.size))
    y *= y
    return y @ lam


def mc_null_sample(lambdas, M=DEFAULT_M, seed=0, workers=1):
    """``M`` draws of ``sum_j lambda_j Y_j^2`` with iid standard normal ``Y``, sorted.

    Draws come in blocks of ``MC_BLOCK``, block ``b`` from a Philox stream
    keyed by ``(seed, b)``; the result is identical for any ``workers``.
    """
    lam = np.ascontiguousarray(lambdas, dtype=np.float64).ravel()
    if np.any(lam < 0):
        raise ValidationError("weights must be nonnegative")
    M = int(M)
    if M < 1:
        raise ValidationError("M must be positive")
    if lam.size == 0 or not np.any(lam > 0):
        return np.zeros(M)
    sizes = [min(MC_BLOCK, M - start) for start in range(0, M, MC_BLOCK)]
    jobs = [(lam, size, seed, b) for b, size in enumerate(sizes)]
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda job: _mc_block(*job), jobs))
    else:
        parts = [_mc_block(*job) for job in jobs]
    q = np.concatenate(parts)
    q.sort()
    return q


def mc_p_value(statistic, null_sample):
    """``(1 + #{Q >= statistic}) / (M + 1)`` for a sorted null sample."""
    M = null_sample.size
    exceed = M - np.searchsorted(null_sample, statistic, side="left")
    return (1.0 + exceed) / (M + 1.0)


def mc_critical_value(null_sample, alpha):
    """Empirical ``1 - alpha`` quantile: the ``ceil((1 - alpha) M)``-th order statistic."""
    M = null_sample.size
    k = min(M, max(1, math.ceil((1.0 - alpha) * M - 1e-9)))
    return float(null_sample[k - 1])


def _resolve_bandwidth(bandwidth, T):
    if bandwidth is None or bandwidth == "auto":
        return default_bandwidth(T)
    h = int(bandwidth)
    if h < 0:
        raise ValidationError("bandwidth must be nonnegative")
    return h


def omnibus_test(m, lag=1, grid=None, alphas=(0.05,), M=DEFAULT_M, seed=0, bandwidth=DEFAULT_BANDWIDTH,
                 workers=1):
    """Omnibus FQA white-noise test at a single lag.

    Parameters
    ----------
    m : CurveMatrix
        The functional time series, one curve per row.
    lag : int
        Lag ``l`` with ``1 <= l <= T - 2``.
    grid : FqaGrid, optional
        Defaults to the reduced grid on levels 0.05, 0.10, ..., 0.95.
    alphas : sequence of float
        Levels for which critical values are reported.
    M : int
        Monte Carlo size of the weighted chi-square null sample.
    seed : int
        Seed of the null sample.
    bandwidth : int or "auto"
        Bartlett lag-window half-width ``h``; ``"auto"`` is ``floor(T ** (1/3))``.
        The default 0 uses the lag-0 summand covariance only.

    Returns
    -------
    TestResult
    """
    start = time.perf_counter()
    m = validate(m if isinstance(m, CurveMatrix) else CurveMatrix(m))
    grid = FqaGrid() if grid is None else grid
    T = m.T
    if int(lag) != lag or not 1 <= lag <= T - 2:
        raise ValidationError(f"lag {lag} out of range 1..{T - 2} for T={T}")
    lag = int(lag)
    h = _resolve_bandwidth(bandwidth, T)

    table = excursion_table(m, quantile_curves(m, grid.levels))
    v = fqa_vector(table, grid, lag)
    if v.masked_cells == v.values.size:
        raise DegenerateCellError(
            f"all {v.values.size} FQA cells are degenerate (masked); nothing to test"
        )
    statistic = omnibus_stat(v, scaled=True)
    s = indicator_summands(table, grid, lag)
    lam = eigenvalues(estimate_omega(s, h))
    null = NullSpec(lam, int(M), int(seed), h)
    # eigenvalues at rounding level contribute nothing to the null law
    weights = lam[lam > 1e-12 * lam[0]] if lam.size and lam[0] > 0 else lam[:0]
    q = mc_null_sample(weights, M, seed, workers=workers)
    p_value = mc_p_value(statistic, q)
    crit = {_alpha_key(a): mc_critical_value(q, a) for a in alphas}
    return TestResult(
        statistic=float(statistic),
        lag=lag,
        p_value=float(p_value),
        critical_values=crit,
        masked_cells=v.masked_cells,
        null_spec=null,
        T=T,
        runtime_seconds=time.perf_counter() - start,
    )


def fixed_cell_test(m, params, alpha=0.05, sigma_mode="null"):
    """Asymptotic z-test and confidence interval for one FQA cell.

    ``sigma_mode="null"`` uses the unit asymptotic standard deviation that
    holds under serial independence; ``"plugin"`` uses the sample standard
    deviation of the cell's summand series.
    """
    if sigma_mode not in ("null", "plugin"):
        raise ValidationError(f"unknown sigma_mode {sigma_mode!r}")
    if not 0.0 < alpha < 1.0:
        raise ValidationError("alpha must lie in (0, 1)")
    m = validate(m if isinstance(m, CurveMatrix) else CurveMatrix(m))
    T = m.T
    levels = sorted({params.tau, params.tau_prime})
    table = excursion_table(m, quantile_curves(m, levels))
    rho = fqa_hat(table, params)
    if sigma_mode == "null":
        sigma = 1.0
    else:
        grid = FqaGrid(levels=levels, thresholds=sorted({params.beta, params.beta_prime}), reduced=False)
        s = indicator_summands(table, grid, params.lag)
        key = (
            grid.levels.index(params.tau),
            grid.levels.index(params.tau_prime),
            grid.thresholds.index(params.beta),
            grid.thresholds.index(params.beta_prime),
        )
        sigma = float(np.std(s.rows[:, s.cells.index(key)], ddof=1))
        if sigma == 0.0:
            raise DegenerateCellError("summand series has zero variance")
    z = math.sqrt(T) * rho / sigma
    p_value = float(2.0 * stats.norm.sf(abs(z)))
    half = stats.norm.ppf(1.0 - alpha / 2.0) * sigma / math.sqrt(T)
    return FixedCellResult(rho, z, p_value, (rho - half, rho + half), sigma, alpha, T, sigma_mode)
