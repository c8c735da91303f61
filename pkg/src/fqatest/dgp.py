"""Seeded generators for white-noise and functional autoregressive scenarios.

All generators return a :class:`~fqatest.core.CurveMatrix` on ``p`` evenly
spaced points of [0, 1] and are pure functions of their arguments and seed.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .core import CurveMatrix, EvalGrid, ValidationError

# integral of exp(-u^2) over [0, 1]: Hilbert-Schmidt norm of the unit Gaussian kernel
GAUSS_KERNEL_HS = 0.746824132812427

NULL_KINDS = ("brownian", "gaussian_wn", "t3_quadratic", "fourier_cauchy")
ALT_KINDS = ("far1", "tfar1")
NOISE_KINDS = ("gaussian", "t3", "brownian")
DEFAULT_BURN_IN = 50


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def _check_sizes(T, p):
    if int(T) != T or int(p) != p or T < 2 or p < 2:
        raise ValidationError(f"need integer T >= 2 and p >= 2, got T={T}, p={p}")
    return int(T), int(p)


def _brownian_values(T, p, rng):
    steps = rng.standard_normal((T, p - 1)) * math.sqrt(1.0 / (p - 1))
    out = np.zeros((T, p))
    np.cumsum(steps, axis=1, out=out[:, 1:])
    return out


def _noise_values(kind, T, p, rng):
    if kind == "gaussian":
        return rng.standard_normal((T, p))
    if kind == "t3":
        return rng.standard_t(3, size=(T, p))
    if kind == "brownian":
        return _brownian_values(T, p, rng)
    raise ValidationError(f"unknown noise kind {kind!r}; expected one of {NOISE_KINDS}")


def gen_brownian(T, p, seed=None):
    """Independent standard Brownian paths, each starting at 0."""
    T, p = _check_sizes(T, p)
    return CurveMatrix(_brownian_values(T, p, _rng(seed)))


def gen_gaussian_wn(T, p, seed=None):
    T, p = _check_sizes(T, p)
    return CurveMatrix(_rng(seed).standard_normal((T, p)))


def gen_t3_quadratic(T, p, seed=None):
    """``u^2`` plus iid Student-t(3) noise at every grid point."""
    T, p = _check_sizes(T, p)
    u = EvalGrid.uniform(p).points
    return CurveMatrix(u * u + _rng(seed).standard_t(3, size=(T, p)))


def fourier_cauchy_basis(p):
    """``(7, p)`` basis: constant, then cos/sin pairs at frequencies 1..3."""
    u = EvalGrid.uniform(p).points
    rows = [np.ones(p)]
    for k in range(1, 4):
        rows.append(np.cos(2.0 * np.pi * k * u))
        rows.append(np.sin(2.0 * np.pi * k * u))
    basis = np.array(rows)
    # sin(2 pi k) is ~1e-16 in floating point; pin the endpoints to exact periodicity
    basis[:, -1] = basis[:, 0]
    return basis


def gen_fourier_cauchy(T, p, seed=None, coefficients=None):
    """Rows built from 7 iid standard Cauchy coefficients on a Fourier basis.

    ``coefficients`` (shape ``(T, 7)``) overrides the random draw.
    """
    T, p = _check_sizes(T, p)
    if coefficients is None:
        coefficients = _rng(seed).standard_cauchy((T, 7))
    z = np.asarray(coefficients, dtype=np.float64).reshape(T, 7)
    basis = fourier_cauchy_basis(p)
    # term-by-term accumulation keeps identical basis columns bit-identical
    vals = np.zeros((T, p))
    for k in range(7):
        vals += z[:, k:k + 1] * basis[k]
    return CurveMatrix(vals)


def gen_noise(kind, T, p, seed=None):
    T, p = _check_sizes(T, p)
    return CurveMatrix(_noise_values(kind, T, p, _rng(seed)))


def trapezoid_weights(p):
    w = np.full(p, 1.0 / (p - 1))
    w[0] = w[-1] = 0.5 / (p - 1)
    return w


def gaussian_kernel_operator(p, c=1.0):
    """Matrix ``K`` with ``(K x)_j ~ integral of c exp(-(u_j^2 + v^2)/2) x(v) dv``.

    Quadrature is the trapezoid rule on the evaluation grid.
    """
    u = EvalGrid.uniform(p).points
    g = np.exp(-0.5 * u * u)
    return c * np.outer(g, g * trapezoid_weights(p))


def _check_far_c(c):
    if not np.isfinite(c) or abs(c) * GAUSS_KERNEL_HS >= 1.0:
        raise ValidationError(
            f"c={c} violates stationarity: |c| * {GAUSS_KERNEL_HS:.6f} must be < 1"
        )


def gen_far1(T, p, c, noise_kind="gaussian", seed=None, burn_in=DEFAULT_BURN_IN):
    """Linear FAR(1) with Gaussian kernel ``c exp(-(u^2 + v^2)/2)``.

    Started from a pure noise curve; the first ``burn_in`` curves are dropped.
    """
    T, p = _check_sizes(T, p)
    _check_far_c(c)
    rng = _rng(seed)
    n = T + int(burn_in)
    eps = _noise_values(noise_kind, n + 1, p, rng)
    x = np.empty((n + 1, p))
    x[0] = eps[0]
    if c == 0.0:
        x[1:] = eps[1:]
    else:
        # x_t = K x_{t-1} + eps_t, applied row-wise as x_{t-1} @ K^T
        kt = gaussian_kernel_operator(p, c).T
        for t in range(1, n + 1):
            x[t] = x[t - 1] @ kt + eps[t]
    return CurveMatrix(x[n + 1 - T:])


def tfar_coefficients(C, rng):
    """``c1 ~ Uniform(0, C)`` and ``c2 = c1 - C``."""
    c1 = rng.uniform(0.0, C) if C > 0 else 0.0
    return c1, c1 - C


def gen_tfar1(T, p, C, noise_kind="brownian", seed=None, burn_in=DEFAULT_BURN_IN, threshold=0.0):
    """Threshold FAR(1): kernel coefficient ``c1`` when the previous curve's
    integral is at most ``threshold``, else ``c2``.
    """
    T, p = _check_sizes(T, p)
    if not 0.0 <= C < 1.0:
        raise ValidationError(f"C={C} must lie in [0, 1)")
    rng = _rng(seed)
    c1, c2 = tfar_coefficients(C, rng)
    n = T + int(burn_in)
    eps = _noise_values(noise_kind, n + 1, p, rng)
    x = np.empty((n + 1, p))
    x[0] = eps[0]
    if C == 0.0:
        x[1:] = eps[1:]
    else:
        base = gaussian_kernel_operator(p, 1.0).T
        k1, k2 = c1 * base, c2 * base
        w = trapezoid_weights(p)
        for t in range(1, n + 1):
            prev = x[t - 1]
            op = k1 if prev @ w <= threshold else k2
            x[t] = prev @ op + eps[t]
    return CurveMatrix(x[n + 1 - T:])


def _round_half_up(x):
    return int(math.floor(x + 0.5 + 1e-9))


def contaminate(m, curve_frac=0.10, point_frac=0.10, height=10.0, seed=None):
    """Add ``+height`` spikes at randomly chosen points of randomly chosen curves.

    ``round(curve_frac * T)`` distinct curves are picked; within each,
    ``round(point_frac * p)`` distinct grid points, drawn afresh per curve.
    """
    if not (0.0 <= curve_frac <= 1.0 and 0.0 <= point_frac <= 1.0):
        raise ValidationError("contamination fractions must lie in [0, 1]")
    vals = np.array(m.values)
    T, p = vals.shape
    n_rows = _round_half_up(curve_frac * T)
    n_cols = _round_half_up(point_frac * p)
    if n_rows == 0 or n_cols == 0:
        return m
    rng = _rng(seed)
    rows = rng.choice(T, size=n_rows, replace=False)
    for r in np.sort(rows):
        cols = rng.choice(p, size=n_cols, replace=False)
        vals[r, cols] += height
    return CurveMatrix(vals)


@dataclass(frozen=True)
class Contamination:
    curve_frac: float = 0.10
    point_frac: float = 0.10
    height: float = 10.0


@dataclass(frozen=True)
class ScenarioSpec:
    """Everything needed to regenerate one simulated series."""

    kind: str
    T: int = 200
    p: int = 500
    c: float = 0.0
    C: float = 0.0
    noise: str = "gaussian"
    contamination: Contamination | None = None
    seed: int = 0
    burn_in: int = DEFAULT_BURN_IN

    def __post_init__(self):
        if self.kind not in NULL_KINDS + ALT_KINDS:
            raise ValidationError(f"unknown scenario {self.kind!r}")
        _check_sizes(self.T, self.p)
        if self.noise not in NOISE_KINDS:
            raise ValidationError(f"unknown noise kind {self.noise!r}")
        if self.kind == "far1":
            _check_far_c(self.c)
        if self.kind == "tfar1" and not 0.0 <= self.C < 1.0:
            raise ValidationError(f"C={self.C} must lie in [0, 1)")

    def replace(self, **changes):
        d = asdict(self)
        if d["contamination"] is not None:
            d["contamination"] = Contamination(**d["contamination"])
        d.update(changes)
        return ScenarioSpec(**d)

    def to_dict(self):
        return asdict(self)


def generate(spec):
    """Draw the series described by ``spec``.

    The base series and the contamination use independent child streams of
    ``spec.seed``, so clean and contaminated runs share the same base data.
    """
    base_ss, cont_ss = np.random.SeedSequence(spec.seed).spawn(2)
    rng = np.random.default_rng(base_ss)
    if spec.kind == "brownian":
        m = gen_brownian(spec.T, spec.p, rng)
    elif spec.kind == "gaussian_wn":
        m = gen_gaussian_wn(spec.T, spec.p, rng)
    elif spec.kind == "t3_quadratic":
        m = gen_t3_quadratic(spec.T, spec.p, rng)
    elif spec.kind == "fourier_cauchy":
        m = gen_fourier_cauchy(spec.T, spec.p, rng)
    elif spec.kind == "far1":
        m = gen_far1(spec.T, spec.p, spec.c, spec.noise, rng, spec.burn_in)
    else:
        m = gen_tfar1(spec.T, spec.p, spec.C, spec.noise, rng, spec.burn_in)
    if spec.contamination is not None:
        cont = spec.contamination
        m = contaminate(m, cont.curve_frac, cont.point_frac, cont.height, np.random.default_rng(cont_ss))
    return m
