"""Size and power experiments, real-data multi-lag testing and timing.

Replicate ``r`` at sweep point ``s`` draws its data and its Monte Carlo null
from seeds derived only from ``(base_seed, s, r)``, so results do not depend
on the number of workers or on the order in which replicates finish.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .core import CurveMatrix, ValidationError, load_csv, log_returns
from .dgp import ALT_KINDS, NULL_KINDS, Contamination, ScenarioSpec, generate
from .fqa import FqaGrid
from .inference import DEFAULT_BANDWIDTH, DEFAULT_M, omnibus_test

logger = logging.getLogger(__name__)

REPORT_FORMAT_VERSION = 1
SWEEPABLE = ("c", "C", "T")


def derive_seeds(base_seed, sweep_index, replicate):
    """(data seed, null-sample seed) for one replicate."""
    ss = np.random.SeedSequence([int(base_seed), int(sweep_index), int(replicate)])
    a, b = ss.generate_state(2, dtype=np.uint64)
    return int(a), int(b)


@dataclass(frozen=True)
class ExperimentSpec:
    scenario: ScenarioSpec
    replicates: int = 500
    alphas: tuple = (0.05,)
    lag: int = 1
    grid: FqaGrid = field(default_factory=FqaGrid)
    M: int = DEFAULT_M
    base_seed: int = 0
    parallelism: int = 1
    param_sweep: tuple | None = None  # (name, values)
    bandwidth: object = DEFAULT_BANDWIDTH

    def __post_init__(self):
        if self.replicates < 1:
            raise ValidationError("need at least one replicate")
        if self.param_sweep is not None:
            name, values = self.param_sweep
            if name not in SWEEPABLE:
                raise ValidationError(f"cannot sweep {name!r}; choose from {SWEEPABLE}")
            object.__setattr__(self, "param_sweep", (name, tuple(values)))
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))

    def sweep_points(self):
        if self.param_sweep is None:
            return [(None, None)]
        name, values = self.param_sweep
        return [(name, v) for v in values]

    def to_dict(self):
        d = {
            "scenario": self.scenario.to_dict(),
            "replicates": self.replicates,
            "alphas": list(self.alphas),
            "lag": self.lag,
            "grid": self.grid.to_dict(),
            "M": self.M,
            "base_seed": self.base_seed,
            "bandwidth": self.bandwidth,
            "param_sweep": None,
        }
        if self.param_sweep is not None:
            d["param_sweep"] = {"name": self.param_sweep[0], "values": list(self.param_sweep[1])}
        return d


@dataclass
class ConfigResult:
    """Rejection tallies for one sweep point."""

    sweep_name: str | None
    sweep_value: float | None
    replicates: int
    rejections: dict
    p_values: list
    mean_runtime: float

    def rate(self, alpha):
        return self.rejections[_akey(alpha)] / self.replicates

    def se(self, alpha):
        r = self.rate(alpha)
        return math.sqrt(r * (1.0 - r) / self.replicates)


@dataclass
class ExperimentReport:
    spec: ExperimentSpec
    configs: list
    format_version: int = REPORT_FORMAT_VERSION

    def rows(self):
        out = []
        for cfg in self.configs:
            for a in self.spec.alphas:
                out.append({
                    "scenario": self.spec.scenario.kind,
                    "noise": self.spec.scenario.noise if self.spec.scenario.kind in ALT_KINDS else "",
                    "sweep": cfg.sweep_name or "",
                    "value": "" if cfg.sweep_value is None else f"{cfg.sweep_value:g}",
                    "T": self._T(cfg),
                    "alpha": f"{a:g}",
                    "N": cfg.replicates,
                    "rejections": cfg.rejections[_akey(a)],
                    "rate": f"{cfg.rate(a):.6f}",
                    "se": f"{cfg.se(a):.6f}",
                })
        return out

    def _T(self, cfg):
        return int(cfg.sweep_value) if cfg.sweep_name == "T" else self.spec.scenario.T

    def to_csv(self):
        """Deterministic table; runtimes are left out so reruns are byte-identical."""
        rows = self.rows()
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        return buf.getvalue()

    def to_dict(self, include_runtime=True):
        d = {
            "format_version": self.format_version,
            "spec": self.spec.to_dict(),
            "results": self.rows(),
        }
        if include_runtime:
            d["mean_runtime_seconds"] = [
                {"value": cfg.sweep_value, "seconds": cfg.mean_runtime} for cfg in self.configs
            ]
        return d

    def to_json(self, include_runtime=True):
        return json.dumps(self.to_dict(include_runtime), indent=2, sort_keys=True)

    def gnuplot(self, alpha):
        """Two-column ``value rate`` data for one power curve."""
        lines = [f"# {self.spec.scenario.kind} alpha={alpha:g} sweep={self.configs[0].sweep_name}"]
        for cfg in self.configs:
            lines.append(f"{cfg.sweep_value:g} {cfg.rate(alpha):.6f}")
        return "\n".join(lines) + "\n"


def _akey(alpha):
    return f"{float(alpha):g}"


def _replicate(job):
    scenario, lag, grid, alphas, M, bandwidth, data_seed, null_seed = job
    m = generate(scenario.replace(seed=data_seed))
    res = omnibus_test(m, lag=lag, grid=grid, alphas=alphas, M=M, seed=null_seed, bandwidth=bandwidth)
    return res.p_value, tuple(res.reject(a) for a in alphas), res.runtime_seconds


def _scenario_at(spec, name, value):
    if name is None:
        return spec.scenario
    if name == "T":
        return spec.scenario.replace(T=int(value))
    return spec.scenario.replace(**{name: float(value)})


def _run(spec):
    jobs, index = [], []
    for s, (name, value) in enumerate(spec.sweep_points()):
        scen = _scenario_at(spec, name, value)
        for r in range(spec.replicates):
            data_seed, null_seed = derive_seeds(spec.base_seed, s, r)
            jobs.append((scen, spec.lag, spec.grid, spec.alphas, spec.M, spec.bandwidth, data_seed, null_seed))
            index.append(s)
    if spec.parallelism > 1:
        with ProcessPoolExecutor(max_workers=spec.parallelism) as pool:
            outcomes = list(pool.map(_replicate, jobs, chunksize=max(1, len(jobs) // (8 * spec.parallelism))))
    else:
        outcomes = [_replicate(job) for job in jobs]

    configs = []
    for s, (name, value) in enumerate(spec.sweep_points()):
        mine = [o for o, k in zip(outcomes, index) if k == s]
        rejections = {
            _akey(a): int(sum(o[1][i] for o in mine)) for i, a in enumerate(spec.alphas)
        }
        configs.append(ConfigResult(
            sweep_name=name,
            sweep_value=None if value is None else float(value),
            replicates=len(mine),
            rejections=rejections,
            p_values=[o[0] for o in mine],
            mean_runtime=float(np.mean([o[2] for o in mine])),
        ))
        logger.info("%s %s=%s: %s", spec.scenario.kind, name, value, rejections)
    return ExperimentReport(spec, configs)


def run_size(spec):
    """Empirical rejection rates of the omnibus test on white-noise scenarios."""
    if spec.scenario.kind not in NULL_KINDS:
        warnings.warn(
            f"size run on {spec.scenario.kind!r}, which is not a white-noise scenario",
            stacklevel=2,
        )
    return _run(spec)


def run_power(spec):
    """Rejection rates along a parameter sweep of a FAR(1) or TFAR(1) scenario."""
    if spec.scenario.kind not in ALT_KINDS:
        raise ValidationError(f"power runs need one of {ALT_KINDS}, got {spec.scenario.kind!r}")
    if spec.param_sweep is None:
        name = "c" if spec.scenario.kind == "far1" else "C"
        spec = ExperimentSpec(**{**_fields(spec), "param_sweep": (name, (getattr(spec.scenario, name),))})
    name, values = spec.param_sweep
    # validate every sweep point up front
    for v in values:
        _scenario_at(spec, name, v)
    return _run(spec)


def _fields(spec):
    return {f: getattr(spec, f) for f in spec.__dataclass_fields__}


def shuffle_series(m, seed=None):
    """Randomly permute the order of the curves."""
    vals = m.values if isinstance(m, CurveMatrix) else np.asarray(m)
    perm = np.random.default_rng(seed).permutation(vals.shape[0])
    out = vals[perm]
    return CurveMatrix(out) if isinstance(m, CurveMatrix) else out


def run_data_test(path, lags=range(1, 11), grid=None, alphas=(0.05,), M=DEFAULT_M, seed=0,
                  bandwidth=DEFAULT_BANDWIDTH, use_log_returns=False, has_header=False):
    """Omnibus test of a CSV series at each requested lag."""
    m = load_csv(path, has_header=has_header)
    if use_log_returns:
        m = log_returns(m)
    results = []
    for lag in lags:
        if lag >= m.T - 1:
            raise ValidationError(f"lag {lag} too large for T={m.T} (need lag <= T - 2)")
        results.append(omnibus_test(m, lag=lag, grid=grid, alphas=alphas, M=M, seed=seed, bandwidth=bandwidth))
    return results


def format_results_table(results):
    alphas = list(results[0].critical_values) if results else []
    head = f"{'lag':>4} {'T*S':>12} {'p-value':>8}" + "".join(f" {'c(' + a + ')':>12}" for a in alphas)
    lines = [head]
    for r in results:
        crit = "".join(f" {r.critical_values[a]:12.3f}" for a in alphas)
        lines.append(f"{r.lag:>4} {r.statistic:12.3f} {r.p_value:8.3f}{crit}")
    return "\n".join(lines)


@dataclass(frozen=True)
class RuntimeSummary:
    mean: float
    minimum: float
    maximum: float
    replicates: int
    T: int
    p: int

    def to_dict(self):
        return asdict(self)


def time_pipeline(spec, replicates=None):
    """Wall-clock seconds per omnibus test; data generation is not timed."""
    n = spec.replicates if replicates is None else replicates
    times = []
    for r in range(n):
        data_seed, null_seed = derive_seeds(spec.base_seed, 0, r)
        m = generate(spec.scenario.replace(seed=data_seed))
        start = time.perf_counter()
        omnibus_test(m, lag=spec.lag, grid=spec.grid, alphas=spec.alphas, M=spec.M,
                     seed=null_seed, bandwidth=spec.bandwidth)
        times.append(time.perf_counter() - start)
    return RuntimeSummary(float(np.mean(times)), float(np.min(times)), float(np.max(times)),
                          n, spec.scenario.T, spec.scenario.p)


__all__ = [
    "Contamination",
    "ExperimentReport",
    "ExperimentSpec",
    "derive_seeds",
    "format_results_table",
    "run_data_test",
    "run_power",
    "run_size",
    "shuffle_series",
    "time_pipeline",
]
