import json
import math
import warnings

import numpy as np
import pytest

from fqatest import DegenerateCellError, ValidationError, save_csv
from fqatest.dgp import Contamination, ScenarioSpec, generate
from fqatest.fqa import FqaGrid
from fqatest.harness import (
    ExperimentSpec,
    derive_seeds,
    format_results_table,
    run_data_test,
    run_power,
    run_size,
    shuffle_series,
    time_pipeline,
)
from fqatest.inference import omnibus_test

SMALL = dict(T=60, p=40)


def small_spec(kind="gaussian_wn", **kw):
    scen = ScenarioSpec(kind, **SMALL, **{k: kw.pop(k) for k in ("c", "C", "noise") if k in kw})
    kw.setdefault("M", 2000)
    return ExperimentSpec(scen, **kw)


def test_seeds_are_stable_and_distinct():
    assert derive_seeds(0, 0, 0) == derive_seeds(0, 0, 0)
    seen = {derive_seeds(b, s, r) for b in range(3) for s in range(3) for r in range(20)}
    assert len(seen) == 180


def test_single_replicate_report():
    rep = run_size(small_spec(replicates=1, alphas=(0.05, 0.5)))
    cfg = rep.configs[0]
    for a in (0.05, 0.5):
        assert cfg.rate(a) in (0.0, 1.0)
        assert cfg.se(a) == 0.0


def test_report_identities():
    rep = run_size(small_spec(replicates=12, alphas=(0.1, 0.5)))
    for row, (cfg, a) in zip(rep.rows(), [(c, a) for c in rep.configs for a in (0.1, 0.5)]):
        r = cfg.rejections[f"{a:g}"] / cfg.replicates
        assert row["rate"] == f"{r:.6f}"
        assert row["se"] == f"{math.sqrt(r * (1 - r) / cfg.replicates):.6f}"
        assert row["N"] == 12
    # p-values reproduce the tallies
    cfg = rep.configs[0]
    assert len(cfg.p_values) == 12


def test_replicate_matches_direct_call():
    spec = small_spec(replicates=3, base_seed=9)
    rep = run_size(spec)
    data_seed, null_seed = derive_seeds(9, 0, 2)
    m = generate(spec.scenario.replace(seed=data_seed))
    direct = omnibus_test(m, M=2000, seed=null_seed)
    assert rep.configs[0].p_values[2] == direct.p_value


def test_report_deterministic_and_parallel_invariant():
    a = run_size(small_spec(replicates=16, base_seed=3))
    b = run_size(small_spec(replicates=16, base_seed=3))
    c = run_size(small_spec(replicates=16, base_seed=3, parallelism=8))
    assert a.to_csv() == b.to_csv() == c.to_csv()
    assert a.to_json(include_runtime=False) == c.to_json(include_runtime=False)
    assert a.configs[0].p_values == c.configs[0].p_values


def test_seed_isolation():
    # replicate r's outcome depends only on its own derived seeds
    a = run_size(small_spec(replicates=5, base_seed=4))
    b = run_size(small_spec(replicates=8, base_seed=4))
    assert a.configs[0].p_values == b.configs[0].p_values[:5]


def test_size_warns_on_alternative():
    with pytest.warns(UserWarning, match="not a white-noise"):
        run_size(small_spec("far1", c=0.3, replicates=1))


def test_power_sweep_and_gnuplot():
    spec = small_spec("far1", c=0.0, noise="gaussian", replicates=4, param_sweep=("c", [0.0, 0.6]))
    rep = run_power(spec)
    assert [c.sweep_value for c in rep.configs] == [0.0, 0.6]
    lines = rep.gnuplot(0.05).splitlines()
    assert lines[0].startswith("#") and lines[1].startswith("0 ") and lines[2].startswith("0.6 ")
    d = json.loads(rep.to_json())
    assert d["format_version"] == 1 and d["spec"]["param_sweep"]["name"] == "c"


def test_power_sweep_over_T():
    spec = small_spec("far1", c=0.3, replicates=2, param_sweep=("T", [30, 60]))
    rows = run_power(spec).rows()
    assert [r["T"] for r in rows] == [30, 60]


def test_power_validation():
    with pytest.raises(ValidationError):
        run_power(small_spec("brownian", replicates=2))
    with pytest.raises(ValidationError):
        run_power(small_spec("far1", replicates=2, param_sweep=("c", [0.2, 1.5])))
    with pytest.raises(ValidationError):
        small_spec("far1", replicates=2, param_sweep=("p", [10]))
    with pytest.raises(ValidationError):
        small_spec(replicates=0)


def test_shuffle():
    x = np.arange(12.0).reshape(1, 12)
    np.testing.assert_array_equal(shuffle_series(x, seed=1), x)
    m = generate(ScenarioSpec("far1", T=50, p=10, c=0.5, seed=2))
    s = shuffle_series(m, seed=3)
    assert s != m
    assert sorted(map(tuple, s.values)) == sorted(map(tuple, m.values))


@pytest.mark.slow
def test_shuffle_destroys_dependence():
    rejections = 0
    for r in range(2000):
        m = generate(ScenarioSpec("far1", T=200, p=100, c=0.6, seed=40000 + r))
        rejections += omnibus_test(shuffle_series(m, seed=r), seed=r).reject(0.05)
    assert 0.035 <= rejections / 2000 <= 0.065


def test_data_test_lags(tmp_path):
    path = tmp_path / "wn.csv"
    save_csv(generate(ScenarioSpec("gaussian_wn", T=150, p=50, seed=5)), path)
    res = run_data_test(path, lags=range(1, 11), M=2000)
    assert [r.lag for r in res] == list(range(1, 11))
    assert all(r.p_value > 0.001 for r in res)
    table = format_results_table(res)
    assert len(table.splitlines()) == 11


def test_data_test_strong_dependence_displays_zero(tmp_path):
    path = tmp_path / "far.csv"
    save_csv(generate(ScenarioSpec("far1", T=200, p=100, c=0.6, seed=6)), path)
    res = run_data_test(path, lags=[1], M=10000)
    assert res[0].p_value < 0.0005
    assert format_results_table(res).splitlines()[1].split()[2] == "0.000"


def test_data_test_errors(tmp_path):
    path = tmp_path / "prices.csv"
    path.write_text("\n".join(",".join(["5.0"] * 6) for _ in range(30)) + "\n")
    with pytest.raises(DegenerateCellError, match="masked"):
        run_data_test(path, lags=[1], use_log_returns=True)
    with pytest.raises(ValidationError):
        run_data_test(path, lags=[29])


def test_time_pipeline():
    spec = small_spec(replicates=3)
    summary = time_pipeline(spec)
    assert summary.replicates == 3 and summary.minimum <= summary.mean <= summary.maximum
    assert time_pipeline(spec, replicates=1).replicates == 1
