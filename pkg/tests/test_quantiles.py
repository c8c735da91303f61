import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

import oracle
from conftest import F1, F1_LEVELS
from fqatest import ValidationError, ecdf_at, excursion_fraction, excursion_table, quantile_curves
from fqatest.dgp import gen_brownian


@pytest.mark.parametrize("x, expected", [(2, 2 / 3), (0, 0.0), (3, 1.0)])
def test_ecdf(x, expected):
    assert ecdf_at([1, 2, 3], x) == expected


def test_ecdf_empty():
    with pytest.raises(ValidationError):
        ecdf_at([], 0.0)


@pytest.mark.parametrize("tau, expected", [(0.5, 2), (0.25, 1), (0.95, 4)])
def test_quantile_order_statistic(tau, expected):
    col = np.array([[3.0], [1.0], [4.0], [2.0]])
    q = quantile_curves(np.hstack([col, col]), [tau])
    assert q.curves[0, 0] == expected


@pytest.mark.parametrize("levels", [[0.0, 0.5], [0.5, 1.0], [0.6, 0.4], [0.5, 0.5]])
def test_quantile_level_validation(levels):
    with pytest.raises(ValidationError):
        quantile_curves(np.zeros((4, 3)), levels)


def test_quantile_decimal_levels_hit_exact_order_statistic():
    # 0.15 * 200 is 30.000000000000004 in floating point; the 30th value is intended
    col = np.arange(1.0, 201.0)
    q = quantile_curves(np.column_stack([col, col]), [0.15, 0.35, 0.55])
    np.testing.assert_array_equal(q.curves[:, 0], [30, 70, 110])


@pytest.mark.parametrize(
    "curve, qcurve, expected",
    [([0, 0, 0], [1, 1, 1], 1.0), ([2, 2, 2], [1, 1, 1], 0.0), ([1, 2, 3], [1, 2, 3], 1.0), ([0, 5], [1, 1], 0.5)],
)
def test_excursion_fraction(curve, qcurve, expected):
    assert excursion_fraction(curve, qcurve) == expected


def test_excursion_fraction_length_mismatch():
    with pytest.raises(ValidationError):
        excursion_fraction([1, 2], [1, 2, 3])


def test_single_curve_equal_to_its_median():
    curve = np.array([[0.3, -1.0, 2.0]])
    q = quantile_curves(curve, [0.5])
    assert excursion_table(curve, q).fractions[0, 0] == 1.0


def test_excursion_table_f1_frozen(f1):
    table = excursion_table(f1, quantile_curves(f1, F1_LEVELS))
    # frozen from the rational brute-force oracle in tests/oracle.py
    expected = np.array([[2, 3], [1, 2], [1, 2], [0, 3], [0, 0], [2, 3]]) / 3
    np.testing.assert_array_equal(table.fractions, expected)
    for i, tau in enumerate(F1_LEVELS):
        assert [float(f) for f in oracle.excursion_fractions(F1, tau)] == table.fractions[:, i].tolist()


def test_excursion_table_grid_mismatch(f1):
    q = quantile_curves(np.zeros((4, 5)), [0.5])
    with pytest.raises(ValidationError, match="grid-size mismatch"):
        excursion_table(f1, q)


matrices = arrays(np.float64, st.tuples(st.integers(1, 12), st.integers(1, 6)),
                  elements=st.integers(-4, 4).map(float))
level_sets = st.lists(st.sampled_from([0.05, 0.1, 0.25, 1 / 3, 0.5, 2 / 3, 0.75, 0.9, 0.95]),
                      min_size=1, max_size=4, unique=True).map(sorted)


@settings(max_examples=100, deadline=None)
@given(matrices, level_sets)
def test_quantiles_match_oracle_and_are_data_values(vals, levels):
    q = quantile_curves(vals, levels)
    rows = vals.tolist()
    for i, tau in enumerate(levels):
        assert q.curves[i].tolist() == oracle.quantile_curve(rows, tau)
    for j in range(vals.shape[1]):
        assert set(q.curves[:, j]).issubset(set(vals[:, j]))
    assert np.all(np.diff(q.curves, axis=0) >= 0)


@settings(max_examples=100, deadline=None)
@given(matrices, level_sets)
def test_excursion_table_properties(vals, levels):
    table = excursion_table(vals, quantile_curves(vals, levels))
    p = vals.shape[1]
    assert np.array_equal(table.fractions * p, np.round(table.fractions * p))
    assert np.all(np.diff(table.fractions, axis=1) >= 0)


def test_mean_fraction_converges_to_level():
    T, p, reps = 200, 200, 20
    levels = [0.1, 0.5, 0.9]
    rng = np.random.default_rng(7)
    means = np.mean([
        excursion_table(x, quantile_curves(x, levels)).fractions.mean(axis=0)
        for x in (rng.standard_normal((T, p)) for _ in range(reps))
    ], axis=0)
    # generalized-inverse quantile puts ceil(tau T) of T values at or below
    target = np.ceil(np.array(levels) * T) / T
    se = np.sqrt(target * (1 - target) / (T * p * reps))
    assert np.all(np.abs(means - target) <= 3 * se + 1e-12)
    assert np.all(np.abs(means - levels) <= 3 * se + 1 / T)


def smooth_fixtures():
    """Fixed smooth curves and quantile curves as functions on [0, 1]."""
    return [
        (lambda u: np.sin(2 * np.pi * u), lambda u: 0.2 + 0.0 * u),
        (lambda u: u**2, lambda u: 0.5 * u),
        (lambda u: np.cos(3 * u) * np.exp(-u), lambda u: 0.3 * np.sin(5 * u)),
        (lambda u: np.exp(u) - 1.5, lambda u: np.log1p(u) - 0.2),
    ]


def excursion_on_grid(f, g, p):
    u = np.linspace(0.0, 1.0, p)
    return excursion_fraction(f(u), g(u))


@pytest.mark.parametrize("f, g", smooth_fixtures())
def test_grid_density_convergence(f, g):
    assert abs(excursion_on_grid(f, g, 100) - excursion_on_grid(f, g, 5000)) <= 0.02


def test_excursion_counts_on_brownian_bounded(rng):
    m = gen_brownian(50, 40, rng)
    t = excursion_table(m, quantile_curves(m, [0.2, 0.8]))
    assert t.counts.min() >= 0 and t.counts.max() <= 40
