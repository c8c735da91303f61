"""Backend selection for the counting kernels.

The compiled extension is preferred; setting ``FQATEST_PURE_PYTHON=1`` or
building without Cython selects the numpy fallback.
"""

import os

import numpy as np

from . import _fallback

BACKEND = "python"
_impl = _fallback

if not os.environ.get("FQATEST_PURE_PYTHON"):
    try:
        from . import _kernels as _impl
    except ImportError:  # extension not built
        _impl = _fallback
    else:
        BACKEND = "cython"


def excursion_counts(values, qcurves):
    """Integer matrix (T, P) of #{j : values[t, j] <= qcurves[i, j]}."""
    return _impl.excursion_counts(
        np.ascontiguousarray(values, dtype=np.float64),
        np.ascontiguousarray(qcurves, dtype=np.float64),
    )


def lagged_joint_counts(indicators, lag):
    """Integer matrix (K, K) of lag-``lag`` co-occurrence counts of 0/1 columns."""
    return _impl.lagged_joint_counts(
        np.ascontiguousarray(indicators, dtype=np.uint8), int(lag)
    )


__all__ = ["BACKEND", "excursion_counts", "lagged_joint_counts"]
