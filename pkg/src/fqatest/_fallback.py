"""Numpy implementations of the counting kernels (used when the extension is absent)."""

import numpy as np

# caps the T x P x p boolean temporary at roughly 32 MB
_CHUNK_CELLS = 1 << 25


def excursion_counts(values, qcurves):
    """Count, for every curve and level, the grid points at or below the quantile curve."""
    values = np.ascontiguousarray(values, dtype=np.float64)
    qcurves = np.ascontiguousarray(qcurves, dtype=np.float64)
    T, p = values.shape
    P = qcurves.shape[0]
    if qcurves.shape[1] != p:
        raise ValueError("grid size mismatch between curves and quantile curves")
    out = np.empty((T, P), dtype=np.int64)
    step = max(1, _CHUNK_CELLS // max(1, P * p))
    for start in range(0, T, step):
        block = values[start:start + step]
        out[start:start + step] = (block[:, None, :] <= qcurves[None, :, :]).sum(axis=2)
    return out


def lagged_joint_counts(indicators, lag):
    """C[a, b] = #{t : indicators[t, a] and indicators[t + lag, b]}."""
    ind = np.asarray(indicators)
    T = ind.shape[0]
    if lag < 0 or lag >= T:
        raise ValueError("lag out of range")
    lead = ind[: T - lag].astype(np.int64)
    trail = ind[lag:].astype(np.int64)
    return lead.T @ trail
