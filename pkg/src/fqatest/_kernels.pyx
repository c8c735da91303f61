# cython: language_level=3
"""Compiled counting kernels.

Both kernels return exact integer counts, so results are bit-identical to
the numpy implementations in :mod:`fqatest._fallback`.
"""
import numpy as np
cimport numpy as cnp
from libc.stdint cimport int64_t, uint8_t

cnp.import_array()


def excursion_counts(const double[:, ::1] values, const double[:, ::1] qcurves):
    """Count, for every curve and level, the grid points at or below the quantile curve."""
    cdef Py_ssize_t T = values.shape[0]
    cdef Py_ssize_t p = values.shape[1]
    cdef Py_ssize_t P = qcurves.shape[0]
    if qcurves.shape[1] != p:
        raise ValueError("grid size mismatch between curves and quantile curves")
    out = np.zeros((T, P), dtype=np.int64)
    cdef int64_t[:, ::1] counts = out
    cdef Py_ssize_t t, i, j
    cdef int64_t k
    with nogil:
        for t in range(T):
            for i in range(P):
                k = 0
                for j in range(p):
                    if values[t, j] <= qcurves[i, j]:
                        k += 1
                counts[t, i] = k
    return out


def lagged_joint_counts(const uint8_t[:, ::1] indicators, Py_ssize_t lag):
    """C[a, b] = #{t : indicators[t, a] and indicators[t + lag, b]}."""
    cdef Py_ssize_t T = indicators.shape[0]
    cdef Py_ssize_t K = indicators.shape[1]
    if lag < 0 or lag >= T:
        raise ValueError("lag out of range")
    out = np.zeros((K, K), dtype=np.int64)
    cdef int64_t[:, ::1] joint = out
    cdef Py_ssize_t t, a, b
    with nogil:
        for t in range(T - lag):
            for a in range(K):
                if indicators[t, a]:
                    for b in range(K):
                        joint[a, b] += indicators[t + lag, b]
    return out
