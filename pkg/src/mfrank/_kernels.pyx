# cython: language_level=3
"""Compiled gather kernels over the reverse (predecessor) adjacency."""
import numpy as np

cimport cython
from cython.parallel cimport prange
from libc.stdint cimport int64_t


def pull_sum(const int64_t[::1] indptr, const int64_t[::1] indices,
             const double[::1] x, rows=None, int threads=1):
    """out[i] = sum of x[j] over predecessors j of i, in predecessor order."""
    cdef Py_ssize_t n = indptr.shape[0] - 1
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i
    cdef int64_t e
    cdef double acc
    if threads > 1:
        for i in prange(n, nogil=True, num_threads=threads, schedule="static"):
            acc = 0.0
            for e in range(indptr[i], indptr[i + 1]):
                acc = acc + x[indices[e]]
            out[i] = acc
    else:
        with nogil:
            for i in range(n):
                acc = 0.0
                for e in range(indptr[i], indptr[i + 1]):
                    acc = acc + x[indices[e]]
                out[i] = acc
    return out_arr


def pagerank_sweep(const int64_t[::1] indptr, const int64_t[::1] indices,
                   const double[::1] inv_out, const double[::1] p,
                   double base, double damp, rows=None, int threads=1):
    """One Markov update: base + damp * sum_j p[j] / k_out(j) over predecessors."""
    cdef Py_ssize_t n = indptr.shape[0] - 1
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i
    cdef int64_t e, j
    cdef double acc
    if threads > 1:
        for i in prange(n, nogil=True, num_threads=threads, schedule="static"):
            acc = 0.0
            for e in range(indptr[i], indptr[i + 1]):
                j = indices[e]
                acc = acc + p[j] * inv_out[j]
            out[i] = base + damp * acc
    else:
        with nogil:
            for i in range(n):
                acc = 0.0
                for e in range(indptr[i], indptr[i + 1]):
                    j = indices[e]
                    acc = acc + p[j] * inv_out[j]
                out[i] = base + damp * acc
    return out_arr


def max_relative_change(const double[::1] new, const double[::1] old, double floor=1e-300):
    """max |new - old| / |new| over entries with |new| > floor."""
    cdef Py_ssize_t i, n = new.shape[0]
    cdef double worst = 0.0, d, a
    with nogil:
        for i in range(n):
            a = new[i] if new[i] >= 0 else -new[i]
            if a <= floor:
                continue
            d = new[i] - old[i]
            if d < 0:
                d = -d
            d = d / a
            if d > worst:
                worst = d
    return worst
