"""numpy implementations of the gather kernels, used when the extension is absent.

Results are bit-identical to the compiled serial kernels: ``np.bincount``
accumulates weights in input order, which is predecessor order here.
"""
import numpy as np


def _rows(indptr):
    return np.repeat(np.arange(len(indptr) - 1, dtype=np.int64), np.diff(indptr))


def pull_sum(indptr, indices, x, rows=None, threads=1):
    if rows is None:
        rows = _rows(indptr)
    n = len(indptr) - 1
    return np.bincount(rows, weights=np.asarray(x)[indices], minlength=n).astype(np.float64, copy=False)


def pagerank_sweep(indptr, indices, inv_out, p, base, damp, rows=None, threads=1):
    s = pull_sum(indptr, indices, np.asarray(p) * np.asarray(inv_out), rows=rows)
    return base + damp * s


def max_relative_change(new, old, floor=1e-300):
    new = np.asarray(new)
    a = np.abs(new)
    mask = a > floor
    if not mask.any():
        return 0.0
    return float(np.max(np.abs(new[mask] - np.asarray(old)[mask]) / a[mask]))
