"""Backend selection for the hot gather kernels.

The compiled extension is used when it imports; otherwise the numpy
fallback. ``set_backend`` switches explicitly (benchmarks, tests).
"""
from __future__ import annotations

import logging

from . import _pykernels

logger = logging.getLogger(__name__)

try:
    from . import _kernels as _compiled
except ImportError:  # pragma: no cover - depends on build
    _compiled = None
    logger.debug("compiled kernels unavailable; using numpy fallback")

_BACKENDS = {"python": _pykernels}
if _compiled is not None:
    _BACKENDS["compiled"] = _compiled

_active = _compiled if _compiled is not None else _pykernels


def available_backends() -> list[str]:
    return sorted(_BACKENDS)


def backend_name() -> str:
    return "compiled" if _active is _compiled and _compiled is not None else "python"


def set_backend(name: str) -> None:
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"unknown or unavailable kernel backend {name!r}; have {available_backends()}")
    _active = _BACKENDS[name]


def pull_sum(indptr, indices, x, rows=None, threads=1):
    return _active.pull_sum(indptr, indices, x, rows=rows, threads=threads)


def pagerank_sweep(indptr, indices, inv_out, p, base, damp, rows=None, threads=1):
    return _active.pagerank_sweep(indptr, indices, inv_out, p, float(base), float(damp), rows=rows, threads=threads)


def max_relative_change(new, old, floor=1e-300):
    return float(_active.max_relative_change(new, old, floor))
