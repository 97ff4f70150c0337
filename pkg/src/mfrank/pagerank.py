"""Exact PageRank: power iteration with uniform dangling redistribution,
plus a dense linear solve used as an oracle on small graphs."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import EmptyGraphError, TooLargeError
from .graph import DirectedGraph

logger = logging.getLogger(__name__)

DEFAULT_Q = 0.15
EXACT_SOLVE_MAX_NODES = 2000


@dataclass(frozen=True)
class ConvergenceSpec:
    """Stop when every vertex changes by less than ``tolerance`` relative to its value."""

    tolerance: float = 1e-5
    max_iterations: int = 200

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass
class PageRankVector:
    values: np.ndarray
    q: float
    iterations: int = 0
    converged: bool = True
    history: list[float] = field(default_factory=list, repr=False)

    def __len__(self):
        return len(self.values)


def _check_q(q: float) -> None:
    if not 0.0 < q < 1.0:
        raise ValueError(f"jump probability q must lie in (0, 1), got {q}")


def markov_step(g: DirectedGraph, q: float, p: np.ndarray, threads: int = 1) -> np.ndarray:
    """Apply the random-surfer update once: jump term, link term, dangling term."""
    n = g.node_count
    dangling_mass = float(p[g.dangling].sum())
    base = q / n + (1.0 - q) * dangling_mass / n
    return kernels.pagerank_sweep(g.in_indptr, g.in_indices, g.inv_out, p, base, 1.0 - q,
                                  rows=g.in_rows, threads=threads)


def power_iteration(g: DirectedGraph, q: float = DEFAULT_Q, spec: ConvergenceSpec | None = None,
                    threads: int = 1) -> PageRankVector:
    """PageRank by iterating the Markov update from the uniform vector.

    Every iterate is renormalized to sum 1. If ``spec.max_iterations`` is
    reached first the last iterate is returned with ``converged=False``.
    """
    _check_q(q)
    spec = spec or ConvergenceSpec()
    n = g.node_count
    if n == 0:
        raise EmptyGraphError("PageRank of an empty graph")
    p = np.full(n, 1.0 / n)
    history = []
    for it in range(1, spec.max_iterations + 1):
        new = markov_step(g, q, p, threads)
        new /= new.sum()
        change = kernels.max_relative_change(new, p)
        history.append(change)
        p = new
        if change < spec.tolerance:
            return PageRankVector(p, q, it, True, history)
    logger.warning("power iteration did not reach %g in %d iterations (last change %g)",
                   spec.tolerance, spec.max_iterations, history[-1])
    return PageRankVector(p, q, spec.max_iterations, False, history)


def transition_matrix(g: DirectedGraph) -> np.ndarray:
    """Dense column-stochastic matrix M with M[i, j] = P(j -> i), dangling columns uniform."""
    n = g.node_count
    m = np.zeros((n, n))
    src, dst = g.edges()
    np.add.at(m, (dst, src), g.inv_out[src])
    m[:, g.dangling] = 1.0 / n
    return m


def exact_solve(g: DirectedGraph, q: float = DEFAULT_Q) -> PageRankVector:
    """Solve (I - (1-q) M) p = q/N directly. Refuses graphs above 2000 nodes."""
    _check_q(q)
    n = g.node_count
    if n == 0:
        raise EmptyGraphError("PageRank of an empty graph")
    if n > EXACT_SOLVE_MAX_NODES:
        raise TooLargeError(f"dense solve limited to {EXACT_SOLVE_MAX_NODES} nodes, graph has {n}")
    a = np.eye(n) - (1.0 - q) * transition_matrix(g)
    p = np.linalg.solve(a, np.full(n, q / n))
    p /= p.sum()
    return PageRankVector(p, q, 0, True)


def residual(g: DirectedGraph, q: float, v) -> float:
    """max_i |step(v)_i - v_i| / v_i; zero at the fixed point."""
    p = np.asarray(getattr(v, "values", v), dtype=np.float64)
    if len(p) != g.node_count:
        raise ValueError("vector length does not match the graph")
    new = markov_step(g, q, p)
    return float(np.max(np.abs(new - p) / p))
