"""Mean-field PageRank per degree class and its within-class fluctuations.

Class sums over predecessors are always taken over the real edges of the
graph: the average of ``pbar(k')/k'_out`` over the predecessors of the
nodes in class ``k`` replaces the conditional-degree table, which is
never built.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import EmptyGraphError, ModelInvalidError
from .graph import DegreeClassTable, DirectedGraph
from .pagerank import DEFAULT_Q, ConvergenceSpec, _check_q

logger = logging.getLogger(__name__)

# Variances below 1e-12 * pbar^2 count as zero in the convergence test.
_VARIANCE_REL_FLOOR = 1e-12


@dataclass
class MeanFieldSolution:
    """Per-class statistics aligned with ``table`` (one entry per class)."""

    table: DegreeClassTable
    mean: np.ndarray
    second_moment: np.ndarray | None = None
    variance: np.ndarray | None = None
    iterations: int = 0
    converged: bool = True
    clamped: int = 0

    def total_mass(self) -> float:
        """Sum over classes of N P(k) pbar(k); 1 for a normalized solution."""
        return float(np.dot(self.table.counts, self.mean))

    def marginal(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray | None]:
        """Statistics keyed by k_in alone, pooling classes over k_out.

        Returns ``(k_in, count, mean, variance)``. The mean is count
        weighted; the variance is the pooled variance of all nodes with
        that in-degree (within-class plus between-class spread).
        """
        t = self.table
        kin, inv = np.unique(t.k_in, return_inverse=True)
        cnt = np.bincount(inv, weights=t.counts)
        mean = np.bincount(inv, weights=t.counts * self.mean) / cnt
        var = None
        if self.variance is not None:
            spread = (self.mean - mean[inv]) ** 2
            var = np.bincount(inv, weights=t.counts * (self.variance + spread)) / cnt
        return kin, cnt.astype(np.int64), mean, var


def aggregate_by_class(v, t: DegreeClassTable) -> MeanFieldSolution:
    """Empirical class means and (population) variances of a node vector."""
    p = np.asarray(getattr(v, "values", v), dtype=np.float64)
    if len(p) != t.node_count:
        raise ValueError(f"vector has {len(p)} entries, class table covers {t.node_count} nodes")
    cnt = t.counts.astype(np.float64)
    mean = np.bincount(t.class_of, weights=p, minlength=len(t)) / cnt
    dev = p - mean[t.class_of]
    var = np.bincount(t.class_of, weights=dev * dev, minlength=len(t)) / cnt
    return MeanFieldSolution(t, mean, var + mean * mean, var, 0, True, 0)


def _class_edge_sum(g: DirectedGraph, t: DegreeClassTable, node_values: np.ndarray, threads: int) -> np.ndarray:
    """For each class k: sum over edges j -> i with i in k of node_values[j]."""
    per_node = kernels.pull_sum(g.in_indptr, g.in_indices, node_values, rows=g.in_rows, threads=threads)
    return np.bincount(t.class_of, weights=per_node, minlength=len(t))


def mf_iterate(g: DirectedGraph, t: DegreeClassTable, q: float = DEFAULT_Q,
               spec: ConvergenceSpec | None = None, threads: int = 1) -> MeanFieldSolution:
    """Fixed point of the class-average recursion, starting from 1/N.

    Walkers on dangling classes are redistributed uniformly as in the
    node-level update, so the class vector stays normalized; it is also
    renormalized every iteration against rounding drift.
    """
    _check_q(q)
    spec = spec or ConvergenceSpec()
    if g.edge_count == 0:
        raise EmptyGraphError("mean-field iteration needs at least one edge")
    if t.node_count != g.node_count:
        raise ValueError("class table built on a different graph")
    n = g.node_count
    cnt = t.counts.astype(np.float64)
    dangling_class = t.k_out == 0
    pbar = np.full(len(t), 1.0 / n)
    for it in range(1, spec.max_iterations + 1):
        x = pbar[t.class_of] * g.inv_out
        s = _class_edge_sum(g, t, x, threads)
        dangling_mass = float(np.dot(cnt[dangling_class], pbar[dangling_class]))
        new = q / n + (1.0 - q) * dangling_mass / n + (1.0 - q) * s / cnt
        new /= np.dot(cnt, new)
        change = kernels.max_relative_change(new, pbar)
        pbar = new
        if change < spec.tolerance:
            return MeanFieldSolution(t, pbar, iterations=it, converged=True)
    logger.warning("mean-field iteration did not converge in %d iterations", spec.max_iterations)
    return MeanFieldSolution(t, pbar, iterations=spec.max_iterations, converged=False)


def mf_variance_iterate(g: DirectedGraph, t: DegreeClassTable, q: float = DEFAULT_Q,
                        spec: ConvergenceSpec | None = None, means: MeanFieldSolution | None = None,
                        threads: int = 1) -> MeanFieldSolution:
    """Within-class variance from the fluctuation recursion.

    With X the contribution p(j)/k_out(j) of a predecessor drawn from the
    edges into class k, the recursion reads
    ``sigma2(k) = (1-q)^2 * k_in * (E[X^2] - E[X]^2)``, where
    ``E[X^2]`` uses ``(sigma2(k') + pbar(k')^2) / k'_out^2``. Class means
    are taken from ``means`` (computed with ``mf_iterate`` if absent) and
    held fixed. Negative values, which only arise from rounding, are
    clamped to zero and counted in ``clamped``.
    """
    _check_q(q)
    spec = spec or ConvergenceSpec()
    if means is None:
        means = mf_iterate(g, t, q, spec, threads)
    pbar = means.mean
    cnt = t.counts.astype(np.float64)
    kin = t.k_in.astype(np.float64)
    has_in = t.k_in > 0
    first = _class_edge_sum(g, t, pbar[t.class_of] * g.inv_out, threads)
    # k_in * (E[X])^2 == S1^2 / (k_in * count^2)
    mean_sq = np.zeros(len(t))
    mean_sq[has_in] = first[has_in] ** 2 / (kin[has_in] * cnt[has_in] ** 2)
    inv_out2 = g.inv_out * g.inv_out
    damp2 = (1.0 - q) ** 2
    sigma2 = np.zeros(len(t))
    clamped = 0
    converged = False
    it = 0
    for it in range(1, spec.max_iterations + 1):
        y = (sigma2[t.class_of] + pbar[t.class_of] ** 2) * inv_out2
        second = _class_edge_sum(g, t, y, threads) / cnt
        new = damp2 * (second - mean_sq)
        new[~has_in] = 0.0
        neg = new < 0
        if neg.any():
            clamped += int(neg.sum())
            new[neg] = 0.0
        scale = np.maximum(new, pbar * pbar * _VARIANCE_REL_FLOOR)
        change = float(np.max(np.abs(new - sigma2) / scale))
        sigma2 = new
        if change < spec.tolerance:
            converged = True
            break
    if clamped:
        logger.info("variance recursion clamped %d negative intermediate values", clamped)
    if not converged:
        logger.warning("variance recursion did not converge in %d iterations", spec.max_iterations)
    return MeanFieldSolution(t, pbar, sigma2 + pbar * pbar, sigma2, it, converged, clamped)


@dataclass(frozen=True)
class UncorrelatedModel:
    """Degree moments entering the uncorrelated-network closed forms.

    Ratios with k_out in the denominator sum over non-dangling nodes only
    but are normalized by the full node count, i.e. they are
    ``sum_{k_out>0} P(k) f(k)``.
    """

    node_count: int
    mean_k_in: float
    q: float = DEFAULT_Q
    inv_kout: float = 0.0          # <1/k_out>
    kin_over_kout: float = 0.0     # <k_in/k_out>
    kin2_over_kout: float = 0.0    # <k_in^2/k_out>

    def __post_init__(self):
        if not self.mean_k_in > 0:
            raise ValueError("mean_k_in must be positive")
        if self.node_count < 1:
            raise ValueError("node_count must be >= 1")
        _check_q(self.q)
        for name in ("inv_kout", "kin_over_kout", "kin2_over_kout"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be finite and non-negative")

    @classmethod
    def from_graph(cls, g: DirectedGraph, q: float = DEFAULT_Q) -> "UncorrelatedModel":
        if g.node_count == 0 or g.edge_count == 0:
            raise EmptyGraphError("moments need a graph with edges")
        n = g.node_count
        kin = g.k_in.astype(np.float64)
        inv = g.inv_out
        return cls(
            node_count=n,
            mean_k_in=g.edge_count / n,
            q=q,
            inv_kout=float(inv.sum() / n),
            kin_over_kout=float(np.dot(kin, inv) / n),
            kin2_over_kout=float(np.dot(kin * kin, inv) / n),
        )


def closed_form_mean(m: UncorrelatedModel, k_in):
    """Uncorrelated mean-field PageRank: q/N + (1-q) k_in / (N <k_in>)."""
    k = np.asarray(k_in, dtype=np.float64)
    if np.any(k < 0):
        raise ValueError("k_in must be non-negative")
    out = (m.q + (1.0 - m.q) * k / m.mean_k_in) / m.node_count
    return float(out) if out.ndim == 0 else out


def variance_denominator(m: UncorrelatedModel) -> float:
    return 1.0 - (1.0 - m.q) ** 2 / m.mean_k_in * m.kin_over_kout


def closed_form_variance(m: UncorrelatedModel, k_in, simplified: bool = False):
    """Within-class variance on an uncorrelated network, linear in k_in.

    ``simplified`` selects the heavy-tail approximation
    ``(1-q)^4 <k_in^2/k_out> k_in / (N^2 <k_in>^3)``.
    """
    k = np.asarray(k_in, dtype=np.float64)
    if np.any(k < 0):
        raise ValueError("k_in must be non-negative")
    q, n, kbar = m.q, m.node_count, m.mean_k_in
    if simplified:
        slope = (1.0 - q) ** 4 / (n * n * kbar**3) * m.kin2_over_kout
    else:
        den = variance_denominator(m)
        if not den > 0:
            raise ModelInvalidError(f"variance series diverges: denominator {den:.6g} <= 0")
        # <(q<k> + (1-q) k_in)^2 / k_out> expanded in the stored moments
        square = (q * kbar) ** 2 * m.inv_kout + 2 * q * (1 - q) * kbar * m.kin_over_kout \
            + (1 - q) ** 2 * m.kin2_over_kout
        slope = (1.0 - q) ** 2 / (n * n * kbar**2) * (square / kbar - 1.0) / den
    out = slope * k
    return float(out) if out.ndim == 0 else out


def coefficient_of_variation(m: UncorrelatedModel, k_in, exact: bool = False):
    """sigma/pbar for the uncorrelated model.

    Default is the large-k_in form ``(1-q) sqrt(<k_in^2/k_out> / (<k_in> k_in))``;
    ``exact`` divides the full closed-form standard deviation by the closed-form mean.
    """
    k = np.asarray(k_in, dtype=np.float64)
    if exact:
        out = np.sqrt(closed_form_variance(m, k)) / closed_form_mean(m, k)
    else:
        if np.any(k < 1):
            raise ValueError("large-k coefficient of variation needs k_in >= 1")
        out = (1.0 - m.q) * np.sqrt(m.kin2_over_kout / (m.mean_k_in * k))
    out = np.asarray(out)
    return float(out) if out.ndim == 0 else out
