"""Rank prediction from in-degree.

In-degree gives PageRank through the uncorrelated mean-field formula,
PageRank gives global rank through a Zipf law ``R = A p**-alpha``, and
global rank gives the expected position ``R n / N`` in a list of ``n``
hits. ``required_inlinks`` inverts the chain, ``calibrate_A`` fits ``A``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import optimize

from .errors import CalibrationError, UnreachableRankError

RESULT_CAP = 1000
_MAX_INLINKS = 2**62


@dataclass(frozen=True)
class RankModel:
    A: float = 1.5e-4
    alpha: float = 1.1
    web_size: float = 8.1e9
    mean_k_in: float = 10.0
    q: float = 0.15

    def __post_init__(self):
        if not self.A > 0:
            raise ValueError("A must be positive")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if not self.web_size >= 1:
            raise ValueError("web_size must be >= 1")
        if not self.mean_k_in > 0:
            raise ValueError("mean_k_in must be positive")
        if not 0 < self.q < 1:
            raise ValueError("q must lie in (0, 1)")

    def with_A(self, A: float) -> "RankModel":
        return replace(self, A=A)

    @classmethod
    def from_pagerank(cls, v, x_min: float | None = None, **params) -> "RankModel":
        """Model whose alpha is refitted as beta - 1 from a PageRank vector's tail."""
        from .analytics import fit_power_law

        fit = fit_power_law(getattr(v, "values", v), x_min)
        return cls(alpha=fit.exponent - 1.0, **params)


@dataclass(frozen=True)
class RankObservation:
    k_in: int
    n_hits: int
    empirical_rank: int

    def __post_init__(self):
        if self.k_in < 0:
            raise ValueError("k_in must be non-negative")
        if self.n_hits < 1:
            raise ValueError("n_hits must be >= 1")
        if not 1 <= self.empirical_rank <= self.n_hits:
            raise ValueError("empirical_rank must lie in [1, n_hits]")

    @property
    def at_cap(self) -> bool:
        """True when the rank sits at the search engine's result-list cap."""
        return self.empirical_rank >= RESULT_CAP


def pagerank_from_indegree(m: RankModel, k_in):
    k = np.asarray(k_in, dtype=np.float64)
    out = m.q / m.web_size + (1.0 - m.q) * k / (m.web_size * m.mean_k_in)
    return float(out) if out.ndim == 0 else out


def global_rank(m: RankModel, p):
    p = np.asarray(p, dtype=np.float64)
    if np.any(p <= 0):
        raise ValueError("PageRank must be positive")
    out = m.A * p ** (-m.alpha)
    return float(out) if out.ndim == 0 else out


def local_rank(m: RankModel, R, n):
    R = np.asarray(R, dtype=np.float64)
    if np.any(R <= 0):
        raise ValueError("global rank must be positive")
    if np.any(np.asarray(n) < 1):
        raise ValueError("n must be >= 1")
    out = R * np.asarray(n, dtype=np.float64) / m.web_size
    return float(out) if out.ndim == 0 else out


def predict_local_rank(m: RankModel, k_in, n):
    """Expected position of a page with ``k_in`` in-links in a list of ``n`` hits."""
    return local_rank(m, global_rank(m, pagerank_from_indegree(m, k_in)), n)


def predict_local_rank_closed(m: RankModel, k_in, n):
    """The same prediction written as one expression."""
    k = np.asarray(k_in, dtype=np.float64)
    n = np.asarray(n, dtype=np.float64)
    p = m.q / m.web_size + (1.0 - m.q) / (m.web_size * m.mean_k_in) * k
    out = m.A * n / (p ** m.alpha * m.web_size)
    return float(out) if out.ndim == 0 else out


def required_inlinks(m: RankModel, target_rank: float, n: int) -> int:
    """Smallest integer k_in whose predicted rank is <= target_rank."""
    if target_rank < 1:
        raise ValueError("target_rank must be >= 1")
    if n < 1:
        raise ValueError("n must be >= 1")

    def ok(k):
        return predict_local_rank(m, k, n) <= target_rank

    if ok(0):
        return 0
    hi = 1
    while not ok(hi):
        hi *= 2
        if hi > _MAX_INLINKS:
            raise UnreachableRankError(f"rank {target_rank} not reachable with fewer than {_MAX_INLINKS} in-links")
    lo = hi // 2  # ok(lo) is False
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def _log_terms(observations, m: RankModel):
    k = np.array([o.k_in for o in observations], dtype=np.float64)
    n = np.array([o.n_hits for o in observations], dtype=np.float64)
    y = np.log(np.array([o.empirical_rank for o in observations], dtype=np.float64))
    capped = np.array([o.at_cap for o in observations])
    # log r_pred = log A + c
    c = np.log(predict_local_rank(m.with_A(1.0), k, n))
    return c, y, capped


def calibration_loss(observations, m: RankModel) -> float:
    """Mean squared log-rank error. Predictions are clamped to the result cap
    only for observations that sit at the cap."""
    c, y, capped = _log_terms(observations, m.with_A(1.0))
    pred = math.log(m.A) + c
    pred = np.where(capped, np.minimum(pred, math.log(RESULT_CAP)), pred)
    return float(np.mean((pred - y) ** 2))


def calibrate_A(observations, m: RankModel | None = None) -> tuple[RankModel, float]:
    """Fit A by minimizing the mean squared log-rank error. Returns (model, loss)."""
    observations = list(observations)
    m = m or RankModel()
    if len(observations) < 10:
        raise CalibrationError(f"need at least 10 observations, got {len(observations)}")
    if len({(o.k_in, o.n_hits, o.empirical_rank) for o in observations}) == 1:
        raise CalibrationError("all observations are identical")
    c, y, capped = _log_terms(observations, m)
    resid = y - c
    logcap = math.log(RESULT_CAP)

    def loss(a):
        pred = a + c
        pred = np.where(capped, np.minimum(pred, logcap), pred)
        return float(np.mean((pred - y) ** 2))

    if not capped.any():
        log_a = float(resid.mean())
    else:
        # convex in log A; the uncensored mean sits inside the bracket
        lo, hi = float(resid.min()) - 1.0, float(resid.max()) + 1.0
        res = optimize.minimize_scalar(loss, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
        log_a = float(res.x)
    return m.with_A(math.exp(log_a)), loss(log_a)
