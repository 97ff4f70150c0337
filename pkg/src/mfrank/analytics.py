"""Distribution analysis: logarithmic binning, power-law fits, Pearson
correlation, per-class PageRank distributions and Zipf curves."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize, special

from .errors import FitError, UndefinedCorrelationError

DEFAULT_BIN_RATIO = 1.3
MIN_TAIL_SAMPLES = 100


@dataclass
class LogBinnedSeries:
    """Geometric bins ``edges[j] = edges[0] * ratio**j``; empty bins have count 0 and NaN means."""

    edges: np.ndarray
    count: np.ndarray
    mean_x: np.ndarray
    mean_y: np.ndarray
    var_y: np.ndarray
    ratio: float

    def __len__(self):
        return len(self.count)

    @property
    def occupied(self) -> np.ndarray:
        return self.count > 0

    @property
    def density(self) -> np.ndarray:
        """Histogram density: count / (total * bin width)."""
        total = self.count.sum()
        return self.count / (total * np.diff(self.edges)) if total else np.zeros(len(self.count))

    @property
    def centers(self) -> np.ndarray:
        return np.sqrt(self.edges[:-1] * self.edges[1:])


def _bin_index(x: np.ndarray, lo: float, ratio: float) -> tuple[np.ndarray, np.ndarray]:
    idx = np.floor(np.log(x / lo) / np.log(ratio)).astype(np.int64)
    idx = np.maximum(idx, 0)
    nbins = int(idx.max()) + 1
    edges = lo * ratio ** np.arange(nbins + 2, dtype=np.float64)
    # rounding in the logarithm can put a sample one bin off
    idx -= x < edges[idx]
    idx += x >= edges[idx + 1]
    nbins = int(idx.max()) + 1
    return idx, edges[: nbins + 1]


def log_binned_mean(x, y, ratio: float = DEFAULT_BIN_RATIO) -> LogBinnedSeries:
    """Conditional mean and variance of ``y`` within geometric bins of ``x``.

    Bins start at ``min(x)`` and grow by ``ratio``.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError("x and y must have equal length")
    if x.size == 0:
        raise ValueError("log binning of an empty sample")
    if not ratio > 1:
        raise ValueError("bin ratio must exceed 1")
    if np.any(x <= 0):
        raise ValueError("log binning needs strictly positive x")
    idx, edges = _bin_index(x, float(x.min()), ratio)
    nb = len(edges) - 1
    cnt = np.bincount(idx, minlength=nb)
    with np.errstate(invalid="ignore", divide="ignore"):
        mx = np.bincount(idx, weights=x, minlength=nb) / cnt
        my = np.bincount(idx, weights=y, minlength=nb) / cnt
        dev = y - my[idx]
        vy = np.bincount(idx, weights=dev * dev, minlength=nb) / cnt
    return LogBinnedSeries(edges, cnt, mx, my, vy, ratio)


def log_histogram(samples, ratio: float = DEFAULT_BIN_RATIO) -> LogBinnedSeries:
    """Log-binned histogram of positive samples (use ``.density`` for a pdf)."""
    s = np.asarray(samples, dtype=np.float64)
    s = s[s > 0]
    return log_binned_mean(s, s, ratio)


@dataclass
class PowerLawFit:
    exponent: float
    x_min: float
    sample_count: int
    goodness: float
    stderr: float
    discrete: bool = False


def _tail(samples, x_min):
    s = np.asarray(samples, dtype=np.float64)
    s = s[np.isfinite(s) & (s > 0)]
    if x_min is None:
        if s.size == 0:
            raise FitError("no positive samples")
        x_min = float(np.percentile(s, 1, method="lower"))
    if not x_min > 0:
        raise FitError("x_min must be positive")
    tail = np.sort(s[s >= x_min])
    if tail.size < MIN_TAIL_SAMPLES:
        raise FitError(f"only {tail.size} samples >= x_min={x_min:g}; need {MIN_TAIL_SAMPLES}")
    return tail, float(x_min)


def _log_hurwitz(a, x_min):
    return np.log(special.zeta(a, x_min))


def fit_power_law(samples, x_min: float | None = None, discrete: bool = False) -> PowerLawFit:
    """Maximum-likelihood power-law exponent of the tail ``samples >= x_min``.

    Continuous: ``1 + n / sum(log(x / x_min))``. Discrete (integer data):
    maximizes the Hurwitz-zeta likelihood. ``goodness`` is the
    Kolmogorov-Smirnov distance between tail and fitted law. ``x_min``
    defaults to the 1st percentile of the positive samples.
    """
    tail, x_min = _tail(samples, x_min)
    n = tail.size
    logs = np.log(tail / x_min)
    total = logs.sum()
    if not total > 0:
        raise FitError("degenerate tail: all samples equal x_min")
    if not discrete:
        alpha = 1.0 + n / total
        stderr = (alpha - 1.0) / np.sqrt(n)
        cdf = 1.0 - (tail / x_min) ** (1.0 - alpha)
        ecdf_hi = np.arange(1, n + 1) / n
        ks = float(max(np.max(np.abs(ecdf_hi - cdf)), np.max(np.abs(ecdf_hi - 1.0 / n - cdf))))
        return PowerLawFit(float(alpha), x_min, n, ks, float(stderr), False)

    if np.any(tail != np.round(tail)):
        raise FitError("discrete fit needs integer samples")
    sum_log = np.log(tail).sum()

    def nll(a):
        return n * _log_hurwitz(a, x_min) + a * sum_log

    res = optimize.minimize_scalar(nll, bounds=(1.0 + 1e-6, 20.0), method="bounded",
                                   options={"xatol": 1e-10})
    alpha = float(res.x)
    h = 1e-4
    curv = (_log_hurwitz(alpha + h, x_min) - 2 * _log_hurwitz(alpha, x_min) + _log_hurwitz(alpha - h, x_min)) / h**2
    stderr = float(1.0 / np.sqrt(n * curv)) if curv > 0 else float("nan")
    values, counts = np.unique(tail, return_counts=True)
    ecdf = np.cumsum(counts) / n
    cdf = 1.0 - special.zeta(alpha, values + 1.0) / special.zeta(alpha, x_min)
    ks = float(np.max(np.abs(ecdf - cdf)))
    return PowerLawFit(alpha, x_min, n, ks, stderr, True)


def scan_x_min(samples, discrete: bool = False, candidates: int = 100,
               max_quantile: float = 0.99) -> PowerLawFit:
    """Fit at several x_min (sample quantiles) and keep the smallest KS distance."""
    s = np.asarray(samples, dtype=np.float64)
    s = s[s > 0]
    qs = np.linspace(0.0, max_quantile, candidates)
    xs = np.unique(np.quantile(s, qs, method="lower"))
    best = None
    for xm in xs:
        try:
            fit = fit_power_law(s, xm, discrete)
        except FitError:
            continue
        if best is None or fit.goodness < best.goodness:
            best = fit
    if best is None:
        raise FitError("no x_min candidate leaves enough tail samples")
    return best


def pearson(x, y) -> float:
    """Pearson linear correlation coefficient."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("pearson needs two 1-d sequences of equal length")
    if x.size < 2:
        raise ValueError("pearson needs at least two points")
    dx = x - x.mean()
    dy = y - y.mean()
    sx = np.sqrt(np.dot(dx, dx))
    sy = np.sqrt(np.dot(dy, dy))
    if sx == 0 or sy == 0:
        raise UndefinedCorrelationError("correlation undefined for a constant sequence")
    r = float(np.dot(dx, dy) / (sx * sy))
    return min(1.0, max(-1.0, r))


def per_class_distribution(v, t, k_in: int, ratio: float = DEFAULT_BIN_RATIO) -> LogBinnedSeries:
    """Log-binned histogram of PageRank over the nodes with in-degree ``k_in`` (any k_out)."""
    p = np.asarray(getattr(v, "values", v), dtype=np.float64)
    if len(p) != t.node_count:
        raise ValueError("vector and class table sizes differ")
    node_kin = t.k_in[t.class_of]
    vals = p[node_kin == k_in]
    if vals.size == 0:
        raise ValueError(f"no nodes with in-degree {k_in}")
    return log_histogram(vals, ratio)


def zipf_curve(v) -> tuple[np.ndarray, np.ndarray]:
    """(rank, pagerank) with PageRank in descending order and ranks 1..N."""
    p = np.asarray(getattr(v, "values", v), dtype=np.float64)
    order = np.argsort(-p, kind="stable")
    return np.arange(1, len(p) + 1, dtype=np.int64), p[order]


def zipf_slope(ranks, values, max_rank: int | None = None) -> float:
    """Least-squares slope of log(pagerank) against log(rank) for ranks <= max_rank."""
    r = np.asarray(ranks, dtype=np.float64)
    v = np.asarray(values, dtype=np.float64)
    if max_rank is not None:
        keep = r <= max_rank
        r, v = r[keep], v[keep]
    slope, _ = np.polyfit(np.log(r), np.log(v), 1)
    return float(slope)
