"""Seeded configuration-model digraphs with prescribed degree laws."""
from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import GenerationError
from .graph import DirectedGraph, edge_degree_correlation

logger = logging.getLogger(__name__)

MAX_VIOLATION_FRACTION = 1e-3


@dataclass(frozen=True)
class DegreeLaw:
    """How one side's degree sequence is drawn.

    kind:
      ``"power_law"``  P(k) ~ k**-exponent on [k_min, k_max] (k_max defaults to floor(sqrt(N)));
      ``"constant"``   every node has degree ``k_min``;
      ``"sequence"``   the explicit ``sequence``;
      ``"shuffle"``    (out side only) a random permutation of the in-degree sequence.
    """

    kind: str = "power_law"
    exponent: float = 2.1
    k_min: int = 1
    k_max: int | None = None
    sequence: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.kind not in ("power_law", "constant", "sequence", "shuffle"):
            raise ValueError(f"unknown degree law {self.kind!r}")
        if self.k_min < 0:
            raise ValueError("k_min must be non-negative")
        if self.kind == "power_law":
            if self.k_min < 1:
                raise ValueError("power-law degrees need k_min >= 1")
            if not self.exponent > 1:
                raise ValueError("power-law exponent must exceed 1")
            if self.k_max is not None and self.k_max < self.k_min:
                raise ValueError("k_max must be >= k_min")
        if self.kind == "sequence" and self.sequence is None:
            raise ValueError("sequence law needs a sequence")

    def cap(self, n: int) -> int | None:
        if self.kind == "power_law":
            return self.k_max if self.k_max is not None else max(self.k_min, int(np.sqrt(n)))
        return None

    def truncated_mean(self, n: int) -> float:
        if self.kind == "power_law":
            k = np.arange(self.k_min, self.cap(n) + 1, dtype=np.float64)
            w = k ** -self.exponent
            return float(np.dot(k, w) / w.sum())
        if self.kind == "constant":
            return float(self.k_min)
        raise ValueError(f"no closed mean for {self.kind!r}")


@dataclass(frozen=True)
class GeneratorSpec:
    node_count: int
    in_law: DegreeLaw = field(default_factory=DegreeLaw)
    out_law: DegreeLaw = field(default_factory=lambda: DegreeLaw(kind="shuffle"))
    seed: int = 0
    multi_edges: str = "allow"
    self_loops: str = "allow"
    max_passes: int = 50

    def __post_init__(self):
        if self.node_count < 1:
            raise ValueError("node_count must be >= 1")
        if self.in_law.kind == "shuffle":
            raise ValueError("the in-degree law cannot be a shuffle")
        for name in ("multi_edges", "self_loops"):
            if getattr(self, name) not in ("allow", "reject"):
                raise ValueError(f"{name} must be 'allow' or 'reject'")
        for law in (self.in_law, self.out_law):
            if law.kind == "sequence" and len(law.sequence) != self.node_count:
                raise ValueError("explicit sequence length differs from node_count")

    def to_dict(self) -> dict:
        d = asdict(self)
        for side in ("in_law", "out_law"):
            if d[side]["sequence"] is not None:
                d[side]["sequence"] = f"<{len(d[side]['sequence'])} explicit degrees>"
        return d


def _draw(law: DegreeLaw, n: int, rng: np.random.Generator) -> np.ndarray:
    if law.kind == "constant":
        return np.full(n, law.k_min, dtype=np.int64)
    if law.kind == "sequence":
        seq = np.asarray(law.sequence, dtype=np.int64)
        if np.any(seq < 0):
            raise ValueError("degrees must be non-negative")
        return seq.copy()
    # inverse transform on the truncated zeta weights
    k = np.arange(law.k_min, law.cap(n) + 1, dtype=np.int64)
    cdf = np.cumsum(k.astype(np.float64) ** -law.exponent)
    cdf /= cdf[-1]
    idx = np.searchsorted(cdf, rng.random(n), side="right")
    return k[np.minimum(idx, len(k) - 1)]


def _top_up(seq: np.ndarray, deficit: int, cap: int | None, rng: np.random.Generator) -> None:
    """Add ``deficit`` unit increments at random entries without exceeding ``cap``."""
    n = len(seq)
    if cap is not None and int((cap - seq).clip(min=0).sum()) < deficit:
        raise GenerationError("degree caps leave no room to reconcile the in/out sums")
    while deficit > 0:
        eligible = np.flatnonzero(seq < cap) if cap is not None else np.arange(n)
        hits = np.bincount(rng.choice(eligible, size=deficit), minlength=n)
        if cap is not None:
            hits = np.minimum(hits, cap - seq)
        seq += hits
        deficit -= int(hits.sum())


def sample_degree_sequence(spec: GeneratorSpec) -> tuple[np.ndarray, np.ndarray]:
    """Draw (in_degrees, out_degrees) with equal sums.

    The side with the smaller sum receives unit increments on randomly
    chosen entries until the sums agree.
    """
    rng = np.random.default_rng(spec.seed)
    n = spec.node_count
    kin = _draw(spec.in_law, n, rng)
    if spec.out_law.kind == "shuffle":
        kout = rng.permutation(kin)
    else:
        kout = _draw(spec.out_law, n, rng)
    diff = int(kin.sum() - kout.sum())
    if diff > 0:
        _top_up(kout, diff, spec.out_law.cap(n), rng)
    elif diff < 0:
        _top_up(kin, -diff, spec.in_law.cap(n), rng)
    return kin, kout


@dataclass
class GenerationReport:
    passes: int = 0
    dropped_edges: int = 0
    requested_edges: int = 0


def _violations(src, dst, n, reject_loops, reject_multi):
    bad = np.zeros(len(src), dtype=bool)
    if reject_loops:
        bad |= src == dst
    if reject_multi:
        key = src * np.int64(n) + dst
        order = np.argsort(key, kind="stable")
        dup = np.zeros(len(src), dtype=bool)
        dup[order[1:]] = key[order[1:]] == key[order[:-1]]
        bad |= dup
    return np.flatnonzero(bad)


def generate_with_report(spec: GeneratorSpec) -> tuple[DirectedGraph, GenerationReport]:
    kin, kout = sample_degree_sequence(spec)
    # a separate stream so degree sampling and matching stay independent of each other
    rng = np.random.default_rng([spec.seed, 1])
    n = spec.node_count
    src = np.repeat(np.arange(n, dtype=np.int64), kout)
    dst = rng.permutation(np.repeat(np.arange(n, dtype=np.int64), kin))
    report = GenerationReport(requested_edges=len(src))
    reject_loops = spec.self_loops == "reject"
    reject_multi = spec.multi_edges == "reject"
    if reject_loops or reject_multi:
        bad = _violations(src, dst, n, reject_loops, reject_multi)
        while len(bad) and report.passes < spec.max_passes:
            report.passes += 1
            # re-deal the targets of violating edges together with as many random others
            others = rng.choice(len(dst), size=min(len(bad), len(dst)), replace=False)
            pool = np.unique(np.concatenate([bad, others]))
            dst[pool] = dst[rng.permutation(pool)]
            bad = _violations(src, dst, n, reject_loops, reject_multi)
        if len(bad):
            if len(bad) > MAX_VIOLATION_FRACTION * len(src):
                raise GenerationError(
                    f"{len(bad)} loop/multi-edge violations remain after {report.passes} passes")
            keep = np.ones(len(src), dtype=bool)
            keep[bad] = False
            src, dst = src[keep], dst[keep]
            report.dropped_edges = len(bad)
            logger.info("dropped %d residual violating edges", len(bad))
    return DirectedGraph(n, src, dst), report


def generate(spec: GeneratorSpec) -> DirectedGraph:
    """Configuration-model digraph: out-stubs matched to a seeded permutation of in-stubs."""
    return generate_with_report(spec)[0]


def provenance(spec: GeneratorSpec, g: DirectedGraph, report: GenerationReport | None = None) -> dict:
    try:
        corr = edge_degree_correlation(g)
    except ValueError:
        corr = None
    out = {
        "spec": spec.to_dict(),
        "seed": spec.seed,
        "nodes": g.node_count,
        "edges": g.edge_count,
        "realized_mean_k_in": g.edge_count / g.node_count,
        "realized_mean_k_out": g.edge_count / g.node_count,
        "max_k_in": int(g.k_in.max()),
        "max_k_out": int(g.k_out.max()),
        "edge_degree_correlation": corr,
    }
    if report is not None:
        out["report"] = asdict(report)
    return out


def write_provenance(path, spec: GeneratorSpec, g: DirectedGraph, report: GenerationReport | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(provenance(spec, g, report), fh, indent=2, sort_keys=True)
        fh.write("\n")
