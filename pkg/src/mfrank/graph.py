"""Immutable directed graphs in compressed sparse row form, degree classes,
and edge-list ingestion."""
from __future__ import annotations

import gzip
import io
import os
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

import numpy as np

from .errors import CapacityError, EmptyGraphError, GraphParseError

# Dense ids index numpy arrays; beyond this the allocation itself is the problem.
MAX_NODES = 2**31 - 1
_HEADER = re.compile(r"#\s*nodes\s+(\d+)\b")
_UINT64_MAX = 2**64 - 1


def _readonly(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


def _csr(keys: np.ndarray, values: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    order = np.argsort(keys, kind="stable")
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(keys, minlength=n), out=indptr[1:])
    return indptr, np.ascontiguousarray(values[order], dtype=np.int64)


class DirectedGraph:
    """Directed multigraph with forward and reverse CSR adjacency.

    Successors of ``i`` are ``out_indices[out_indptr[i]:out_indptr[i+1]]``;
    predecessors are the same slice of the ``in_*`` arrays. Both keep the
    order in which edges were supplied. Arrays are read-only.
    """

    def __init__(self, node_count: int, sources, targets):
        src = np.ascontiguousarray(sources, dtype=np.int64)
        dst = np.ascontiguousarray(targets, dtype=np.int64)
        if src.shape != dst.shape or src.ndim != 1:
            raise ValueError("sources and targets must be 1-d arrays of equal length")
        if node_count < 0:
            raise ValueError("node_count must be non-negative")
        if node_count > MAX_NODES:
            raise CapacityError(f"{node_count} nodes exceeds the supported maximum {MAX_NODES}")
        if len(src) and (min(src.min(), dst.min()) < 0 or max(src.max(), dst.max()) >= node_count):
            raise ValueError("edge endpoint outside [0, node_count)")
        self._n = int(node_count)
        self.out_indptr, self.out_indices = _csr(src, dst, self._n)
        self.in_indptr, self.in_indices = _csr(dst, src, self._n)
        self.k_out = np.diff(self.out_indptr)
        self.k_in = np.diff(self.in_indptr)
        for a in (self.out_indptr, self.out_indices, self.in_indptr, self.in_indices, self.k_out, self.k_in):
            _readonly(a)

    @property
    def node_count(self) -> int:
        return self._n

    @property
    def edge_count(self) -> int:
        return int(self.out_indptr[-1])

    def __repr__(self):
        return f"DirectedGraph(node_count={self.node_count}, edge_count={self.edge_count})"

    def successors(self, i: int) -> np.ndarray:
        return self.out_indices[self.out_indptr[i]:self.out_indptr[i + 1]]

    def predecessors(self, i: int) -> np.ndarray:
        return self.in_indices[self.in_indptr[i]:self.in_indptr[i + 1]]

    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        """(sources, targets) grouped by source."""
        src = np.repeat(np.arange(self._n, dtype=np.int64), self.k_out)
        return src, self.out_indices.copy()

    @cached_property
    def dangling(self) -> np.ndarray:
        return _readonly(self.k_out == 0)

    @cached_property
    def inv_out(self) -> np.ndarray:
        """1/k_out, and 0 for dangling nodes."""
        inv = np.zeros(self._n, dtype=np.float64)
        nz = self.k_out > 0
        inv[nz] = 1.0 / self.k_out[nz]
        return _readonly(inv)

    @cached_property
    def in_rows(self) -> np.ndarray:
        """Target node of every reverse-adjacency entry (used by the numpy kernels)."""
        return _readonly(np.repeat(np.arange(self._n, dtype=np.int64), self.k_in))

    def relabel(self, perm) -> "DirectedGraph":
        """Graph with node ``i`` renamed to ``perm[i]``."""
        perm = np.asarray(perm, dtype=np.int64)
        src, dst = self.edges()
        return DirectedGraph(self._n, perm[src], perm[dst])


def from_edge_list(edges, node_count: int | None = None, dedup: bool = False,
                   drop_self_loops: bool = False) -> DirectedGraph:
    """Build a graph from (source, target) pairs over dense ids.

    Duplicate edges and self-loops are kept unless ``dedup`` /
    ``drop_self_loops`` is set. ``node_count`` defaults to max id + 1.
    """
    arr = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges)
    if arr.size == 0:
        arr = np.zeros((0, 2), dtype=np.int64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("edges must be (source, target) pairs")
    if not np.issubdtype(arr.dtype, np.integer):
        raise ValueError("node ids must be integers")
    if arr.size and arr.min() < 0:
        raise ValueError("node ids must be non-negative")
    if arr.dtype == np.uint64 and arr.size and arr.max() > np.iinfo(np.int64).max:
        raise CapacityError("node id does not fit a signed 64-bit index")
    arr = arr.astype(np.int64)
    top = int(arr.max()) + 1 if arr.size else 0
    if node_count is None:
        node_count = top
    elif node_count < top:
        raise ValueError(f"node_count {node_count} smaller than max id + 1 = {top}")
    if node_count > MAX_NODES:
        raise CapacityError(f"node id {node_count - 1} exceeds the dense-id capacity {MAX_NODES - 1}")
    src, dst = arr[:, 0], arr[:, 1]
    keep = np.ones(len(src), dtype=bool)
    if drop_self_loops:
        keep &= src != dst
    if dedup:
        # node_count <= MAX_NODES keeps the key below 2**62
        key = src * np.int64(node_count) + dst
        _, first = np.unique(key[keep], return_index=True)
        idx = np.flatnonzero(keep)[np.sort(first)]
        keep = np.zeros(len(src), dtype=bool)
        keep[idx] = True
    return DirectedGraph(node_count, src[keep], dst[keep])


def _open_text(source):
    if isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as fh:
            magic = fh.read(2)
        if magic == b"\x1f\x8b":
            return gzip.open(source, "rt", encoding="ascii")
        return open(source, "r", encoding="ascii")
    if isinstance(source, io.IOBase) or hasattr(source, "read"):
        return source
    return iter(source)


def parse_edge_lines(lines: Iterable[str]) -> np.ndarray:
    """Parse "source target" lines into a (E, 2) uint64 array.

    Blank lines and lines starting with '#' are skipped.
    """
    pairs: list[tuple[int, int]] = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise GraphParseError(f"expected 2 fields, got {len(parts)}: {raw.rstrip()!r}", lineno)
        if not (parts[0].isdigit() and parts[1].isdigit()):
            raise GraphParseError(f"node ids must be decimal unsigned integers: {raw.rstrip()!r}", lineno)
        a, b = int(parts[0]), int(parts[1])
        if a > _UINT64_MAX or b > _UINT64_MAX:
            raise CapacityError(f"line {lineno}: node id exceeds 64 bits")
        pairs.append((a, b))
    if not pairs:
        return np.zeros((0, 2), dtype=np.uint64)
    return np.array(pairs, dtype=np.uint64)


def read_edge_list(source, dedup: bool = False, drop_self_loops: bool = False) -> tuple[DirectedGraph, np.ndarray]:
    """Read an edge-list file (optionally gzip) with arbitrary sparse ids.

    Returns the graph over dense ids and ``original_ids`` where
    ``original_ids[dense] == original``. Ids are assigned in increasing
    order of the original id, so already-dense input maps to itself.
    A leading "# nodes N ..." header (as written by ``write_edge_list``)
    keeps isolated nodes when every id is below N.
    """
    fh = _open_text(source)
    header = {}

    def lines():
        for i, line in enumerate(fh):
            if i == 0:
                m = _HEADER.match(line)
                if m:
                    header["nodes"] = int(m.group(1))
            yield line

    try:
        raw = parse_edge_lines(lines())
    finally:
        if fh is not source and hasattr(fh, "close"):
            fh.close()
    n = header.get("nodes")
    if n is not None and n <= MAX_NODES and (raw.size == 0 or int(raw.max()) < n):
        return from_edge_list(raw.astype(np.int64), node_count=n, dedup=dedup,
                              drop_self_loops=drop_self_loops), np.arange(n, dtype=np.uint64)
    ids, inverse = np.unique(raw.ravel(), return_inverse=True)
    if len(ids) > MAX_NODES:
        raise CapacityError(f"{len(ids)} distinct nodes exceeds capacity {MAX_NODES}")
    dense = inverse.reshape(-1, 2).astype(np.int64)
    return from_edge_list(dense, node_count=len(ids), dedup=dedup, drop_self_loops=drop_self_loops), ids


def write_edge_list(g: DirectedGraph, path, original_ids=None) -> None:
    src, dst = g.edges()
    if original_ids is not None:
        src, dst = np.asarray(original_ids)[src], np.asarray(original_ids)[dst]
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"# nodes {g.node_count} edges {g.edge_count}\n")
        np.savetxt(fh, np.stack([src, dst], axis=1), fmt="%d")


def write_mapping(original_ids, path) -> None:
    ids = np.asarray(original_ids)
    with open(path, "w", encoding="ascii") as fh:
        fh.write("# original_id dense_id\n")
        np.savetxt(fh, np.stack([ids.astype(np.uint64), np.arange(len(ids), dtype=np.uint64)], axis=1), fmt="%d")


@dataclass(frozen=True)
class DegreeClassTable:
    """Partition of nodes into (k_in, k_out) classes, sorted by k_in then k_out."""

    k_in: np.ndarray
    k_out: np.ndarray
    counts: np.ndarray
    class_of: np.ndarray
    node_count: int

    def __len__(self):
        return len(self.counts)

    @property
    def probability(self) -> np.ndarray:
        return self.counts / self.node_count

    def members(self, c: int) -> np.ndarray:
        return np.flatnonzero(self.class_of == c)

    def index_of(self, k_in: int, k_out: int) -> int:
        hit = np.flatnonzero((self.k_in == k_in) & (self.k_out == k_out))
        if not len(hit):
            raise KeyError((k_in, k_out))
        return int(hit[0])

    def as_dict(self) -> dict[tuple[int, int], int]:
        return {(int(a), int(b)): int(c) for a, b, c in zip(self.k_in, self.k_out, self.counts)}


def class_partition(g: DirectedGraph) -> DegreeClassTable:
    pairs = np.stack([g.k_in, g.k_out], axis=1)
    uniq, class_of, counts = np.unique(pairs, axis=0, return_inverse=True, return_counts=True)
    uniq = uniq.reshape(-1, 2)
    return DegreeClassTable(
        k_in=_readonly(uniq[:, 0].copy()),
        k_out=_readonly(uniq[:, 1].copy()),
        counts=_readonly(counts.astype(np.int64)),
        class_of=_readonly(class_of.reshape(-1).astype(np.int64)),
        node_count=g.node_count,
    )


def mean_in_degree(g: DirectedGraph) -> float:
    if g.node_count == 0:
        raise EmptyGraphError("mean in-degree of an empty graph")
    return g.edge_count / g.node_count


def edge_degree_correlation(g: DirectedGraph) -> float:
    """Pearson correlation over edges between k_out(source) and k_in(target)."""
    from .analytics import pearson

    src, dst = g.edges()
    return pearson(g.k_out[src].astype(np.float64), g.k_in[dst].astype(np.float64))
