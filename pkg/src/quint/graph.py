"""Undirected simple graphs in CSR form, edge-list I/O and exact oracles."""

from __future__ import annotations

import io
import os
from dataclasses import dataclass, field
from typing import Iterable, TextIO

import numpy as np
import scipy.sparse as sp

# dense n x n oracles are for tests, not production
DENSE_ORACLE_LIMIT = 4096


class GraphFormatError(ValueError):
    """Raised for malformed edge-list, label or id-map input."""


class EmptyGraphError(GraphFormatError):
    pass


class GraphSizeError(ValueError):
    """Raised when a dense oracle is asked to handle too many nodes."""


@dataclass(frozen=True, eq=False)
class Graph:
    """Compact undirected graph without self-loops or parallel edges.

    ``edges`` holds each undirected edge once as a row ``(u, v)`` with
    ``u < v``, sorted lexicographically. Neighbors of ``u`` are
    ``indices[indptr[u]:indptr[u + 1]]``, sorted ascending.
    ``id_map[k]`` is the external id of internal node ``k``.
    """

    n: int
    edges: np.ndarray
    indptr: np.ndarray
    indices: np.ndarray
    id_map: np.ndarray = field(repr=False)

    @classmethod
    def from_edges(cls, n: int, edges, id_map=None) -> "Graph":
        """Build a graph on nodes ``0..n-1`` from any iterable of pairs.

        Pairs may be directed or repeated; self-loops are dropped.
        """
        arr = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if n < 0:
            raise ValueError("n must be non-negative")
        if arr.size and (arr.min() < 0 or arr.max() >= n):
            raise ValueError(f"edge endpoint outside [0, {n})")
        arr = arr[arr[:, 0] != arr[:, 1]]
        lo = np.minimum(arr[:, 0], arr[:, 1])
        hi = np.maximum(arr[:, 0], arr[:, 1])
        canon = np.unique(np.stack([lo, hi], axis=1), axis=0) if len(arr) else np.empty((0, 2), np.int64)

        src = np.concatenate([canon[:, 0], canon[:, 1]])
        dst = np.concatenate([canon[:, 1], canon[:, 0]])
        order = np.lexsort((dst, src))
        src, dst = src[order], dst[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])

        if id_map is None:
            id_map = np.arange(n, dtype=np.int64)
        id_map = np.asarray(id_map, dtype=np.int64)
        if len(id_map) != n:
            raise ValueError("id_map length must equal n")
        for a in (canon, indptr, dst, id_map):
            a.setflags(write=False)
        return cls(n=n, edges=canon, indptr=indptr, indices=dst, id_map=id_map)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def neighbors(self, u: int) -> np.ndarray:
        self._check_node(u)
        return self.indices[self.indptr[u]:self.indptr[u + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        nb = self.neighbors(u)
        k = np.searchsorted(nb, v)
        return bool(k < len(nb) and nb[k] == v)

    def directed_edges(self) -> tuple[np.ndarray, np.ndarray]:
        """Both orientations of every edge as ``(src, dst)`` arrays."""
        src = np.repeat(np.arange(self.n, dtype=np.int64), self.degrees())
        return src, self.indices

    def adjacency(self) -> sp.csr_matrix:
        """Sparse 0/1 adjacency matrix (int64)."""
        data = np.ones(len(self.indices), dtype=np.int64)
        return sp.csr_matrix((data, self.indices, self.indptr), shape=(self.n, self.n))

    def dense_adjacency(self) -> np.ndarray:
        _check_dense_guard(self.n)
        return self.adjacency().toarray()

    def edge_keys(self) -> np.ndarray:
        """Sorted ``u * n + v`` codes (``u < v``) for fast membership tests."""
        return pair_keys(self.edges, self.n)

    def without_edges(self, removed) -> "Graph":
        """A copy of the graph with the given undirected edges removed."""
        drop = pair_keys(np.asarray(removed, dtype=np.int64).reshape(-1, 2), self.n)
        keep = ~np.isin(self.edge_keys(), drop)
        return Graph.from_edges(self.n, self.edges[keep], self.id_map)

    def with_edges(self, added) -> "Graph":
        extra = np.asarray(added, dtype=np.int64).reshape(-1, 2)
        return Graph.from_edges(self.n, np.concatenate([self.edges, extra]), self.id_map)

    def _check_node(self, u) -> None:
        if not 0 <= int(u) < self.n:
            raise IndexError(f"node {u} outside [0, {self.n})")


def pair_keys(pairs: np.ndarray, n: int) -> np.ndarray:
    """Order-insensitive integer code for each unordered pair."""
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    lo = np.minimum(pairs[:, 0], pairs[:, 1])
    hi = np.maximum(pairs[:, 0], pairs[:, 1])
    return lo * n + hi


def _check_dense_guard(n: int) -> None:
    if n > DENSE_ORACLE_LIMIT:
        raise GraphSizeError(f"n={n} exceeds dense oracle limit {DENSE_ORACLE_LIMIT}")


def load_edge_list(source: TextIO | str | os.PathLike) -> Graph:
    """Parse a whitespace-separated edge list.

    Lines starting with ``#`` and blank lines are skipped. External ids are
    compacted to ``0..n-1`` in order of first appearance; directed pairs are
    symmetrized and self-loops dropped (a self-loop still registers its node).
    """
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8") as fh:
            return load_edge_list(fh)

    ids: dict[int, int] = {}
    pairs: list[tuple[int, int]] = []
    for lineno, line in enumerate(source, start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        tok = s.split()
        if len(tok) < 2:
            raise GraphFormatError(f"line {lineno}: expected two node ids, got {s!r}")
        try:
            a, b = int(tok[0]), int(tok[1])
        except ValueError:
            raise GraphFormatError(f"line {lineno}: non-integer node id in {s!r}") from None
        if a < 0 or b < 0:
            raise GraphFormatError(f"line {lineno}: negative node id in {s!r}")
        u = ids.setdefault(a, len(ids))
        v = ids.setdefault(b, len(ids))
        pairs.append((u, v))
    if not ids:
        raise EmptyGraphError("edge list contains no edges")
    id_map = np.fromiter(ids.keys(), dtype=np.int64, count=len(ids))
    return Graph.from_edges(len(ids), pairs, id_map)


def save_edge_list(g: Graph, sink: TextIO | str | os.PathLike, external_ids: bool = False) -> None:
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, "w", encoding="utf-8") as fh:
            return save_edge_list(g, fh, external_ids)
    edges = g.id_map[g.edges] if external_ids else g.edges
    buf = io.StringIO()
    np.savetxt(buf, edges, fmt="%d", delimiter=" ")
    sink.write(buf.getvalue())


def save_id_map(g: Graph, sink: TextIO | str | os.PathLike) -> None:
    """Write the ``internal<TAB>external`` sidecar."""
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, "w", encoding="utf-8") as fh:
            return save_id_map(g, fh)
    for k, ext in enumerate(g.id_map.tolist()):
        sink.write(f"{k}\t{ext}\n")


def load_id_map(source: TextIO | str | os.PathLike) -> np.ndarray:
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8") as fh:
            return load_id_map(fh)
    out: dict[int, int] = {}
    for lineno, line in enumerate(source, start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        try:
            k, ext = (int(t) for t in s.split("\t"))
        except ValueError:
            raise GraphFormatError(f"line {lineno}: expected internal<TAB>external") from None
        out[k] = ext
    if sorted(out) != list(range(len(out))):
        raise GraphFormatError("id map internal ids are not exactly 0..n-1")
    return np.array([out[k] for k in range(len(out))], dtype=np.int64)


def max_degree(g: Graph) -> int:
    """Sparsity of the graph: the largest node degree (0 if edgeless)."""
    if g.n == 0:
        return 0
    return int(g.degrees().max())


def common_neighbors_exact(g: Graph, i: int, j: int) -> int:
    """Number of shared neighbors of ``i`` and ``j`` (entry of A^2)."""
    a, b = g.neighbors(i), g.neighbors(j)
    # two-pointer merge over sorted neighbor lists
    p = q = count = 0
    while p < len(a) and q < len(b):
        if a[p] == b[q]:
            count += 1
            p += 1
            q += 1
        elif a[p] < b[q]:
            p += 1
        else:
            q += 1
    return count


def common_neighbors_pairs(g: Graph, pairs) -> np.ndarray:
    """Vectorized exact common-neighbor counts for many pairs."""
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    if len(pairs) == 0:
        return np.zeros(0, dtype=np.int64)
    adj = g.adjacency()
    return np.asarray(adj[pairs[:, 0]].multiply(adj[pairs[:, 1]]).sum(axis=1)).ravel().astype(np.int64)


def matrix_power_exact(g: Graph, t: int) -> np.ndarray:
    """Dense A^(2^t) by ``t`` exact integer squarings."""
    if t < 1:
        raise ValueError("t must be >= 1")
    _check_dense_guard(g.n)
    # row sums of A^p are bounded by psi^p; fall back to Python ints past int64
    fits = max_degree(g) ** (2 ** t) < 2 ** 62
    m = g.dense_adjacency().astype(np.int64 if fits else object)
    for _ in range(t):
        m = m @ m
    return m


def matrix_power_entry_exact(g: Graph, i: int, j: int, t: int) -> int:
    """Entry ``(i, j)`` of A^(2^t)."""
    g._check_node(i)
    g._check_node(j)
    return int(matrix_power_exact(g, t)[i, j])
