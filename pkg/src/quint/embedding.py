"""Binary node sketches: each node's adjacency row OR-folded into d buckets.

Bucket ``j`` of node ``i`` is set iff some neighbor ``k`` of ``i`` has
``mapper(k) == j``. Sketches are stored as packed little-endian 64-bit words;
bucket ``j`` lives in word ``j // 64`` at bit ``j % 64``.
"""

from __future__ import annotations

import math
import os
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import BinaryIO, Iterable, Optional

import numpy as np

from .graph import Graph, max_degree

MAGIC = b"QNTS"
VERSION = 1
# magic, version, n, d, seed, psi, rho_present, rho
_HEADER = struct.Struct("<4sIQQQQBd")
_MASK64 = (1 << 64) - 1
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


class SketchFormatError(ValueError):
    """Raised when a sketch file cannot be decoded."""


def _splitmix64(x: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        z = x + _GOLDEN
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
        return z ^ (z >> np.uint64(31))


def _mulhi_u64(h: np.ndarray, d: int) -> np.ndarray:
    """floor(h * d / 2**64) for uint64 ``h`` and ``d < 2**32``, exactly."""
    dd = np.uint64(d)
    lo32 = np.uint64(0xFFFFFFFF)
    with np.errstate(over="ignore"):
        hi = (h >> np.uint64(32)) * dd
        lo = ((h & lo32) * dd) >> np.uint64(32)
        return (hi + lo) >> np.uint64(32)


def bucket_hash(keys, seed, d: int) -> np.ndarray:
    """Stateless keyed map of node ids into ``[0, d)``.

    ``h = splitmix64(k xor splitmix64(seed))``, then the high word of the
    128-bit product ``h * d``. Bucket probabilities differ from ``1/d`` by at
    most ``d / 2**64`` relative. ``keys`` and ``seed`` broadcast.
    """
    if not 1 <= d < 2 ** 32:
        raise ValueError(f"dimension must be in [1, 2**32), got {d}")
    if np.ndim(seed) == 0:
        seed_arr = np.uint64(int(seed) & _MASK64)
    else:
        seed_arr = np.asarray(seed, dtype=np.uint64)
    key = _splitmix64(seed_arr)
    h = _splitmix64(np.asarray(keys, dtype=np.uint64) ^ key)
    return _mulhi_u64(h, d).astype(np.int64)


@dataclass(frozen=True)
class NodeMapper:
    """Random map from node ids to buckets, a pure function of ``(seed, d)``."""

    seed: int
    d: int

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be >= 1")

    def __call__(self, keys):
        """Bucket of one id (returns ``int``) or of an array of ids."""
        out = bucket_hash(keys, self.seed, self.d)
        return int(out) if np.ndim(keys) == 0 else out

    def table(self, n: int) -> np.ndarray:
        """Buckets of ids ``0..n-1`` as a lookup array."""
        return bucket_hash(np.arange(n, dtype=np.uint64), self.seed, self.d)


class TableMapper:
    """Mapper backed by an explicit lookup table (``O(n log d)`` space).

    Embeddings built with it cannot be persisted, since the file header
    only carries ``(seed, d)``.
    """

    def __init__(self, table, d: int):
        table = np.asarray(table, dtype=np.int64)
        if table.size and (table.min() < 0 or table.max() >= d):
            raise ValueError("table entries must lie in [0, d)")
        self._table = table
        self.d = d
        self.seed = None

    def __call__(self, keys):
        out = self._table[np.asarray(keys, dtype=np.int64)]
        return int(out) if np.ndim(keys) == 0 else out

    def table(self, n: int) -> np.ndarray:
        if n > len(self._table):
            raise ValueError(f"table covers {len(self._table)} ids, need {n}")
        return self._table[:n]


def num_words(d: int) -> int:
    return (d + 63) // 64


class Sketch:
    """A ``d``-bit binary vector held as packed uint64 words."""

    __slots__ = ("words", "d")

    def __init__(self, words, d: int):
        words = np.ascontiguousarray(words, dtype=np.uint64)
        if words.shape != (num_words(d),):
            raise ValueError(f"expected {num_words(d)} words for d={d}, got shape {words.shape}")
        self.words = words
        self.d = d

    @classmethod
    def zeros(cls, d: int) -> "Sketch":
        return cls(np.zeros(num_words(d), dtype=np.uint64), d)

    @classmethod
    def from_bits(cls, bits) -> "Sketch":
        bits = np.asarray(bits, dtype=bool).ravel()
        return cls(pack_bits(bits[None, :])[0], len(bits))

    def to_bits(self) -> np.ndarray:
        return unpack_bits(self.words[None, :], self.d)[0]

    def bit(self, j: int) -> bool:
        if not 0 <= j < self.d:
            raise IndexError(j)
        return bool((int(self.words[j >> 6]) >> (j & 63)) & 1)

    def __or__(self, other: "Sketch") -> "Sketch":
        return merge_sketches(self, other)

    def __eq__(self, other) -> bool:
        return isinstance(other, Sketch) and self.d == other.d and np.array_equal(self.words, other.words)

    def __repr__(self) -> str:
        shown = "".join("1" if b else "0" for b in self.to_bits()[:64])
        return f"Sketch(d={self.d}, bits={shown}{'...' if self.d > 64 else ''})"


def pack_bits(bits: np.ndarray) -> np.ndarray:
    """(rows, d) boolean matrix -> (rows, ceil(d/64)) uint64 words."""
    rows, d = bits.shape
    padded = np.zeros((rows, num_words(d) * 64), dtype=bool)
    padded[:, :d] = bits
    as_bytes = np.packbits(padded, axis=1, bitorder="little")
    return as_bytes.view("<u8").astype(np.uint64)


def unpack_bits(words: np.ndarray, d: int) -> np.ndarray:
    as_bytes = np.ascontiguousarray(words, dtype="<u8").view(np.uint8)
    return np.unpackbits(as_bytes, axis=1, bitorder="little")[:, :d].astype(bool)


class EmbeddingSet:
    """Sketches of all ``n`` nodes plus what is needed to rebuild the mapper.

    ``rho`` is the error probability the dimension was derived from, or
    ``None`` when ``d`` was given explicitly.
    """

    def __init__(self, words: np.ndarray, d: int, seed: Optional[int], psi: int,
                 rho: Optional[float] = None, mapper: Optional[TableMapper] = None):
        words = np.ascontiguousarray(words, dtype=np.uint64)
        if words.ndim != 2 or words.shape[1] != num_words(d):
            raise ValueError(f"word matrix must be (n, {num_words(d)})")
        self.words = words
        self.d = d
        self.seed = seed
        self.psi = psi
        self.rho = rho
        self._table_mapper = mapper

    @property
    def n(self) -> int:
        return self.words.shape[0]

    @property
    def D(self) -> float:
        return 1.0 - 1.0 / self.d

    @property
    def mapper(self):
        if self._table_mapper is not None:
            return self._table_mapper
        return NodeMapper(self.seed, self.d)

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, i: int) -> Sketch:
        return Sketch(self.words[i].copy(), self.d)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, EmbeddingSet)
            and (self.d, self.seed, self.psi, self.rho) == (other.d, other.seed, other.psi, other.rho)
            and np.array_equal(self.words, other.words)
        )

    def to_bits(self) -> np.ndarray:
        """Dense ``(n, d)`` boolean matrix of all sketches."""
        return unpack_bits(self.words, self.d)

    def copy(self) -> "EmbeddingSet":
        return EmbeddingSet(self.words.copy(), self.d, self.seed, self.psi, self.rho, self._table_mapper)

    def payload_bytes(self) -> int:
        return self.words.nbytes

    def __repr__(self) -> str:
        return f"EmbeddingSet(n={self.n}, d={self.d}, seed={self.seed}, psi={self.psi}, rho={self.rho})"


def compute_dimension(psi: int, rho: float) -> int:
    """Embedding size ``ceil(psi^2 * sqrt(psi/2 * ln(2/rho)))``, at least 1."""
    if not 0.0 < rho < 1.0:
        raise ValueError(f"rho must lie in (0, 1), got {rho}")
    if psi < 0:
        raise ValueError("psi must be non-negative")
    if psi == 0:
        return 1
    return max(1, math.ceil(psi * psi * math.sqrt(psi / 2.0 * math.log(2.0 / rho))))


def _or_into(n: int, w: int, src: np.ndarray, buckets: np.ndarray) -> np.ndarray:
    flat = np.zeros(n * w, dtype=np.uint64)
    idx = src * w + (buckets >> 6)
    vals = np.left_shift(np.uint64(1), (buckets & 63).astype(np.uint64))
    np.bitwise_or.at(flat, idx, vals)
    return flat


def embed_graph(
    g: Graph,
    d: Optional[int] = None,
    seed: Optional[int] = None,
    threads: int = 1,
    rho: Optional[float] = None,
    mapper: Optional[TableMapper] = None,
) -> EmbeddingSet:
    """Sketch every node of ``g`` in one pass over its edges.

    Either ``(d, seed)`` or an explicit ``mapper`` selects the bucket map.
    Work is split across ``threads`` chunks of the directed edge list; the
    partial word arrays are OR-combined, so the bytes do not depend on the
    thread count.
    """
    if mapper is not None:
        d, seed = mapper.d, None
        table = mapper.table(g.n)
    else:
        if d is None or seed is None:
            raise ValueError("either (d, seed) or mapper is required")
        if d < 1:
            raise ValueError("d must be >= 1")
        # hashing ids once per node is cheaper than once per edge endpoint
        table = bucket_hash(np.arange(g.n, dtype=np.uint64), seed, d)
    w = num_words(d)
    src, dst = g.directed_edges()
    threads = max(1, int(threads))
    if threads == 1 or len(src) < 2 * threads:
        flat = _or_into(g.n, w, src, table[dst])
    else:
        bounds = np.linspace(0, len(src), threads + 1).astype(np.int64)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(
                lambda k: _or_into(g.n, w, src[bounds[k]:bounds[k + 1]], table[dst[bounds[k]:bounds[k + 1]]]),
                range(threads),
            ))
        flat = np.bitwise_or.reduce(np.stack(parts), axis=0)
    return EmbeddingSet(flat.reshape(g.n, w), d, seed, max_degree(g), rho, mapper)


def embed_graph_rho(g: Graph, rho: float, seed: int, threads: int = 1) -> EmbeddingSet:
    """Embed with the dimension derived from the graph's max degree and ``rho``."""
    return embed_graph(g, compute_dimension(max_degree(g), rho), seed, threads=threads, rho=rho)


def embed_node(neighbors: Iterable[int], mapper) -> Sketch:
    nb = np.fromiter(neighbors, dtype=np.int64) if not isinstance(neighbors, np.ndarray) else neighbors.astype(np.int64)
    words = np.zeros(num_words(mapper.d), dtype=np.uint64)
    if len(nb):
        b = np.asarray(mapper(nb), dtype=np.int64)
        np.bitwise_or.at(words, b >> 6, np.left_shift(np.uint64(1), (b & 63).astype(np.uint64)))
    return Sketch(words, mapper.d)


def merge_sketches(a: Sketch, b: Sketch) -> Sketch:
    """Bitwise OR; the sketch of the union of both neighbor sets."""
    if a.d != b.d:
        raise ValueError(f"dimension mismatch: {a.d} != {b.d}")
    return Sketch(a.words | b.words, a.d)


def apply_edge_update(es: EmbeddingSet, i: int, j: int) -> EmbeddingSet:
    """Record a new edge ``(i, j)`` in place by setting one bit in each row.

    Idempotent. Callers must serialize concurrent updates touching the same
    rows. ``es.psi`` is left at its build-time value.
    """
    if i == j:
        raise ValueError("self-loops are not allowed")
    for u in (i, j):
        if not 0 <= u < es.n:
            raise IndexError(f"node {u} outside [0, {es.n})")
    mapper = es.mapper
    for row, other in ((i, j), (j, i)):
        b = mapper(other)
        es.words[row, b >> 6] |= np.uint64(1 << (b & 63))
    return es


def save_embeddings(es: EmbeddingSet, sink: BinaryIO | str | os.PathLike) -> None:
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, "wb") as fh:
            return save_embeddings(es, fh)
    if es.seed is None:
        raise ValueError("embeddings built from a lookup-table mapper cannot be saved")
    rho_present = es.rho is not None
    sink.write(_HEADER.pack(MAGIC, VERSION, es.n, es.d, es.seed & _MASK64, es.psi,
                            int(rho_present), float(es.rho) if rho_present else 0.0))
    sink.write(np.ascontiguousarray(es.words, dtype="<u8").tobytes())


def load_embeddings(source: BinaryIO | str | os.PathLike) -> EmbeddingSet:
    if isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as fh:
            return load_embeddings(fh)
    head = source.read(_HEADER.size)
    if len(head) < 4 or head[:4] != MAGIC:
        raise SketchFormatError(f"magic: expected {MAGIC!r}, got {head[:4]!r}")
    if len(head) < _HEADER.size:
        raise SketchFormatError(f"header: truncated at {len(head)} of {_HEADER.size} bytes")
    _, version, n, d, seed, psi, rho_present, rho = _HEADER.unpack(head)
    if version != VERSION:
        raise SketchFormatError(f"version: unsupported {version}")
    if d < 1:
        raise SketchFormatError("d: must be >= 1")
    if rho_present not in (0, 1):
        raise SketchFormatError(f"rho_present: invalid flag {rho_present}")
    row_bytes = num_words(d) * 8
    payload = source.read(n * row_bytes)
    if len(payload) < n * row_bytes:
        raise SketchFormatError(
            f"row {len(payload) // row_bytes}: truncated payload ({len(payload)} of {n * row_bytes} bytes)"
        )
    if source.read(1):
        raise SketchFormatError("payload: trailing bytes after last row")
    words = np.frombuffer(payload, dtype="<u8").astype(np.uint64).reshape(n, num_words(d))
    return EmbeddingSet(words, d, seed, psi, rho if rho_present else None)
