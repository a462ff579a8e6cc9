"""Structural quantities recovered from sketches alone.

All arithmetic is float64. With ``D = 1 - 1/d`` and a sketch holding ``c``
ones, the degree estimate is ``ln(1 - c/d) / ln D``; ``c`` is clamped to
``d - 1`` so saturated sketches stay finite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .embedding import EmbeddingSet, Sketch
from .graph import DENSE_ORACLE_LIMIT, Graph, GraphSizeError, common_neighbors_pairs

SIMILARITY_KINDS = ("inner", "cosine", "l1", "l2")
_PAIR_BATCH = 1 << 16


def _check_dims(a: Sketch, b: Sketch) -> None:
    if a.d != b.d:
        raise ValueError(f"dimension mismatch: {a.d} != {b.d}")


def _check_d(d: int) -> None:
    if d < 2:
        raise ValueError(f"estimators need d >= 2, got {d}")


def popcount(s: Sketch) -> int:
    return int(np.bitwise_count(s.words).sum())


def inner_product(a: Sketch, b: Sketch) -> int:
    _check_dims(a, b)
    return int(np.bitwise_count(a.words & b.words).sum())


def hamming(a: Sketch, b: Sketch) -> int:
    _check_dims(a, b)
    return int(np.bitwise_count(a.words ^ b.words).sum())


def _log_d(d: int) -> float:
    return math.log1p(-1.0 / d)


def degree_from_count(count, d: int):
    """Vectorized degree estimate from popcounts."""
    _check_d(d)
    c = np.minimum(np.asarray(count, dtype=np.float64), d - 1)
    return np.log1p(-c / d) / _log_d(d)


def estimate_degree(s: Sketch, d: int | None = None) -> float:
    d = s.d if d is None else d
    return float(degree_from_count(popcount(s), d))


def estimate_edge(sig_i: Sketch, sig_j: Sketch, i: int, j: int, mapper) -> bool:
    """Edge test: bucket of ``j`` set in ``sig_i`` and bucket of ``i`` set in ``sig_j``.

    Never misses a real edge. Without an edge it errs with probability at
    most ``2 * psi / d``.
    """
    _check_dims(sig_i, sig_j)
    if mapper.d != sig_i.d:
        raise ValueError(f"mapper dimension {mapper.d} != sketch dimension {sig_i.d}")
    return sig_i.bit(mapper(j)) and sig_j.bit(mapper(i))


def estcn_from_counts(ci, cj, cij, d: int) -> np.ndarray:
    """Common-neighbor estimates from popcounts and overlaps (vectorized).

    ``D^n_i`` is exactly ``1 - c_i/d``, so the log argument
    ``D^n_i + D^n_j + c_ij/d - 1`` is formed as ``1 + (c_ij - c_i - c_j)/d``
    from integers, then floored at ``1/d^2``. Zero overlap gives exactly 0.
    """
    _check_d(d)
    ci = np.minimum(np.asarray(ci, dtype=np.float64), d - 1)
    cj = np.minimum(np.asarray(cj, dtype=np.float64), d - 1)
    cij = np.asarray(cij, dtype=np.float64)
    ln_d = _log_d(d)
    ni = np.log1p(-ci / d) / ln_d
    nj = np.log1p(-cj / d) / ln_d
    x = np.maximum((cij - ci - cj) / d, 1.0 / (d * d) - 1.0)
    value = ni + nj - np.log1p(x) / ln_d
    return np.where(cij == 0, 0.0, value)


@dataclass(frozen=True)
class CnEstimate:
    value: float
    raw_overlap: int
    deg_i_hat: float
    deg_j_hat: float

    @property
    def clamped(self) -> float:
        """``max(value, 0)``, for use as a similarity feature."""
        return max(self.value, 0.0)


def estimate_common_neighbors(sig_i: Sketch, sig_j: Sketch, d: int | None = None) -> CnEstimate:
    _check_dims(sig_i, sig_j)
    d = sig_i.d if d is None else d
    _check_d(d)
    ci, cj = popcount(sig_i), popcount(sig_j)
    cij = inner_product(sig_i, sig_j)
    value = float(estcn_from_counts(ci, cj, cij, d))
    return CnEstimate(
        value=value,
        raw_overlap=cij,
        deg_i_hat=float(degree_from_count(ci, d)),
        deg_j_hat=float(degree_from_count(cj, d)),
    )


def row_popcounts(es: EmbeddingSet) -> np.ndarray:
    return np.bitwise_count(es.words).sum(axis=1, dtype=np.int64)


def pair_overlaps(es: EmbeddingSet, pairs, op: str = "and") -> np.ndarray:
    """Popcount of ``AND`` (or ``XOR``) of each pair of rows."""
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    out = np.empty(len(pairs), dtype=np.int64)
    fn = np.bitwise_and if op == "and" else np.bitwise_xor
    for s in range(0, len(pairs), _PAIR_BATCH):
        p = pairs[s:s + _PAIR_BATCH]
        out[s:s + len(p)] = np.bitwise_count(fn(es.words[p[:, 0]], es.words[p[:, 1]])).sum(axis=1)
    return out


def estimate_common_neighbors_pairs(es: EmbeddingSet, pairs) -> tuple[np.ndarray, np.ndarray]:
    """Estimates and raw overlaps for many node pairs at once."""
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    pc = row_popcounts(es)
    cij = pair_overlaps(es, pairs)
    return estcn_from_counts(pc[pairs[:, 0]], pc[pairs[:, 1]], cij, es.d), cij


def _row_estimates(es: EmbeddingSet, i: int, pc: np.ndarray) -> np.ndarray:
    cik = np.bitwise_count(es.words & es.words[i]).sum(axis=1, dtype=np.int64)
    return estcn_from_counts(pc[i], pc, cik, es.d)


def estimate_power4(es: EmbeddingSet, i: int, j: int) -> float:
    """Estimate of the 4th-power adjacency entry, ``sum_k n2(i,k) * n2(k,j)``.

    Zero-overlap terms are exactly 0.0, so a true zero entry propagates
    whenever every constituent overlap is zero.
    """
    for u in (i, j):
        if not 0 <= u < es.n:
            raise IndexError(f"node {u} outside [0, {es.n})")
    pc = row_popcounts(es)
    ri = _row_estimates(es, i, pc)
    rj = ri if i == j else _row_estimates(es, j, pc)
    # same pairwise reduction as _square_symmetric, so results agree bit-for-bit
    return float(np.sum(ri * rj))


def estcn_matrix(es: EmbeddingSet) -> np.ndarray:
    """Dense matrix of common-neighbor estimates over all node pairs."""
    if es.n > DENSE_ORACLE_LIMIT:
        raise GraphSizeError(f"n={es.n} exceeds dense limit {DENSE_ORACLE_LIMIT}")
    bits = es.to_bits().astype(np.float64)
    overlap = np.rint(bits @ bits.T)
    pc = row_popcounts(es).astype(np.float64)
    return estcn_from_counts(pc[:, None], pc[None, :], overlap, es.d)


def estimate_power_2t(es: EmbeddingSet, t: int) -> np.ndarray:
    """Approximate A^(2^t): the estimate matrix squared ``t - 1`` times."""
    if t < 1:
        raise ValueError("t must be >= 1")
    m = estcn_matrix(es)
    for _ in range(t - 1):
        m = _square_symmetric(m)
    return m


def _square_symmetric(m: np.ndarray, budget: int = 1 << 25) -> np.ndarray:
    """``m @ m`` for symmetric ``m`` via contiguous pairwise sums, not BLAS.

    Deterministic summation order; entry ``(i, j)`` equals
    ``np.sum(m[i] * m[j])`` exactly.
    """
    n = m.shape[0]
    out = np.empty_like(m)
    block = max(1, budget // max(1, n * n))
    for s in range(0, n, block):
        out[s:s + block] = (m[s:s + block, None, :] * m[None, :, :]).sum(axis=2)
    return out


def sketch_similarity(a: Sketch, b: Sketch, kind: str = "inner") -> float:
    """``inner``, ``cosine``, ``l1`` (Hamming) or ``l2`` (sqrt Hamming)."""
    _check_dims(a, b)
    if kind == "inner":
        return float(inner_product(a, b))
    if kind == "cosine":
        pa, pb = popcount(a), popcount(b)
        return 0.0 if pa == 0 or pb == 0 else inner_product(a, b) / math.sqrt(pa * pb)
    if kind == "l1":
        return float(hamming(a, b))
    if kind == "l2":
        return math.sqrt(hamming(a, b))
    raise ValueError(f"unknown similarity kind {kind!r}; expected one of {SIMILARITY_KINDS}")


def similarity_pairs(es: EmbeddingSet, pairs, kind: str = "inner") -> np.ndarray:
    """Vectorized :func:`sketch_similarity` over node pairs of ``es``."""
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    if kind in ("l1", "l2"):
        h = pair_overlaps(es, pairs, op="xor").astype(np.float64)
        return h if kind == "l1" else np.sqrt(h)
    inner = pair_overlaps(es, pairs).astype(np.float64)
    if kind == "inner":
        return inner
    if kind == "cosine":
        pc = row_popcounts(es).astype(np.float64)
        denom = np.sqrt(pc[pairs[:, 0]] * pc[pairs[:, 1]])
        return np.divide(inner, denom, out=np.zeros_like(inner), where=denom > 0)
    raise ValueError(f"unknown similarity kind {kind!r}; expected one of {SIMILARITY_KINDS}")


def empirical_loss(g: Graph, es: EmbeddingSet, pairs) -> float:
    """Mean squared error of the common-neighbor estimates over ``pairs``."""
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    if len(pairs) == 0:
        raise ValueError("pair list is empty")
    if g.n != es.n:
        raise ValueError(f"graph has {g.n} nodes but embedding has {es.n}")
    exact = common_neighbors_pairs(g, pairs).astype(np.float64)
    est, _ = estimate_common_neighbors_pairs(es, pairs)
    return float(np.mean((exact - est) ** 2))
