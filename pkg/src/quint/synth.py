"""Synthetic graphs: planted partitions and capped power-law configuration models.

The planted-partition model (with an optional mixing fraction) stands in for
LFR community benchmarks in scalability sweeps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .graph import Graph
from .labels import LabelSet

MODELS = ("planted_partition", "power_law_config")


class InfeasibleConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SynthConfig:
    model: str
    n: int
    seed: int
    communities: int = 1
    p_in: float = 0.0
    p_out: float = 0.0
    tau: float = 2.0
    psi_max: Optional[int] = None
    k_min: int = 1

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}; expected one of {MODELS}")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not (0.0 <= self.p_in <= 1.0 and 0.0 <= self.p_out <= 1.0):
            raise ValueError("edge probabilities must lie in [0, 1]")
        if not 1 <= self.communities <= self.n:
            raise ValueError("communities must lie in [1, n]")
        if self.tau <= 1.0:
            raise ValueError("degree exponent tau must exceed 1")
        if self.psi_max is not None and self.psi_max > self.n - 1:
            raise InfeasibleConfigError(f"degree cap {self.psi_max} exceeds n - 1 = {self.n - 1}")

    @classmethod
    def from_mixing(cls, n: int, communities: int, avg_degree: float, mu: float, seed: int) -> "SynthConfig":
        """Planted partition where a fraction ``mu`` of each node's expected
        degree goes to other communities."""
        if not 0.0 <= mu <= 1.0:
            raise ValueError("mu must lie in [0, 1]")
        size = n / communities
        p_in = (1 - mu) * avg_degree / max(size - 1, 1)
        p_out = mu * avg_degree / (n - size) if communities > 1 else 0.0
        if p_in > 1 or p_out > 1:
            raise InfeasibleConfigError("average degree too high for the block sizes")
        return cls("planted_partition", n, seed, communities=communities, p_in=p_in, p_out=p_out)


def _triangle_decode(idx: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Map ``idx = r(r-1)/2 + c`` (``0 <= c < r``) back to ``(c, r)``."""
    r = ((1 + np.sqrt(1 + 8 * idx.astype(np.float64))) // 2).astype(np.int64)
    # float sqrt can be off by one near perfect squares
    r -= (r * (r - 1) // 2) > idx
    r += ((r + 1) * r // 2) <= idx
    c = idx - r * (r - 1) // 2
    return c, r


def _sample_block(rng: np.random.Generator, total: int, p: float) -> np.ndarray:
    if total == 0 or p == 0.0:
        return np.zeros(0, dtype=np.int64)
    k = rng.binomial(total, p)
    return np.sort(rng.choice(total, size=k, replace=False)).astype(np.int64)


def planted_partition(cfg: SynthConfig) -> tuple[Graph, LabelSet]:
    rng = np.random.default_rng(cfg.seed)
    n, c = cfg.n, cfg.communities
    # contiguous blocks of near-equal size
    bounds = [b * n // c for b in range(c + 1)]
    chunks = []
    for a in range(c):
        lo_a, sa = bounds[a], bounds[a + 1] - bounds[a]
        idx = _sample_block(rng, sa * (sa - 1) // 2, cfg.p_in)
        u, v = _triangle_decode(idx)
        chunks.append(np.stack([u + lo_a, v + lo_a], axis=1))
        for b in range(a + 1, c):
            lo_b, sb = bounds[b], bounds[b + 1] - bounds[b]
            idx = _sample_block(rng, sa * sb, cfg.p_out)
            chunks.append(np.stack([idx // sb + lo_a, idx % sb + lo_b], axis=1))
    edges = np.concatenate(chunks) if chunks else np.zeros((0, 2), np.int64)
    y = np.searchsorted(bounds, np.arange(n), side="right") - 1
    return Graph.from_edges(n, edges), LabelSet.from_array(y, c)


def power_law_degrees(rng: np.random.Generator, n: int, tau: float, k_min: int, k_max: int) -> np.ndarray:
    """Discrete power law ``P(k) ~ k^-tau`` on ``[k_min, k_max]``."""
    ks = np.arange(k_min, k_max + 1)
    w = ks.astype(np.float64) ** -tau
    return rng.choice(ks, size=n, p=w / w.sum())


def configuration_graph(rng: np.random.Generator, degrees: np.ndarray) -> Graph:
    """Random stub matching; self-loops and parallel edges are rejected,
    so realized degrees never exceed the requested ones."""
    degrees = np.asarray(degrees, dtype=np.int64).copy()
    n = len(degrees)
    if degrees.sum() % 2:
        degrees[int(np.argmax(degrees))] -= 1
    stubs = np.repeat(np.arange(n, dtype=np.int64), degrees)
    rng.shuffle(stubs)
    return Graph.from_edges(n, stubs.reshape(-1, 2))


def power_law_config(cfg: SynthConfig) -> tuple[Graph, LabelSet]:
    rng = np.random.default_rng(cfg.seed)
    cap = cfg.psi_max if cfg.psi_max is not None else cfg.n - 1
    if cfg.k_min > cap:
        raise InfeasibleConfigError(f"k_min {cfg.k_min} exceeds degree cap {cap}")
    if cfg.n < 2 and cfg.k_min > 0:
        raise InfeasibleConfigError("a single node cannot carry edges")
    deg = power_law_degrees(rng, cfg.n, cfg.tau, cfg.k_min, cap)
    g = configuration_graph(rng, deg)
    return g, LabelSet.from_array(np.zeros(cfg.n, dtype=np.int64), 1)


def generate(cfg: SynthConfig) -> tuple[Graph, LabelSet]:
    """Deterministic synthetic graph plus labels for ``cfg``.

    Planted partitions label nodes by community; power-law graphs carry a
    single dummy class.
    """
    if cfg.model == "planted_partition":
        return planted_partition(cfg)
    return power_law_config(cfg)


def bounded_degree_graph(n: int, psi: int, seed: int, spread: bool = False) -> Graph:
    """Random graph with maximum degree at most ``psi``.

    Degrees are ``psi`` for every node (``spread=False``) or uniform on
    ``[1, psi]``, then realized by the configuration model.
    """
    if psi > n - 1:
        raise InfeasibleConfigError(f"psi {psi} exceeds n - 1")
    rng = np.random.default_rng(seed)
    deg = rng.integers(1, psi + 1, size=n) if spread else np.full(n, psi)
    return configuration_graph(rng, deg)


def erdos_renyi(n: int, p: float, seed: int) -> Graph:
    return planted_partition(SynthConfig("planted_partition", n, seed, communities=1, p_in=p))[0]
