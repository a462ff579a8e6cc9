"""Scalability sweep on synthetic community graphs, and embedding throughput."""

from __future__ import annotations

import time

import numpy as np

from .embedding import embed_graph
from .eval.pipelines import LinkPredConfig, run_link_prediction
from .graph import Graph
from .synth import SynthConfig, generate


def embed_throughput(g: Graph, d: int, seed: int, repeats: int = 3, threads: int = 1) -> dict:
    """Best-of-``repeats`` single embedding time, as edges per second."""
    best = float("inf")
    for r in range(repeats):
        t0 = time.perf_counter()
        embed_graph(g, d, seed + r, threads=threads)
        best = min(best, time.perf_counter() - t0)
    return {"d": d, "edges": g.num_edges, "seconds": best,
            "edges_per_s": g.num_edges / best if best > 0 else float("inf"),
            "us_per_edge": 1e6 * best / max(g.num_edges, 1)}


def sweep(
    sizes: list[int],
    dims: list[int],
    seed: int,
    avg_degree: float = 20.0,
    mu: float = 0.1,
    communities: int = 10,
    threads: int = 1,
) -> list[dict]:
    """One link-prediction run per (graph size, dimension)."""
    rows = []
    for n in sizes:
        g, _ = generate(SynthConfig.from_mixing(n, communities, avg_degree, mu, seed))
        for d in dims:
            rep = run_link_prediction(g, LinkPredConfig(seed=seed, dim=d, threads=threads))
            rows.append({
                "n": n,
                "edges": g.num_edges,
                "dim": d,
                "auc_roc": rep.metrics["auc_roc"],
                "compression_time_s": rep.compression_time_s,
                "train_time_s": rep.train_time_s,
            })
    return rows


def edge_sweep(n: int, edge_counts: list[int], d: int, seed: int, mu: float = 0.1,
               communities: int = 10) -> list[dict]:
    """Embedding time at fixed ``n`` and ``d`` while the edge count grows."""
    rows = []
    for m in edge_counts:
        g, _ = generate(SynthConfig.from_mixing(n, communities, 2.0 * m / n, mu, seed))
        rows.append({"n": n, **embed_throughput(g, d, seed)})
    return rows


def per_edge_time_ratio(rows: list[dict]) -> float:
    """Largest over smallest per-edge time across a sweep (1.0 means linear)."""
    per = np.array([r["us_per_edge"] for r in rows])
    return float(per.max() / per.min())
