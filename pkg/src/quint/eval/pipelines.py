"""End-to-end link-prediction and node-classification runs."""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from ..embedding import compute_dimension, embed_graph
from ..estimators import estimate_common_neighbors_pairs, similarity_pairs
from ..graph import Graph, common_neighbors_pairs, max_degree
from ..labels import LabelSet
from .logistic import LogisticHyper, train_logistic
from .metrics import auc_roc, f1_from_indicators
from .split import split_link_prediction

SIMILARITIES = ("estcn", "inner", "cosine", "l1", "l2")
FEATURE_SOURCES = ("quint", "uncompressed")


@dataclass
class EvalReport:
    task: str
    dim: int
    seed: int
    metrics: dict
    compression_time_s: float
    train_time_s: float
    params: dict = field(default_factory=dict)

    def to_dict(self, timings: bool = True) -> dict:
        out = asdict(self)
        if not timings:
            out["compression_time_s"] = 0.0
            out["train_time_s"] = 0.0
        return out

    def to_json(self, timings: bool = True) -> str:
        return json.dumps(self.to_dict(timings))


@dataclass
class LinkPredConfig:
    seed: int
    dim: Optional[int] = None
    rho: Optional[float] = None
    similarity: str = "estcn"
    features: str = "quint"
    test_fraction: float = 0.3
    hyper: LogisticHyper = field(default_factory=LogisticHyper)
    threads: int = 1

    def __post_init__(self):
        if self.similarity not in SIMILARITIES:
            raise ValueError(f"similarity must be one of {SIMILARITIES}")
        if self.features not in FEATURE_SOURCES:
            raise ValueError(f"features must be one of {FEATURE_SOURCES}")
        if self.features == "quint" and (self.dim is None) == (self.rho is None):
            raise ValueError("exactly one of dim and rho is required for quint features")


@dataclass
class NodeClassConfig:
    seed: int
    dim: Optional[int] = None
    rho: Optional[float] = None
    features: str = "quint"
    train_fraction: float = 0.7
    repeats: int = 10
    hyper: LogisticHyper = field(default_factory=LogisticHyper)
    threads: int = 1

    def __post_init__(self):
        if self.features not in FEATURE_SOURCES:
            raise ValueError(f"features must be one of {FEATURE_SOURCES}")
        if self.features == "quint" and (self.dim is None) == (self.rho is None):
            raise ValueError("exactly one of dim and rho is required for quint features")
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must lie in (0, 1)")


def _resolve_dim(g: Graph, dim, rho) -> int:
    return dim if dim is not None else compute_dimension(max_degree(g), rho)


def _exact_similarity(g: Graph, pairs: np.ndarray, kind: str) -> np.ndarray:
    cn = common_neighbors_pairs(g, pairs).astype(np.float64)
    if kind in ("estcn", "inner"):
        return cn
    deg = g.degrees().astype(np.float64)
    di, dj = deg[pairs[:, 0]], deg[pairs[:, 1]]
    if kind == "cosine":
        denom = np.sqrt(di * dj)
        return np.divide(cn, denom, out=np.zeros_like(cn), where=denom > 0)
    ham = di + dj - 2 * cn
    return ham if kind == "l1" else np.sqrt(ham)


def pair_features(es, pairs: np.ndarray, kind: str) -> np.ndarray:
    """One scalar similarity per pair from sketches; EstCN is clamped at 0."""
    if kind in ("estcn", "inner"):
        est, _ = estimate_common_neighbors_pairs(es, pairs)
        return np.maximum(est, 0.0)
    return similarity_pairs(es, pairs, kind)


def run_link_prediction(g: Graph, cfg: LinkPredConfig) -> EvalReport:
    """Split, embed the residual graph, score pairs, fit LR, report test AUC.

    The split draws from ``seed``; the embedding uses the same ``seed`` for
    its bucket map.
    """
    split = split_link_prediction(g, cfg.test_fraction, cfg.seed)
    residual = split.residual_graph
    train_pairs, y_train = split.train_pairs()
    test_pairs, y_test = split.test_pairs()

    compression = 0.0
    if cfg.features == "quint":
        d = _resolve_dim(residual, cfg.dim, cfg.rho)
        t0 = time.perf_counter()
        es = embed_graph(residual, d, cfg.seed, threads=cfg.threads, rho=cfg.rho)
        compression = time.perf_counter() - t0
        f_train = pair_features(es, train_pairs, cfg.similarity)
        f_test = pair_features(es, test_pairs, cfg.similarity)
    else:
        d = g.n
        f_train = _exact_similarity(residual, train_pairs, cfg.similarity)
        f_test = _exact_similarity(residual, test_pairs, cfg.similarity)

    t1 = time.perf_counter()
    model = train_logistic(f_train, y_train, cfg.hyper)
    train_time = time.perf_counter() - t1
    auc = auc_roc(model.decision_function(f_test), y_test)

    return EvalReport(
        task="linkpred",
        dim=int(d),
        seed=cfg.seed,
        metrics={"auc_roc": auc},
        compression_time_s=compression,
        train_time_s=train_time,
        params={
            "similarity": cfg.similarity,
            "features": cfg.features,
            "rho": cfg.rho,
            "test_fraction": cfg.test_fraction,
            "n": g.n,
            "edges": g.num_edges,
            "psi": max_degree(residual),
            "pos_train": len(split.pos_train),
            "pos_test": len(split.pos_test),
            "neg_train": len(split.neg_train),
            "neg_test": len(split.neg_test),
        },
    )


def _predict_one_vs_rest(X_train, Y_train, X_test, hyper, multi_label: bool) -> np.ndarray:
    n_classes = Y_train.shape[1]
    probs = np.zeros((X_test.shape[0], n_classes))
    for c in range(n_classes):
        y = Y_train[:, c]
        if y.all() or not y.any():
            # one-sided class in this split: constant prediction
            probs[:, c] = float(y.any())
            continue
        probs[:, c] = train_logistic(X_train, y, hyper).predict_proba(X_test)
    if multi_label:
        return probs >= 0.5
    pred = np.zeros_like(probs, dtype=bool)
    pred[np.arange(len(probs)), probs.argmax(axis=1)] = True
    return pred


def run_node_classification(g: Graph, labels: LabelSet, cfg: NodeClassConfig) -> EvalReport:
    """Embed the whole graph once, then average F1 over repeated random node splits."""
    if labels.n != g.n:
        raise ValueError(f"labels cover {labels.n} nodes but graph has {g.n}")
    nodes = labels.labeled_nodes()
    Y = labels.indicator(nodes)
    if (Y.sum(axis=0) > 0).sum() < 2:
        raise ValueError("node classification needs at least two populated classes")

    compression = 0.0
    if cfg.features == "quint":
        d = _resolve_dim(g, cfg.dim, cfg.rho)
        t0 = time.perf_counter()
        es = embed_graph(g, d, cfg.seed, threads=cfg.threads, rho=cfg.rho)
        compression = time.perf_counter() - t0
        X = es.to_bits()[nodes].astype(np.float64)
    else:
        d = g.n
        X = g.adjacency()[nodes].astype(np.float64)

    micro, macro = [], []
    train_time = 0.0
    n_train = int(round(cfg.train_fraction * len(nodes)))
    for r in range(cfg.repeats):
        perm = np.random.default_rng([cfg.seed, r]).permutation(len(nodes))
        tr, te = perm[:n_train], perm[n_train:]
        t1 = time.perf_counter()
        pred = _predict_one_vs_rest(X[tr], Y[tr], X[te], cfg.hyper, labels.multi_label)
        train_time += time.perf_counter() - t1
        mi, ma = f1_from_indicators(pred, Y[te])
        micro.append(mi)
        macro.append(ma)

    return EvalReport(
        task="nodeclass",
        dim=int(d),
        seed=cfg.seed,
        metrics={
            "micro_f1": float(np.mean(micro)),
            "macro_f1": float(np.mean(macro)),
            "micro_f1_std": float(np.std(micro)),
            "macro_f1_std": float(np.std(macro)),
        },
        compression_time_s=compression,
        train_time_s=train_time,
        params={
            "features": cfg.features,
            "rho": cfg.rho,
            "train_fraction": cfg.train_fraction,
            "repeats": cfg.repeats,
            "n": g.n,
            "edges": g.num_edges,
            "labeled": int(len(nodes)),
            "classes": labels.num_classes,
            "multi_label": labels.multi_label,
        },
    )
