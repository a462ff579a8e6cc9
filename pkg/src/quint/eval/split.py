"""Link-prediction splits that never disconnect the residual graph."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import minimum_spanning_tree

from ..graph import Graph, pair_keys

# enumerate all non-edges outright below this many candidate pairs
_ENUMERATE_LIMIT = 2_000_000


class SplitError(ValueError):
    pass


@dataclass
class LinkPredSplit:
    residual_graph: Graph
    pos_train: np.ndarray
    pos_test: np.ndarray
    neg_train: np.ndarray
    neg_test: np.ndarray
    seed: int
    test_fraction: float

    def train_pairs(self) -> tuple[np.ndarray, np.ndarray]:
        pairs = np.concatenate([self.pos_train, self.neg_train])
        y = np.concatenate([np.ones(len(self.pos_train)), np.zeros(len(self.neg_train))])
        return pairs, y

    def test_pairs(self) -> tuple[np.ndarray, np.ndarray]:
        pairs = np.concatenate([self.pos_test, self.neg_test])
        y = np.concatenate([np.ones(len(self.pos_test)), np.zeros(len(self.neg_test))])
        return pairs, y


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def spanning_forest_mask(g: Graph, rng: np.random.Generator) -> np.ndarray:
    """Boolean mask over ``g.edges`` marking a random spanning forest.

    Minimum spanning forest under i.i.d. random weights, i.e. Kruskal on a
    random edge order.
    """
    m = g.num_edges
    if m == 0:
        return np.zeros(0, dtype=bool)
    w = rng.uniform(1.0, 2.0, size=m)
    mat = sp.csr_matrix((w, (g.edges[:, 0], g.edges[:, 1])), shape=(g.n, g.n))
    tree = minimum_spanning_tree(mat).tocoo()
    forest = pair_keys(np.stack([tree.row, tree.col], axis=1), g.n)
    return np.isin(g.edge_keys(), forest)


def sample_negative_edges(g: Graph, count: int, seed) -> np.ndarray:
    """``count`` distinct node pairs, uniform over pairs that are not edges.

    Rows are ``(u, v)`` with ``u < v``.
    """
    rng = _rng(seed)
    n = g.n
    available = n * (n - 1) // 2 - g.num_edges
    if count < 0 or count > available:
        raise SplitError(f"requested {count} non-edges but only {available} exist")
    if count == 0:
        return np.zeros((0, 2), dtype=np.int64)
    taken = g.edge_keys()
    total = n * (n - 1) // 2
    if total <= _ENUMERATE_LIMIT or count * 4 >= available:
        iu, ju = np.triu_indices(n, k=1)
        keys = iu.astype(np.int64) * n + ju
        keys = keys[~np.isin(keys, taken)]
        chosen = rng.choice(keys, size=count, replace=False)
    else:
        found = np.zeros(0, dtype=np.int64)
        while len(found) < count:
            draw = int((count - len(found)) * 1.2) + 64
            u = rng.integers(0, n, size=draw)
            v = rng.integers(0, n, size=draw)
            keep = u != v
            keys = pair_keys(np.stack([u[keep], v[keep]], axis=1), n)
            keys = keys[~np.isin(keys, taken)]
            # keep first occurrences so the result stays uniform
            merged = np.concatenate([found, keys])
            _, first = np.unique(merged, return_index=True)
            found = merged[np.sort(first)]
        chosen = found[:count]
    return np.stack([chosen // n, chosen % n], axis=1).astype(np.int64)


def split_link_prediction(g: Graph, test_edge_fraction: float = 0.3, seed=0) -> LinkPredSplit:
    """Hold out a fraction of edges as test positives without cutting the graph.

    A random spanning forest is protected; test positives are drawn only
    from the remaining edges, so every connected component survives.
    Negatives (as many as the original edges, none an original edge) are
    split with the same fraction. Graphs with fewer non-edges than edges,
    such as a triangle, get every non-edge as a negative.
    """
    if not 0.0 < test_edge_fraction < 1.0:
        raise SplitError("test_edge_fraction must lie in (0, 1)")
    rng = _rng(seed)
    m = g.num_edges
    k = int(round(test_edge_fraction * m))
    if k < 1:
        raise SplitError(f"graph with {m} edges yields no test edges at fraction {test_edge_fraction}")
    forest = spanning_forest_mask(g, rng)
    spare = np.flatnonzero(~forest)
    if len(spare) < k:
        raise SplitError(
            f"need {k} removable edges but only {len(spare)} lie outside a spanning forest "
            f"(deficit {k - len(spare)})"
        )
    test_idx = np.sort(rng.choice(spare, size=k, replace=False))
    keep = np.ones(m, dtype=bool)
    keep[test_idx] = False
    pos_test = g.edges[test_idx]
    pos_train = g.edges[keep]
    residual = Graph.from_edges(g.n, pos_train, g.id_map)

    n_neg = min(m, g.n * (g.n - 1) // 2 - m)
    neg = sample_negative_edges(g, n_neg, rng)
    k_neg = int(round(test_edge_fraction * len(neg)))
    return LinkPredSplit(
        residual_graph=residual,
        pos_train=pos_train,
        pos_test=pos_test,
        neg_train=neg[k_neg:],
        neg_test=neg[:k_neg],
        seed=seed if not isinstance(seed, np.random.Generator) else -1,
        test_fraction=test_edge_fraction,
    )
